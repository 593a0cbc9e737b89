"""
Component logging for dyncred
"""

import logging
import os
from datetime import datetime
from typing import Dict, List, Optional


class MillisecondFormatter(logging.Formatter):
    def formatTime(self, record, datefmt=None):
        dt = datetime.fromtimestamp(record.created)
        return dt.strftime('%H:%M:%S.%f')[:-3]


class ComponentFilter(logging.Filter):
    """Stamps every record with the component name"""

    def __init__(self, component: str):
        super().__init__()
        self.component = component.upper()

    def filter(self, record):
        record.component = self.component
        return True


class CredibilityLogger:
    """Manages per-component logging with console and optional file output"""

    _loggers: Dict[str, logging.Logger] = {}  # Cache for component loggers
    _console_level = logging.INFO

    FILE_FORMAT = '%(asctime)s - [%(component)s] - %(levelname)s - %(funcName)s - %(message)s'
    CONSOLE_FORMAT = '%(asctime)s [%(component)s] %(levelname)s: %(message)s'

    @classmethod
    def get_logger(cls, component: str, log_dir: Optional[str] = None) -> logging.Logger:
        """
        Get or create a logger for a dyncred component

        Args:
            component: Component name (e.g., 'credibility', 'premiums')
            log_dir: Directory for the DEBUG log file; console only when None

        Returns:
            Configured logger instance
        """
        logger_name = f"dyncred.{component.lower()}"

        if logger_name in cls._loggers:
            logger = cls._loggers[logger_name]
            if log_dir:
                cls._add_file_handler(logger, component, log_dir)
            return logger

        logger = logging.getLogger(logger_name)
        logger.setLevel(logging.DEBUG)
        logger.handlers.clear()
        logger.propagate = False

        console_handler = logging.StreamHandler()
        console_handler.setLevel(cls._console_level)
        console_handler.setFormatter(MillisecondFormatter(cls.CONSOLE_FORMAT))
        logger.addHandler(console_handler)

        logger.addFilter(ComponentFilter(component))

        if log_dir:
            cls._add_file_handler(logger, component, log_dir)

        cls._loggers[logger_name] = logger
        return logger

    @classmethod
    def _add_file_handler(cls, logger: logging.Logger, component: str, log_dir: str):
        if any(isinstance(h, logging.FileHandler) for h in logger.handlers):
            return
        os.makedirs(log_dir, exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d")
        log_filename = os.path.join(log_dir, f"{component.lower()}_{timestamp}.log")
        file_handler = logging.FileHandler(log_filename, encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(MillisecondFormatter(cls.FILE_FORMAT))
        logger.addHandler(file_handler)
        logger.debug(f"Log file: {log_filename}")

    @classmethod
    def configure(cls, level: Optional[str] = None, log_dir: Optional[str] = None):
        """Apply console level and file output to every cached logger"""
        if level:
            cls._console_level = logging.getLevelName(level.upper())
        for name, logger in cls._loggers.items():
            for handler in logger.handlers:
                if not isinstance(handler, logging.FileHandler):
                    handler.setLevel(cls._console_level)
            if log_dir:
                cls._add_file_handler(logger, name.split(".", 1)[1], log_dir)

    @classmethod
    def log_factors(cls, logger: logging.Logger, factors):
        """Log a set of credibility factors"""
        logger.info(
            f"Factors T={factors.T} - alpha0: {factors.alpha0:.6g}, "
            f"regular: {'yes' if factors.regular else 'no'}, "
            f"isotonic: {'yes' if factors.isotonic_star else 'no'}"
        )
        logger.debug(f"  alpha: {[round(float(a), 10) for a in factors.alpha]}")
        logger.debug(f"  alpha*: {[round(float(a), 10) for a in factors.alpha_star]}")

    @classmethod
    def log_fit(cls, logger: logging.Logger, fit):
        """Log a GLM fit summary"""
        status = "converged" if fit.converged else "NOT converged"
        logger.info(
            f"Poisson GLM {status} after {fit.iterations} iterations - "
            f"loglik: {fit.log_likelihood:.4f}, deviance: {fit.deviance:.4f}"
        )
        for j, (b, se) in enumerate(zip(fit.beta, fit.std_err)):
            logger.debug(f"  beta[{j}] = {b:.6f} (se {se:.6f})")
        cls.log_warning_flags(logger, fit.warnings)

    @classmethod
    def log_report(cls, logger: logging.Logger, report):
        """Log the per-method error summary of a premium report"""
        for method, summary in report.summary.items():
            logger.info(
                f"{method.value:>10} - RMSE: {summary.rmse:.6f} ({summary.relative_rmse_pct:.1f}%), "
                f"MAE: {summary.mae:.6f} ({summary.relative_mae_pct:.1f}%)"
            )

    @classmethod
    def log_warning_flags(cls, logger: logging.Logger, flags: List[str]):
        """Log every warning flag at WARNING level"""
        for flag in flags:
            logger.warning(flag)
