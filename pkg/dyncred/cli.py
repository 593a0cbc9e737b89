"""dyncred Command Line Interface"""

import argparse
import os
import sys
from typing import List, Optional

from .config import RunConfig, RunConfigLoader
from .credibility import closed_form_factors_model1, credibility_factors
from .errors import ConfigError, CredibilityError
from .persistence import (
    factors_to_dict,
    fit_to_dict,
    format_factors,
    format_report_table,
    format_study_table,
    read_panel_csv,
    write_json,
    write_panel_csv,
    write_report,
    write_study,
)
from .premiums import evaluate, fit_panel, run_simulation_study
from .processes import simulate_panel
from .tables import build_table, resolve_table_ids, write_table
from .types import CovVariant
from .utils.env import RuntimeDefaults
from .utils.logging import CredibilityLogger


class DynCredCLI:
    """Command line interface for dynamic credibility runs"""

    def __init__(self):
        self.config_manager = RunConfigLoader()
        self.defaults: Optional[RuntimeDefaults] = None
        self.logger = CredibilityLogger.get_logger("cli")

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog="dyncred", description="Dynamic random-effects credibility factors and premiums"
        )
        parser.add_argument('--seed', type=int, help='Seed overriding config and DYNCRED_SEED')
        parser.add_argument('--log-dir', help='Directory for DEBUG log files')
        parser.add_argument('--verbose', '-v', action='store_true', help='Console DEBUG output')

        subparsers = parser.add_subparsers(dest='command', help='Commands')

        factors_parser = subparsers.add_parser('factors', help='Credibility factors of a model')
        factors_parser.add_argument('--config', '-c', required=True, help='Configuration file path')
        factors_parser.add_argument('--output', '-o', help='Factors JSON path')

        tables_parser = subparsers.add_parser('tables', help='Reproduce reference factor tables')
        tables_parser.add_argument('--table', '-t', action='append',
                                   help='Table id or "all" (repeatable)')
        tables_parser.add_argument('--config', '-c', help='Configuration file path')
        tables_parser.add_argument('--output', '-o', help='Output directory')

        simulate_parser = subparsers.add_parser('simulate', help='Simulate a claim panel')
        simulate_parser.add_argument('--config', '-c', required=True, help='Configuration file path')
        simulate_parser.add_argument('--output', '-o', help='Panel CSV path')

        evaluate_parser = subparsers.add_parser('evaluate', help='Compare premium methods')
        evaluate_parser.add_argument('--config', '-c', required=True, help='Configuration file path')
        evaluate_parser.add_argument('--output', '-o', help='Output directory')

        fit_parser = subparsers.add_parser('fit', help='Fit the GLM and moment estimates')
        fit_parser.add_argument('--config', '-c', required=True, help='Configuration file path')
        fit_parser.add_argument('--output', '-o', help='Fit JSON path')
        return parser

    def run(self, argv: Optional[List[str]] = None) -> int:
        """Run the CLI and return the exit status"""
        parser = self.build_parser()
        args = parser.parse_args(argv)

        if not args.command:
            parser.print_help()
            return 1

        try:
            self.defaults = RuntimeDefaults.shared()
        except ConfigError as e:
            print(f"Error: {e}", file=sys.stderr)
            return 1

        CredibilityLogger.configure(
            level="DEBUG" if args.verbose else self.defaults.log_level,
            log_dir=args.log_dir or self.defaults.log_dir,
        )

        command_method = getattr(self, f'cmd_{args.command}', None)
        if command_method is None:
            print(f"Unknown command: {args.command}", file=sys.stderr)
            return 1
        try:
            command_method(args)
        except (CredibilityError, OSError) as e:
            self.logger.debug(f"{args.command} failed: {e!r}")
            print(f"Error: {e}", file=sys.stderr)
            return 1
        return 0

    def _load(self, args, command: str) -> RunConfig:
        config = self.config_manager.load_from_file(args.config)
        if config.command != command:
            raise ConfigError(
                f"{args.config} is a '{config.command}' configuration, not '{command}'"
            )
        return config

    def _seed(self, args, config: RunConfig) -> int:
        return self.defaults.resolve_seed(args.seed, config.seed)

    def cmd_factors(self, args):
        """Print and save credibility factors"""
        config = self._load(args, "factors")
        T = config.factor_periods
        if config.model.variant == CovVariant.DYNAMIC_AR1:
            factors = closed_form_factors_model1(config.model, T)
        else:
            factors = credibility_factors(config.model, T)
        CredibilityLogger.log_factors(self.logger, factors)

        print(format_factors(factors))
        path = args.output or config.output.path("factors")
        write_json(factors_to_dict(factors), path)
        print(f"Factors written to {path}")

    def cmd_tables(self, args):
        """Write the reference tables as CSV files"""
        config = self._load(args, "tables") if args.config else RunConfig(command="tables")
        directory = args.output or config.output.directory
        for table_id in resolve_table_ids(args.table or config.tables):
            table = build_table(table_id)
            path = write_table(table, directory)
            print(f"{table.title}: {path}")

    def cmd_simulate(self, args):
        """Simulate a panel and write it as CSV"""
        config = self._load(args, "simulate")
        sim = config.simulation
        seed = self._seed(args, config)
        panel = simulate_panel(sim.n_policies, sim.periods, sim.state, sim.family, sim.beta,
                               sim.covariates, seed)
        path = args.output or config.output.path("panel")
        write_panel_csv(panel, path)
        print(f"Simulated {panel.n_policies} policies x {sim.periods + 1} periods "
              f"(seed {seed}) to {path}")

    def cmd_evaluate(self, args):
        """Run the premium comparison on a panel, or the simulation study"""
        config = self._load(args, "evaluate")
        if config.study is not None:
            self._run_study(args, config)
            return
        panel = read_panel_csv(config.panel_path, config.train_periods)
        report = evaluate(panel, config.methods, config.evaluation, seed=self._seed(args, config))

        output = config.output
        directory = args.output or output.directory
        write_report(
            report,
            os.path.join(directory, output.rows),
            os.path.join(directory, output.summary),
            os.path.join(directory, output.table),
        )
        print(format_report_table(report, config.methods), end="")
        print(f"Report written to {directory}")

    def _run_study(self, args, config: RunConfig):
        study = config.study
        rows = run_simulation_study(study.scenarios, config.methods, study.seeds,
                                    study.n_policies, study.periods, study.beta,
                                    study.covariates, config.evaluation)
        output = config.output
        directory = args.output or output.directory
        write_study(
            rows,
            config.methods,
            os.path.join(directory, output.study_rows),
            os.path.join(directory, output.study_table),
        )
        print(format_study_table(rows, config.methods), end="")
        print(f"Study of {len(rows)} scenarios written to {directory}")

    def cmd_fit(self, args):
        """Fit the Poisson GLM and the moment estimates"""
        config = self._load(args, "fit")
        panel = read_panel_csv(config.panel_path, config.train_periods)
        fit, moments = fit_panel(panel, config.family, config.add_intercept)

        names = [f"x{j}" for j in range(1, panel.n_covariates + 1)]
        if config.add_intercept:
            names = ["(Intercept)"] + names
        print(fit.coefficient_table(names))
        print(f"sigma2_hat = {moments.sigma2_hat:.6f}, rho_hat = {moments.rho_hat:.6f}")

        data = fit_to_dict(fit, moments, names)
        path = args.output or config.output.path("fit")
        write_json(data, path)
        print(f"Fit written to {path}")


def main():
    """Main entry point"""
    cli = DynCredCLI()
    sys.exit(cli.run())


if __name__ == "__main__":
    main()
