"""Exceptions raised by dyncred"""


class CredibilityError(ValueError):
    """Base class for all dyncred errors"""


# linalg
class NotPositiveDefinite(CredibilityError):
    """A covariance matrix failed the positive-definite pivot check"""


class InvalidRho(CredibilityError):
    """Autocorrelation parameter outside its admissible range"""


class SingularUpdate(CredibilityError):
    """Sherman-Morrison denominator is (numerically) zero"""


class DimensionMismatch(CredibilityError):
    """Vector / matrix shapes do not agree"""


# processes and models
class InvalidParams(CredibilityError):
    """Process or model parameters outside their domain"""


class InvalidVariant(CredibilityError):
    """Operation called with the wrong covariance model variant"""


class UnsupportedVarianceFn(CredibilityError):
    """Unit variance function not handled by the covariance builder"""


class InvalidAlpha(CredibilityError):
    """Harvey-Fernandez discount factor outside (0, 1]"""


class NonStationary(CredibilityError):
    """ARMA(1,1) autoregressive coefficient outside (-1, 1)"""


# premiums
class ParticleDegeneracy(CredibilityError):
    """Effective sample size collapsed in the particle filter"""


class MissingTruth(CredibilityError):
    """True latent factor requested from a panel that does not carry it"""


class DegenerateDenominator(CredibilityError):
    """Moment estimator denominator is zero"""


class InvalidSigma(CredibilityError):
    """Random-effect variance must be positive"""


# glm
class RankDeficient(CredibilityError):
    """Design matrix is not of full column rank"""


# cli
class UnknownTable(CredibilityError):
    """Requested golden table id does not exist"""


class ConfigError(CredibilityError):
    """Run configuration failed validation"""
