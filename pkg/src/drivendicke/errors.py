"""Exception types shared across the package."""


class DrivenDickeError(Exception):
    """Base class for all package errors."""


class SubluminalViolationError(DrivenDickeError):
    """Requested oscillation exceeds the speed of light (xi >= 1)."""


class CriticalNumberUndefinedError(DrivenDickeError):
    """N_crit requested while the effective coupling is exactly zero."""


class TruncationError(DrivenDickeError):
    """Population leaked into the top cavity Fock level beyond tolerance."""


class PositivityError(DrivenDickeError):
    """State positivity violated beyond tolerance (integrator too loose)."""


class ParametricInstabilityError(DrivenDickeError):
    """Bosonic-limit steady state requested at/above the instability threshold."""


class UndefinedFanoError(DrivenDickeError):
    """Fano factor requested for a (near-)vacuum state."""


class DegenerateDenominatorError(DrivenDickeError):
    """Closed-form steady state hit the N*(gamma_c+gamma_d) = gamma_c pole."""


class DivergenceError(DrivenDickeError):
    """Moment integration blew up (photon number beyond the divergence cap)."""


class NonConvergenceError(DrivenDickeError):
    """Newton iteration failed to converge within the iteration cap."""


class GridCoverageError(DrivenDickeError):
    """Phase-space grid too small to capture the state (normalization check)."""


class ConfigError(DrivenDickeError):
    """Run configuration invalid; carries field name and line when known."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        loc = ""
        if field is not None:
            loc += f" [field: {field}"
            loc += f", line {line}]" if line is not None else "]"
        super().__init__(message + loc)


class GoldenChecksumError(DrivenDickeError):
    """A shipped golden file does not match its recorded checksum."""


class VerificationFailure(DrivenDickeError):
    """One or more acceptance checks failed."""
