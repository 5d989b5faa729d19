"""
Error types raised by the VS_StabCert toolkit.

Every failure that stops an operation is a subclass of StabCertError so the
command line can turn it into a diagnostic JSON document and exit code 1.
Failures that are results (hypothesis reports, lemma verdicts) are never
raised; they live in the returned report objects.
"""


class StabCertError(Exception):
    """Base class of all toolkit errors."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        """Return a JSON-serializable description of the error."""
        out = {"error": type(self).__name__, "message": str(self)}
        for key, value in self.details.items():
            out[key] = value if isinstance(value, (int, float, str, bool, type(None))) else repr(value)
        return out


class ModelDefinitionError(StabCertError):
    """A FluxModel violates its construction invariants."""


class NonRealSpectrum(StabCertError):
    """df(u) has complex or repeated eigenvalues ((H2) violated)."""


class ZeroCharacteristic(StabCertError):
    """df(u) has an eigenvalue within tolerance of zero ((H2) violated)."""


class InconsistentEll(StabCertError):
    """The manifold dimension does not fit the characteristic count."""


class UnsupportedShockKind(StabCertError):
    """An operation was called for a shock kind outside its scope."""


class SingularViscosity(StabCertError):
    """B(u) is not invertible within tolerance."""


class NoConnection(StabCertError):
    """No heteroclinic connection was found from any seed."""

    @property
    def mismatch(self):
        return self.details.get("mismatch")


class NonTransverse(StabCertError):
    """The connection fails the transversality rank test."""


class ContinuationFailed(StabCertError):
    """A deformed profile of the family did not converge."""


class EssentialSpectrum(StabCertError):
    """lambda lies where the Evans function is not defined."""


class StiffIntegration(StabCertError):
    """The Evans ODE integrator could not complete."""


class PhaseJump(StabCertError):
    """Contour refinement cap reached with large phase increments, or inconsistent windings."""


class DomainError(StabCertError):
    """Arguments outside the domain of an identity or bound."""


class NotMonotone(StabCertError):
    """A tabulated function expected nonincreasing increases."""


class QuadratureFailure(StabCertError):
    """An integral did not converge or produced a non-finite value."""


class BlowUp(StabCertError):
    """The perturbation exceeded its admissible amplitude."""

    @property
    def time(self):
        return self.details.get("time")


class StepUnderflow(StabCertError):
    """The time step became too small to make progress."""


class FixedPointDivergence(StabCertError):
    """The whole-trajectory phase iteration did not converge."""


class RankDeficient(StabCertError):
    """The mass-distribution system is not of full rank."""


class OrthogonalityViolation(StabCertError):
    """Discrete orthogonality of e(y,+inf) to the data failed."""


class ConfigError(StabCertError):
    """The run configuration is malformed."""
