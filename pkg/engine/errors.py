"""Exception hierarchy for the verification engine."""


class KStabError(Exception):
    """Base class for every error raised by the engine or the scenario layer."""


class VerificationFailed(KStabError):
    """An exact runtime check (interpolation, continuity, chamber support) disagreed."""


class ConstantZero(KStabError):
    """An event line specialises to the zero function."""


class LatticeMismatch(KStabError):
    """Two classes that should live on the same lattice do not."""


class NotPseudoEffective(KStabError):
    """The support-growth loop proved the class is not pseudo-effective."""


class Unbounded(KStabError):
    """A threshold or a sweep has no finite end."""


class IrrationalBoundary(KStabError):
    """A boundary would need an irrational number."""


class BreakpointRefinementExceeded(KStabError):
    """Verified interpolation kept failing after the maximum bisection depth."""


class IdenticallyZero(KStabError):
    """A branch form vanishes identically (degenerate pencil)."""


class FactorizationMismatch(KStabError):
    """A stated factorization does not expand to the polynomial it claims."""


class TableInvalid(KStabError):
    """A Nakayama table failed validation."""


class UnknownCase(KStabError):
    """No case with the requested id is registered."""


class SchemaError(KStabError):
    """A scenario file does not match the schema."""


class ScenarioReferenceError(KStabError):
    """A scenario entry references an id that does not exist."""


class NonRationalValue(KStabError, ValueError):
    """A numeric input is not an exact rational."""
