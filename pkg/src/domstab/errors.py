"""Exception hierarchy.

Everything raised on purpose by the package derives from :class:`DomstabError`
so callers (and the CLI) can map failures to exit codes in one place.
"""


class DomstabError(Exception):
    """Base class for all package errors."""


class InvalidInputError(DomstabError, ValueError):
    pass


class DimensionError(DomstabError, ValueError):
    pass


class DegenerateRadiusError(DomstabError, ValueError):
    """A radius too small to contain any representable neighbour of its centre."""


class NotSupportedError(DomstabError):
    """The operation has no exact implementation for this set variant."""


class UndefinedPointError(DomstabError):
    """The point lies in none of the classifier's sets."""


class PartitionViolationError(DomstabError):
    """The point lies in two or more of the classifier's sets."""


class InvalidProbeError(DomstabError, ValueError):
    pass


class InvalidScenarioError(DomstabError, ValueError):
    pass


class PreconditionError(DomstabError):
    pass


class ClassifierTimeout(DomstabError):
    """An external classifier did not answer within its deadline."""


class AxiomViolationError(DomstabError):
    def __init__(self, report):
        super().__init__(f"classifier axioms violated: {len(report.violations)} violation(s)")
        self.report = report


class SchemaError(DomstabError):
    """A scenario file failed validation.

    ``errors`` is a list of ``(location, message)`` pairs, location being a
    JSON path such as ``$.sets[1].label``.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        lines = "; ".join(f"{loc or '<root>'}: {msg}" for loc, msg in self.errors)
        super().__init__(f"invalid scenario: {lines}")


class ReportIntegrityError(DomstabError):
    """Report aggregates do not recompute from the per-probe records."""
