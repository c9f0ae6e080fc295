"""Exception hierarchy shared by all rewardcalc modules."""


class RewardCalcError(Exception):
    """Base class for all errors raised by this package."""


class GraphInvariantError(RewardCalcError):
    """A transition graph failed validation.

    Carries the full list of violations so callers can report all of them.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid transition graph: " + "; ".join(self.violations))


class DomainMismatchError(RewardCalcError):
    """A potential or reward is not defined on exactly the graph's domain."""


class EnumerationCapError(RewardCalcError):
    """An enumeration would exceed its configured result-size cap."""


class InputError(RewardCalcError):
    """A file or argument could not be parsed or refers to unknown entities."""


class SolverError(RewardCalcError):
    """A numerical solve failed; the message carries diagnostics."""
