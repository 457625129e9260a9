"""Exception hierarchy shared across the toolkit."""


class BeliefPlanError(Exception):
    """Base class for all errors raised by this package."""


class UnknownObject(BeliefPlanError):
    """An atom refers to an object that is not in the belief."""


class TypeMismatch(BeliefPlanError):
    """A binding or argument has an incompatible type."""


class MissingBinding(BeliefPlanError):
    """Grounding was attempted without a value for some parameter."""


class ParseError(BeliefPlanError):
    """Input text could not be parsed.  Carries a 1-based position."""

    def __init__(self, message: str, line: int, column: int, expected: str | None = None):
        self.line = line
        self.column = column
        self.expected = expected
        suffix = f" (expected {expected})" if expected else ""
        super().__init__(f"{line}:{column}: {message}{suffix}")


class UndeclaredName(ParseError):
    """A name was used before being declared."""


class GoalTypeError(BeliefPlanError):
    """A goal formula is ill-typed against the domain."""


class UnknownInGoal(BeliefPlanError):
    """Goals may not require an atom to be Unknown."""


class ObserveWithoutTarget(BeliefPlanError):
    """An observe action does not declare which atom it observes."""


class CompileError(BeliefPlanError):
    """A domain violates a compilation assumption (e.g. an observe
    action with world-changing effects, or a reserved K name in use)."""


class PreconditionViolated(BeliefPlanError):
    """An action was applied in a belief where its precondition is not True."""


class InconsistentReport(BeliefPlanError):
    """An observation asserts both polarities of the same atom."""


class GroundingExplosion(BeliefPlanError):
    """The grounded action set exceeds the configured cap."""


class InvalidProbability(BeliefPlanError):
    """Noise parameters must be probabilities with p_flip + p_abstain <= 1."""


class UnknownTask(BeliefPlanError):
    """Requested benchmark task does not exist."""
