"""Exception hierarchy shared by every stage of the pipeline."""


class PredSpecError(Exception):
    """Base class for all errors raised by this package."""


class HLSyntaxError(PredSpecError):
    def __init__(self, message, line=None, column=None, filename=None):
        self.line = line
        self.column = column
        self.filename = filename
        where = ""
        if line is not None:
            where = f"{filename or '<input>'}:{line}:{column}: "
        super().__init__(where + message)


class TypeCheckError(PredSpecError):
    """Arity mismatch, individual where a predicate is expected, and so on."""


class MissingSignature(TypeCheckError):
    pass


class PredicateEqualityUnsupported(TypeCheckError):
    """A predicate-typed head position would need equality between predicates."""


class TypeMismatch(PredSpecError):
    """A substitution binding does not preserve the type of its variable."""


class NotAnAtom(PredSpecError):
    pass


class FragmentViolation(PredSpecError):
    def __init__(self, report):
        self.report = report
        super().__init__("\n".join(v.render() for v in report.violations))


class OpenGoal(PredSpecError):
    """The goal has a free predicate variable, so the output cannot be first-order."""


class ResidualPredicateVariable(PredSpecError):
    pass


class IterationLimit(PredSpecError):
    pass


class NotFirstOrder(PredSpecError):
    pass


class Floundering(PredSpecError):
    pass


class ResourceExhausted(PredSpecError):
    pass


class UnboundPredicateCall(PredSpecError):
    pass


class NotStratified(PredSpecError):
    pass


class HasFunctions(PredSpecError):
    pass


class UnknownFamily(PredSpecError):
    pass
