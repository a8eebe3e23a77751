"""Exception hierarchy shared across modules."""


class WCSPError(Exception):
    pass


class ValidationError(WCSPError, ValueError):
    """Malformed language, instance, table or index."""


class ResourceError(WCSPError, RuntimeError):
    """An enumeration or search would exceed its configured bound."""


class ContractError(WCSPError, ValueError):
    """A caller-side precondition of an operation was violated."""


class NotApplicable(WCSPError):
    """The structured algorithm refuses: its preconditions are not certified."""


class NotEquivalenceError(NotApplicable):
    """The prefix-sharing relation at some coordinate is not an equivalence
    relation, or a class has no common prefix witness.

    ``triple`` is ``(a, b, c)`` with a ~ b and b ~ c but not a ~ c, or None
    when the failure is a class without a shared prefix.
    """

    def __init__(self, coordinate, triple=None, message=None):
        self.coordinate = coordinate
        self.triple = triple
        if message is None:
            message = f"~_{coordinate} is not an equivalence relation: witness {triple}"
        super().__init__(message)
