"""Errors raised by the planner, the engines and the analyzers."""


__all__ = [
    "InvalidParamsError",
    "InfeasibleError",
    "DatasetTooSmallError",
    "IncompleteShuffleError",
    "SingularChannelError",
    "DecodeError",
    "CoverageMismatchError",
]


class InvalidParamsError(ValueError):
    """The system parameters violate a structural invariant."""


class InfeasibleError(ValueError):
    """No node count satisfies the subpacketization constraint."""


class DatasetTooSmallError(ValueError):
    """The dataset has fewer records than the number of packets."""


class IncompleteShuffleError(RuntimeError):
    """A reducer is missing intermediate values after the shuffle."""

    def __init__(self, msg, missing=()):
        super().__init__(msg)
        self.missing = list(missing)


class SingularChannelError(RuntimeError):
    """A channel matrix fails the condition number bound."""


class DecodeError(RuntimeError):
    """A decoded payload fails its checksum."""

    def __init__(self, msg, slot_id=None, receiver=None):
        super().__init__(msg)
        self.slot_id = slot_id
        self.receiver = receiver


class CoverageMismatchError(ValueError):
    """A coded schedule misses or duplicates a needed value."""

    def __init__(self, msg, slot_id=None):
        super().__init__(msg)
        self.slot_id = slot_id
