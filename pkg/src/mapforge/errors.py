"""Exceptions named after the invariant they report as violated."""


class MapError(ValueError):
    """Base class for all structural and precondition failures."""


class NotPermutation(MapError):
    """sigma is not a permutation of 0..n_darts-1."""


class NotInvolution(MapError):
    """alpha is not a fixed-point-free involution on the darts."""


class Disconnected(MapError):
    """The group generated by sigma and alpha is not transitive on darts."""


class WouldDisconnect(MapError):
    """Requested edge deletion would disconnect the map."""


class DuplicateLabels(MapError):
    """Corner labels must be pairwise distinct."""


class DuplicateWeights(MapError):
    """Edge weights must be pairwise distinct."""


class EmptyTargets(MapError):
    """A walk or erasure was asked to stop on an empty target set."""


class NotPlanar(MapError):
    """Operation requires genus 0."""


class NoMarkedFaces(MapError):
    """Operation requires at least one marked face."""


class NotSpanningTree(MapError):
    """Edge set is not a spanning tree of the map."""


class EmptyBoundary(MapError):
    """Boundary vertex set must be nonempty."""


class SourceInSink(MapError):
    """Source vertex lies in the sink set."""


class TooLarge(MapError):
    """Instance exceeds the size bound of an exact procedure."""


class BadParameters(MapError):
    """Generator parameters outside the supported range."""


class NotNestable(MapError):
    """Requested exhaustion does not produce nested patches."""


class ConfigError(MapError):
    """Command-line or TOML configuration is invalid."""


class IdentityFailure(MapError):
    """An exact identity check failed during verification."""


class GenusChangedWarning(UserWarning):
    """Attached when an edge deletion changes the genus."""
