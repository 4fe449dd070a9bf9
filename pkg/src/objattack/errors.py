"""Exception types shared across the toolkit."""


class AttackToolkitError(Exception):
    """Base class for all toolkit errors."""


class BoundsError(AttackToolkitError, IndexError):
    """A coordinate or box lies outside the image."""


class ShapeMismatchError(AttackToolkitError, ValueError):
    """Two tensors or masks that must share a shape do not."""


class OracleFailure(AttackToolkitError, RuntimeError):
    """The classifier oracle died or violated the wire protocol."""


class PreconditionError(AttackToolkitError, ValueError):
    """An attack was started on an input that violates its contract."""


class ConfigurationError(AttackToolkitError, ValueError):
    """Invalid attack or region configuration."""
