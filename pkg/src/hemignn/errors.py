"""Exception types shared across the package."""


class HemignnError(Exception):
    """Base class for all package errors."""


class ShapeError(HemignnError):
    """Operands have non-conformable shapes."""


class ConfigError(HemignnError):
    """A configuration value violates its contract."""


class GraphValidationError(HemignnError):
    """A brain-graph matrix violates a structural invariant."""


class EmptyHemisphereError(GraphValidationError):
    """A hemisphere has no nodes, so its cross-hemispheric network is undefined."""


class SchemaError(HemignnError):
    """A file does not match the documented schema.

    Carries the offending file and field so ingestion failures are traceable.
    """

    def __init__(self, message, file=None, field=None):
        parts = [message]
        if file is not None:
            parts.append(f"file={file}")
        if field is not None:
            parts.append(f"field={field}")
        super().__init__(" | ".join(parts))
        self.file = file
        self.field = field


class MetricUndefinedError(HemignnError):
    """A requested metric is undefined for the given label set (e.g. AUC with one class)."""
