"""Exception hierarchy shared across the toolkit."""


class BiasforgeError(Exception):
    """Base class for all toolkit errors."""


class TokenizerError(BiasforgeError):
    """Raised for malformed ranks files or invalid tokenizer state."""


class VocabError(BiasforgeError):
    """Raised for invalid vocabulary statistics inputs."""


class BiasingError(BiasforgeError):
    """Raised when a biasing list cannot be constructed as requested."""


class LossError(BiasforgeError):
    """Raised for shape or token-id violations in loss evaluation."""


class MetricsError(BiasforgeError):
    """Raised for invalid metric inputs (e.g. empty aggregation)."""


class SimulatorError(BiasforgeError):
    """Raised for invalid error-model configuration."""


class ManifestError(BiasforgeError):
    """Base class for manifest I/O problems."""


class ManifestSchemaError(ManifestError):
    """A line parsed but did not match the expected record schema."""


class ManifestParseError(ManifestError):
    """A line was not valid JSON. Distinct from OS-level I/O errors."""
