"""Exception hierarchy shared across the package."""


class SynthForgeError(Exception):
    """Base class for all package errors."""


class ConfigError(SynthForgeError):
    """Invalid run configuration or spec field. CLI exit code 2."""


class IoFailure(SynthForgeError):
    """Filesystem read/write failure. CLI exit code 3."""


class ContractViolation(SynthForgeError):
    """Data contract violated (bad manifest, mixed hashes...). CLI exit code 4."""


# mesh
class UnreadableFile(IoFailure):
    pass


class UnsupportedFormat(ConfigError):
    pass


class EmptyMesh(ContractViolation):
    pass


class DegenerateMesh(ContractViolation):
    pass


# scene / render
class InvalidSpec(ConfigError):
    pass


class InvalidFov(ConfigError):
    pass


class ObjectNotVisible(SynthForgeError):
    """Rendered mask came out empty; sample must be re-drawn or rejected."""


class RenderRejectionExhausted(ContractViolation):
    """Re-draw attempts for an invisible sample ran out."""


# chroma / augment
class EmptyMask(ContractViolation):
    pass


# dataset / evalkit
class TooFewSamples(ContractViolation):
    pass


class EmptyInput(ContractViolation):
    pass


class InconsistentClassCount(ContractViolation):
    pass


class MissingGroupKey(ContractViolation):
    pass
