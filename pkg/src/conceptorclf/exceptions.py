"""Exception hierarchy shared by the library and the command line."""


class ConceptorError(Exception):
    """Base class for every error raised by conceptorclf."""


class DimensionError(ConceptorError, ValueError):
    """Array shapes do not agree with what an operation expects."""


class DataError(ConceptorError, ValueError):
    """Input data is malformed, too short, or otherwise unusable."""


class PoseFormatError(DataError):
    """A pose CSV or manifest file could not be parsed."""


class NumericalError(ConceptorError, ArithmeticError):
    """A numerical routine failed or produced non-finite values."""


class ReservoirConstructionError(NumericalError):
    """The random reservoir could not be scaled to the requested spectral radius."""


class ModelFileError(ConceptorError):
    """Base class for problems reading a serialized model."""


class ModelVersionError(ModelFileError):
    pass


class ModelCorruptError(ModelFileError):
    pass


class ModelChecksumError(ModelFileError):
    pass
