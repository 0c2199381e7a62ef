"""Exception hierarchy shared by every pipeline stage."""


class ThermofaceError(Exception):
    """Base class for all errors raised by this package."""


class EmptyMask(ThermofaceError, ValueError):
    pass


class DegenerateAxis(ThermofaceError, ValueError):
    pass


class ImageTooSmall(ThermofaceError, ValueError):
    pass


class BlockSizeInvalid(ThermofaceError, ValueError):
    pass


class BadDims(ThermofaceError, ValueError):
    pass


class DimMismatch(ThermofaceError, ValueError):
    pass


class EmptyDataset(ThermofaceError, ValueError):
    pass


class NonFinite(ThermofaceError, ArithmeticError):
    def __init__(self, epoch, message=None):
        self.epoch = epoch
        super().__init__(message or f"non-finite loss or gradient at epoch {epoch}")


class TrainingDiverged(ThermofaceError):
    pass


class FormatError(ThermofaceError, ValueError):
    pass


class NoSubjects(ThermofaceError, ValueError):
    pass


class MixedSizes(ThermofaceError, ValueError):
    def __init__(self, path, size, expected):
        self.path = path
        super().__init__(f"{path}: size {size[0]}x{size[1]} differs from {expected[0]}x{expected[1]}")


class UnreadableImage(ThermofaceError, OSError):
    def __init__(self, path, reason=""):
        self.path = path
        super().__init__(f"cannot read image {path}" + (f": {reason}" if reason else ""))


class StageError(ThermofaceError):
    """Wraps a stage failure with the name of the pipeline stage that raised it."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
