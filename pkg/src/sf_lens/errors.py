"""Exception hierarchy. Every error raised by the engine derives from SfLensError."""


class SfLensError(Exception):
    """Base class for all engine errors."""


# --- bundle ingest ---

class MissingFileError(SfLensError):
    def __init__(self, path):
        super().__init__(f"missing file: {path}")
        self.path = str(path)


class ShapeMismatchError(SfLensError):
    def __init__(self, path, expected, actual):
        super().__init__(f"{path}: expected {expected} values, file holds {actual}")
        self.path = str(path)
        self.expected = expected
        self.actual = actual


class NonFiniteValueError(SfLensError):
    def __init__(self, path, record):
        super().__init__(f"{path}: non-finite value at record {record}")
        self.path = str(path)
        self.record = record


class UnknownMetaTagError(SfLensError):
    def __init__(self, tag):
        super().__init__(f"meta tag not declared in manifest: {tag!r}")
        self.tag = tag


class InvalidSpecError(SfLensError):
    """Synthetic bundle spec violates its preconditions."""


class RatingOutOfRangeError(SfLensError):
    def __init__(self, rating):
        super().__init__(f"malignancy rating {rating} outside [1, 5]")
        self.rating = rating


class InvalidBundleError(SfLensError):
    """Manifest or record arrays violate bundle invariants."""


# --- confidence channels ---

class UnknownChannelError(SfLensError):
    def __init__(self, name):
        super().__init__(f"confidence channel not available: {name!r}")
        self.name = name


class WidthMismatchError(SfLensError):
    def __init__(self, expected, actual):
        super().__init__(f"auxiliary logits must be {expected} wide, got {actual}")
        self.expected = expected
        self.actual = actual


# --- metrics / studies ---

class EmptyStudyError(SfLensError):
    def __init__(self, name="<unnamed>"):
        super().__init__(f"study {name!r} selects no records")
        self.name = name


class DegenerateStudyError(SfLensError):
    """Both a correct and an incorrect record are required."""


# --- shift forge ---

class UnsupportedImageError(SfLensError):
    """Image shape or channel count not handled by the corruption transforms."""


class MissingTagError(SfLensError):
    def __init__(self, tag):
        super().__init__(f"split preset needs meta tag {tag!r}, bundle does not declare it")
        self.tag = tag


class MissingVariantError(SfLensError):
    def __init__(self, level):
        super().__init__(f"no corrupted variant at intensity level {level}")
        self.level = level


# --- latent analytics ---

class DegenerateDataError(SfLensError):
    """All points identical; no principal directions exist."""


class PerplexityTooLargeError(SfLensError):
    def __init__(self, perplexity, n):
        super().__init__(
            f"perplexity {perplexity} too large for {n} points (needs perplexity < (n-1)/3)"
        )
        self.perplexity = perplexity
        self.n = n
