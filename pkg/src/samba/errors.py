"""Exception types shared across the engine.

Every error the engine can raise is a subclass of EngineError so callers
(CLI, HTTP layer) can map them to exit codes / status codes in one place.
"""


class EngineError(Exception):
    """Base class for all engine errors."""


# --- image decoding / encoding ---

class MalformedFile(EngineError):
    """Input bytes are not a decodable PNG/JPEG/TIFF."""


class UnsupportedDepth(EngineError):
    """Sample format other than 8-bit, 16-bit integer or float."""


class InconsistentStack(EngineError):
    """Pages of a multi-page file differ in dimensions or channels."""


class UnsupportedChannelCount(EngineError):
    """Raster has a channel count the pipeline cannot consume."""


# --- feature stack ---

class NonPositiveSigma(EngineError):
    """Gaussian scale must be > 0 (>= 0 where pre-smoothing is optional)."""


class InvalidConfig(EngineError):
    """Feature configuration violates its invariants or cannot be parsed."""


# --- labelling ---

class EmptyPath(EngineError):
    """Brush path contains no points."""


class DegeneratePolygon(EngineError):
    """Polygon has fewer than 3 vertices."""


class NoLabels(EngineError):
    """No labelled pixel exists to train from."""


# --- random forest ---

class EmptyCounts(EngineError):
    """Class-count vector sums to zero."""


class EmptyTrainingSet(EngineError):
    """Training set contains no samples."""


class DimensionMismatch(EngineError):
    """Feature vector length differs from the model's feature count."""


class FeatureMismatch(EngineError):
    """Feature names/order differ between model and feature stack."""


class MalformedModel(EngineError):
    """Model document cannot be parsed or violates its invariants."""


class UnsupportedVersion(EngineError):
    """Model document declares a format version this build cannot read."""


# --- smart labelling ---

class BackendUnavailable(EngineError):
    """Configured mask backend cannot be loaded (missing model file etc.)."""


class InferenceFailure(EngineError):
    """The mask backend failed while computing an embedding or masks."""


# --- server session lifecycle ---

class UnknownSession(EngineError):
    """No session with the given id."""


class OutOfBounds(EngineError):
    """Coordinates outside the image."""


class EmbeddingNotReady(EngineError):
    """Prompted before the slice embedding finished."""


class FeaturesNotReady(EngineError):
    """Train requested before the feature stack finished."""


class NotTrained(EngineError):
    """Segmentation or classifier download requested before training."""


class TrainingInProgress(EngineError):
    """A second train was requested while one is running."""
