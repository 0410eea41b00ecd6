"""Exception taxonomy for the motionstyle package.

Three broad families, which the CLI maps onto process exit codes:

* ``DataError``     -- malformed/unsuitable input data or files   (exit 3)
* ``ModeMismatch``  -- operation incompatible with a model's mode (exit 4)
* ``Diverged``      -- training produced non-finite values        (exit 5)

Anything else escaping the CLI is a plain bug (exit 1); argparse usage
errors exit 2 as usual.
"""


class MotionStyleError(Exception):
    """Base class for all package errors."""


# ---------------------------------------------------------------------------
# data errors


class DataError(MotionStyleError):
    """Input data, file, or corpus is malformed or unsuitable."""


class IoError(DataError):
    """A file could not be read/written or is structurally broken."""


class BadMagic(IoError):
    """Binary blob does not start with the expected magic bytes."""


class UnsupportedVersion(IoError):
    """File declares a format version this build does not understand."""


class ShapeMismatch(DataError):
    """Array shape disagrees with the shape a manifest or model declares."""


class DimMismatch(DataError):
    """Feature/channel dimension disagrees with what a model expects."""


class LengthMismatch(DataError):
    """Two sequences that must share a length do not."""


class TooShort(DataError):
    """Sequence has too few frames for the requested operation."""


class TooFew(DataError):
    """Not enough samples/items for a statistic to be defined."""


class EmptyCorpus(DataError):
    """Corpus directory contains no usable clips."""


class DatasetTooSmall(DataError):
    """Dataset cannot supply the requested sampling structure."""


class MissingMirrorMap(DataError):
    """Skeleton lacks the left/right pairing needed to mirror motion."""


class UpsamplingUnsupported(DataError):
    """Resampling to a higher frame rate than the source is not supported."""


class NotNormalized(DataError):
    """Operation requires z-normalized features but got raw ones."""


class DegenerateRotation(DataError):
    """6D rotation input is degenerate (zero/parallel columns)."""


class NotARotation(DataError):
    """Matrix is not a proper rotation (not orthonormal, or det != +1)."""


class DegenerateFeatures(DataError):
    """Feature statistics are degenerate (e.g. singular covariance input)."""


class OutOfRange(DataError):
    """A numeric argument lies outside its documented range."""


class MissingCodec(DataError):
    """Operation needs a motion codec but none was provided/found."""


# ---------------------------------------------------------------------------
# mode mismatches


class ModeMismatch(MotionStyleError):
    """Operation is incompatible with the model's configured mode."""


class LabelRequired(ModeMismatch):
    """Supervised operation called without the required style label."""


class LabelForbidden(ModeMismatch):
    """Label passed to an unsupervised model/operation."""


class UnsupervisedModel(ModeMismatch):
    """Label-based operation requested from an unsupervised model."""


class SupervisedModel(ModeMismatch):
    """Unsupervised-only operation requested from a supervised model."""


class VariantMismatch(ModeMismatch):
    """Codec call mismatches its variant (e.g. VAE args on a plain AE)."""


# ---------------------------------------------------------------------------
# training failures


class Diverged(MotionStyleError):
    """Training produced a non-finite loss or parameters."""


class NonFiniteLoss(Diverged):
    """A loss term evaluated to NaN/Inf."""
