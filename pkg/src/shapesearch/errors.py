"""Exception types shared across the engine."""


class ShapeSearchError(Exception):
    """Base class for all engine errors."""


class GeometryError(ShapeSearchError):
    """Invalid or degenerate geometry (bad contour, zero area, ...)."""


class UnsatisfiableDescriptionError(ShapeSearchError):
    """A composite description whose components overlap."""


class FeatureError(ShapeSearchError):
    """Feature extraction failed (zero-energy descriptor, empty region, ...)."""


class ParseError(ShapeSearchError):
    """Malformed interchange document."""


class SegmentationError(ShapeSearchError):
    """Synthetic segmentation failed (no foreground, untraceable component)."""


class HierarchyError(ShapeSearchError):
    """Classifier index integrity violation (cycle, duplicate id, bad file)."""


class EvaluationError(ShapeSearchError):
    """Invalid evaluation input (e.g. gold ranking with no preference pairs)."""
