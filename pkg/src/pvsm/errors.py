"""Typed exceptions shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class PointBehindCamera(ToolkitError):
    """Projection requested for a point at or behind the camera plane."""


class NonPositiveScale(ToolkitError):
    """A scale factor that must be > 0 was not."""


class NonUnitDirection(ToolkitError):
    """A direction vector expected to be unit length was not."""


class DimensionMismatch(ToolkitError):
    """Array dimensions disagree with each other or with camera intrinsics."""


class InvalidSpec(ToolkitError):
    """A benchmark transform spec violates its parameter constraints."""


class DegenerateDolly(ToolkitError):
    """Dolly translation reaches or passes the anchor plane."""


class IndivisibleImage(ToolkitError):
    """Image dimensions are not divisible by the patch size."""


class EmptyMask(ToolkitError):
    """A metric mask selects zero pixels."""


class TooSmall(ToolkitError):
    """Image too small for the requested window size."""


class SceneIoError(ToolkitError):
    """Base class for scene/file persistence errors."""


class MissingFile(SceneIoError):
    """A referenced file or directory does not exist."""


class MalformedJson(SceneIoError):
    """scene.json (or another JSON artifact) failed to parse or validate."""


class ConventionMismatch(SceneIoError):
    """A stored rotation is not a proper world-to-camera rotation."""


class MalformedHeader(SceneIoError):
    """A binary buffer file has a bad magic, header, or truncated payload."""
