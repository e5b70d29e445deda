"""Exception taxonomy shared across the pipeline.

DataError subclasses indicate malformed external inputs (datasets, archives,
config files) and map to CLI exit code 2; everything else under SiteSlamError
maps to exit code 3.
"""


class SiteSlamError(Exception):
    pass


class DataError(SiteSlamError):
    pass


# geometry
class AngleAtPi(SiteSlamError):
    """Rotation log requested within tolerance of the pi singularity."""


class BehindCamera(SiteSlamError):
    pass


class DegenerateConfiguration(SiteSlamError):
    """Point set too small or collinear for rigid alignment."""


# simulator
class EmptyPlan(SiteSlamError):
    pass


class CameraUnderground(SiteSlamError):
    pass


class MalformedDataset(DataError):
    pass


# memory / archive
class UnknownId(SiteSlamError):
    pass


class CorruptArchive(DataError):
    pass


class VersionMismatch(DataError):
    pass


class NeverLocalized(SiteSlamError):
    pass


# pose graph
class DisconnectedGraph(SiteSlamError):
    pass


class SolverFailure(SiteSlamError):
    pass


# cloud analytics
class EmptyReference(SiteSlamError):
    pass


class EmptyCloud(SiteSlamError):
    pass


class GridMismatch(SiteSlamError):
    pass


class LabelMismatch(SiteSlamError):
    pass


class NoCorrespondences(SiteSlamError):
    pass


class NoOverlap(SiteSlamError):
    pass


# config
class ConfigError(DataError):
    """Bad key=value config file; message carries the line number."""
