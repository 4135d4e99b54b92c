"""featexport: turn videos + event annotations into viewadapt feature containers."""

from .container import ContainerWriter
from .encoders import ToyEncoder, get_encoder
from .export import (
    Event,
    ExportJob,
    ExportResult,
    JobError,
    VideoItem,
    export,
    load_job,
    nearest_indices,
    window_times,
)

__version__ = "0.1.0"

__all__ = [
    "ContainerWriter",
    "ToyEncoder",
    "get_encoder",
    "Event",
    "ExportJob",
    "ExportResult",
    "JobError",
    "VideoItem",
    "export",
    "load_job",
    "nearest_indices",
    "window_times",
    "__version__",
]
