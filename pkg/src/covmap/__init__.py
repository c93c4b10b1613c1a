"""Coverage-visualization backend for community cellular networks.

Ingests per-device network measurements, computes privacy-preserving
geospatial and temporal aggregates server-side, and serves them to a
map/chart dashboard.
"""

from .model import (
    DEFAULT_SITES,
    Measurement,
    MetricKind,
    Site,
    SiteStatus,
    TimeBucket,
    metric_of,
    validate_measurement,
)
from .mercator import CellIndex, GridSpec, PixelPoint, cell_of, project, unproject
from .aggregate import HeatmapCell, SeriesPoint, SiteSummary, heatmap, site_summary, timeseries
from .store import MeasurementStore, QueryFilter, Snapshot
from .simulate import DeviceProfile, Session, SimConfig, generate, write_dataset
from .config import ServerConfig, load_server_config, load_sim_config
from .service import create_app

__version__ = "0.1.0"
