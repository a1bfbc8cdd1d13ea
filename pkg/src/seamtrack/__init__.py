"""Deferred-decision tracking of fixed point sets with interdependent motion.

The package is organized around a small set of value types (``core``), an
exact ranked-assignment layer (``assignment``), graph-aware association
costs (``models``), graphical interpolation of missed detections
(``interpolation``), the lookahead search engine (``search``), plus a
synthetic data generator, evaluation protocol, posture analytics, file
formats, a CLI, and a single-session review service.
"""

from seamtrack.core import (
    DetectionSet,
    EmbryoGraph,
    GateConfig,
    Hypothesis,
    InfeasibleError,
    InsufficientDataError,
    InvalidConfigError,
    TrackState,
    build_canonical_embryo_graph,
)

__version__ = "0.1.0"

__all__ = [
    "TrackState",
    "DetectionSet",
    "EmbryoGraph",
    "Hypothesis",
    "GateConfig",
    "build_canonical_embryo_graph",
    "InvalidConfigError",
    "InfeasibleError",
    "InsufficientDataError",
    "__version__",
]
