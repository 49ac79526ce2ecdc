"""Numerical side: switching-line classification, Filippov trajectories, return maps."""

from .integrate import EventAmbiguity, IntegrationOptions, NotMonodromic, StepFailure, Trajectory, half_flight, integrate
from .returnmap import NoSignChange, find_crossing_cycle, numeric_displacement, pseudo_hopf_scan, return_map
from .sigma import CROSSING, ESCAPING, SLIDING, TANGENCY, classify_point, sigma_partition, sliding_field, sliding_segments
from .system import NumericSystem, PolyField

__all__ = [
    "CROSSING",
    "ESCAPING",
    "SLIDING",
    "TANGENCY",
    "EventAmbiguity",
    "IntegrationOptions",
    "NoSignChange",
    "NotMonodromic",
    "NumericSystem",
    "PolyField",
    "StepFailure",
    "Trajectory",
    "classify_point",
    "find_crossing_cycle",
    "half_flight",
    "integrate",
    "numeric_displacement",
    "pseudo_hopf_scan",
    "return_map",
    "sigma_partition",
    "sliding_field",
    "sliding_segments",
]
