from .geometry import (LevelSetGeometry, action_1d, energy_from_action, frequency_1d,
                       level_set_geometry, turning_points, wall_action, wall_angle)
from .dynamics import (ClassicalState, Trajectory, TrajectorySummary, detect_periodicity,
                       integrate_with_impacts, resonant_family)
from .angles import fold_to_L, in_L_region, to_angle_coords

__all__ = [
    "LevelSetGeometry", "action_1d", "energy_from_action", "frequency_1d",
    "level_set_geometry", "turning_points", "wall_action", "wall_angle",
    "ClassicalState", "Trajectory", "TrajectorySummary", "detect_periodicity",
    "integrate_with_impacts", "resonant_family",
    "fold_to_L", "in_L_region", "to_angle_coords",
]
