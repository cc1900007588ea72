"""Named experiment presets, one per figure of the reference study.

A preset is a list of steps ``(command, overrides, subdir, input_step)``.  Each
step runs in ``<out>/<subdir>`` with the preset overrides applied on top of
the defaults (and under any user ``--config``); ``input_step`` names the
subdirectory whose bundle feeds a ``stats`` or ``concentration`` step.

Level counts are desk scale (minutes on one core), noted in ``DESK_SCALE``.
"""
from __future__ import annotations

import math
from typing import Dict, List, NamedTuple, Optional

from ..errors import ConfigError

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)


class Step(NamedTuple):
    command: str
    overrides: dict
    subdir: str
    input_step: Optional[str] = None


def _origin(omega, **more):
    d = {"potentials": {"omega": list(omega)}, "step": {"enabled": True, "q1_wall": 0.0,
                                                         "q2_wall": 0.0}}
    for k, v in more.items():
        d.setdefault(k, {}).update(v)
    return d


EPS_LIST = [[0.0, 0.0], [0.5, 0.25], [1.0, 0.5], [1.5, 0.75], [SQRT3, SQRT3 / 2.0]]

PRESETS: Dict[str, List[Step]] = {
    "smooth": [
        Step("spectrum", {"potentials": {"omega": [1.0, SQRT2]}, "step": {"enabled": False},
                          "grid": {"ppw": 10.0}, "solver": {"levels": 30}}, "spectrum"),
    ],
    "fig1": [
        Step("classical", {"potentials": {"omega": [1.0, SQRT2]},
                           "step": {"enabled": True, "q1_wall": -1.0, "q2_wall": -1.0},
                           "classical": {"energies": [5.625, 5.5], "t_max": 2000.0,
                                         "max_impacts": 250, "resonances": [1, 2, 3, 4]}},
             "classical"),
    ],
    "fig2a": [
        Step("spectrum", _origin([1.0, 1.0], solver={"levels": 80, "write_vectors": False}),
             "spectrum"),
        Step("stats", {"analysis": {"collapse": True}}, "stats", "spectrum"),
    ],
    "fig2b": [
        Step("spectrum", _origin([1.0, 2.0], solver={"levels": 120, "write_vectors": False}),
             "spectrum"),
        Step("stats", {"analysis": {"collapse": True}}, "stats", "spectrum"),
    ],
    "fig3": [
        Step("spectrum", _origin([1.0, 1.0], solver={"levels": 400, "write_vectors": False}),
             "omega2_1"),
        Step("stats", {"analysis": {"collapse": True}}, "stats_1", "omega2_1"),
        Step("spectrum", _origin([1.0, 2.0], solver={"levels": 400, "write_vectors": False}),
             "omega2_2"),
        Step("stats", {"analysis": {"collapse": True}}, "stats_2", "omega2_2"),
    ],
    "fig4": [
        Step("spectrum", _origin([1.0, SQRT2], potentials={"eps_sweep": EPS_LIST},
                                 solver={"levels": 1000, "write_vectors": False}), "sweep"),
    ] + [Step("stats", {"analysis": {"collapse": False}}, f"stats_{i:02d}", f"sweep/eps_{i:02d}")
         for i in range(len(EPS_LIST))],
    "fig5": [
        Step("mixing", _origin([1.0, SQRT2]), "mixing"),
    ],
    "fig6": [
        Step("spectrum", _origin([1.0, SQRT2], solver={"levels": 330}), "eps_0"),
        Step("concentration", {"analysis": {"windows": [[291, 300], [321, 330]],
                                            "log_density": True}}, "density_0", "eps_0"),
        Step("spectrum", _origin([1.0, SQRT2], potentials={"eps": [1.5, 0.75]},
                                 solver={"levels": 330}), "eps_1"),
        Step("concentration", {"analysis": {"windows": [[291, 300], [321, 330]],
                                            "log_density": True}}, "density_1", "eps_1"),
    ],
    "fig7": [
        Step("spectrum", _origin([1.0, SQRT2], solver={"levels": 330}), "eps_0"),
        Step("concentration", {"analysis": {"windows": [[281, 300], [311, 330]],
                                            "log_density": False}}, "census_0", "eps_0"),
        Step("spectrum", _origin([1.0, SQRT2], potentials={"eps": [1.5, 0.75]},
                                 solver={"levels": 330}), "eps_1"),
        Step("concentration", {"analysis": {"windows": [[281, 300], [311, 330]],
                                            "log_density": False}}, "census_1", "eps_1"),
    ],
}

DESK_SCALE = {
    "smooth": "30 levels, no step, ppw 10 (analytic ladder check), seconds",
    "fig1": "one trajectory, 250 impacts, plus family scans for m = 1..4, seconds",
    "fig2a": "80 levels, omega = (1, 1), EBK table, under a minute",
    "fig2b": "120 levels, omega = (1, 2), EBK tables and degeneracies, under a minute",
    "fig3": "400 levels each for omega2 = 1 and 2 with Weyl checks, about 3 minutes",
    "fig4": "1000 levels for each of five field strengths (1500 in the study), about 30 minutes",
    "fig5": "basis of 400 levels, N = 151 and 301, six scaled strengths, about 15 minutes",
    "fig6": "330 levels with and without field, log-densities near the top, about 2 minutes",
    "fig7": "330 levels with and without field, census windows 281-300 and 311-330 "
            "(level 500 in the study), about 2 minutes",
}


def get(name: str) -> List[Step]:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"preset: unknown name {name!r} (known: {', '.join(sorted(PRESETS))})")
