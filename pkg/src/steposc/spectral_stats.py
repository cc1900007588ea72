"""Level unfolding, nearest-neighbour spacing statistics and Weyl checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError

POISSON = "poisson"
SEMI_POISSON = "semi-poisson"
GOE = "goe-wigner"
LAWS = (POISSON, SEMI_POISSON, GOE)
_ALIASES = {"poisson": POISSON, "semi-poisson": SEMI_POISSON, "semipoisson": SEMI_POISSON,
            "sp": SEMI_POISSON, "goe": GOE, "goe-wigner": GOE, "wigner": GOE}

DEFAULT_BINS = 40
DEFAULT_RANGE = (0.0, 4.0)
DEFAULT_TRIM = 0.1
DEFAULT_DEGENERACY_TOL = 1e-6  # times the mean spacing


def law_name(law: str) -> str:
    try:
        return _ALIASES[law.lower()]
    except KeyError:
        raise DomainError(f"unknown reference law {law!r}; expected one of {LAWS}") from None


def _nonneg(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("spacing must be nonnegative")
    return s


def reference_cdf(law: str, s):
    """Cumulative spacing distribution of a reference law."""
    law = law_name(law)
    s = _nonneg(s)
    if law == POISSON:
        return -np.expm1(-s)
    if law == SEMI_POISSON:
        return 1.0 - np.exp(-2.0 * s) * (2.0 * s + 1.0)
    return -np.expm1(-math.pi * s * s / 4.0)


def reference_pdf(law: str, s):
    law = law_name(law)
    s = _nonneg(s)
    if law == POISSON:
        return np.exp(-s)
    if law == SEMI_POISSON:
        return 4.0 * s * np.exp(-2.0 * s)
    return 0.5 * math.pi * s * np.exp(-math.pi * s * s / 4.0)


def sample_spacings(law: str, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` spacings from a reference law by inverting its CDF."""
    law = law_name(law)
    u = rng.random(n)
    if law == POISSON:
        return -np.log1p(-u)
    if law == GOE:
        return np.sqrt(-4.0 * np.log1p(-u) / math.pi)
    # semi-Poisson: invert 1 - e^{-x}(1 + x) = u in x = 2s by Newton from a safe start
    x = np.maximum(-np.log1p(-u), 1e-3)
    for _ in range(60):
        F = -np.expm1(-x) - x * np.exp(-x)
        x = np.maximum(x - (F - u) / (x * np.exp(-x)), 1e-300)
    return 0.5 * x


# unfolding -------------------------------------------------------------

def check_levels(levels, tol: float = 0.0, allow_duplicates: bool = True) -> np.ndarray:
    E = np.asarray(levels, dtype=float).ravel()
    if E.size < 2:
        raise DomainError("need at least two levels")
    if not np.all(np.isfinite(E)):
        raise DomainError("levels must be finite")
    d = np.diff(E)
    if np.any(d < -tol):
        raise DomainError("levels must be sorted ascending")
    if not allow_duplicates and np.any(d <= tol):
        raise DomainError(f"levels closer than {tol:.3g}; collapse degeneracies first")
    return E


def _local_mean(d: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average of spacings, window shrunk near the ends."""
    w = max(1, int(window))
    c = np.concatenate(([0.0], np.cumsum(d)))
    i = np.arange(d.size)
    lo = np.clip(i - w // 2, 0, None)
    hi = np.clip(lo + w, None, d.size)
    lo = np.clip(hi - w, 0, None)
    return (c[hi] - c[lo]) / (hi - lo)


def unfold(levels, method: str = "mean-spacing", volume: Optional[Callable[[float], float]] = None,
           degree: int = 3, local_window: Optional[int] = None) -> np.ndarray:
    """Map levels to a sequence with unit mean nearest-neighbour spacing.

    Parameters
    ----------
    method : {'mean-spacing', 'weyl', 'polynomial'}
        ``mean-spacing`` divides by the mean spacing of the window (or a
        centered moving average over ``local_window`` spacings); ``weyl``
        maps through ``N(E) = volume(E) / (2 pi)^2``; ``polynomial`` fits a
        smooth staircase of the given degree.  The last two are renormalized
        to unit mean spacing.
    """
    E = check_levels(levels)
    if method == "mean-spacing":
        d = np.diff(E)
        if local_window:
            d = d / _local_mean(d, local_window)
        mean = d.mean()
        if mean <= 0:
            raise DomainError("all levels coincide")
        return np.concatenate(([0.0], np.cumsum(d / mean)))
    if method == "weyl":
        if volume is None:
            raise DomainError("weyl unfolding needs a volume function")
        x = np.array([volume(e) for e in E]) / (4.0 * math.pi ** 2)
    elif method == "polynomial":
        if degree < 1:
            raise DomainError("degree must be at least 1")
        stair = np.arange(E.size) + 0.5
        scale = max(abs(E[0]), abs(E[-1]), 1e-300)
        coef = np.polynomial.polynomial.polyfit(E / scale, stair, degree)
        x = np.polynomial.polynomial.polyval(E / scale, coef)
    else:
        raise DomainError(f"unknown unfolding method {method!r}")
    mean = np.mean(np.diff(x))
    if mean <= 0:
        raise DomainError("counting function is not increasing on the window")
    return (x - x[0]) / mean


# samples and distributions ---------------------------------------------

@dataclass
class SpacingSample:
    spacings: np.ndarray
    window: dict  # {'index': [first, last], 'energy': [E_lo, E_hi]} (1-based inclusive)
    method: str
    collapsed: bool = False

    def __len__(self):
        return len(self.spacings)

    @property
    def mean(self) -> float:
        return float(np.mean(self.spacings))


def collapse_degenerate(levels, tol: float) -> np.ndarray:
    """One representative (the cluster mean) per degenerate cluster."""
    return np.array([c.energy for c in degeneracy_count(levels, tol).clusters])


def spacing_sample(levels, method: str = "mean-spacing", trim: float = DEFAULT_TRIM,
                   collapse: bool = False, degeneracy_tol: Optional[float] = None,
                   volume=None, degree: int = 3, local_window: Optional[int] = None,
                   first_index: int = 1) -> SpacingSample:
    """Statistics-mode pipeline: validate, optionally collapse, trim the bottom, unfold.

    ``degeneracy_tol`` is absolute; by default ``1e-6`` times the mean spacing.
    Without ``collapse``, levels closer than the tolerance are rejected.
    """
    E = check_levels(levels)
    tol = degeneracy_tol
    if tol is None:
        tol = DEFAULT_DEGENERACY_TOL * (E[-1] - E[0]) / (E.size - 1)
    if not 0.0 <= trim < 1.0:
        raise DomainError("trim must lie in [0, 1)")
    k0 = int(math.floor(trim * E.size))
    E = E[k0:]
    if collapse:
        E = collapse_degenerate(E, tol)
    else:
        check_levels(E, tol, allow_duplicates=False)
    x = unfold(E, method, volume=volume, degree=degree, local_window=local_window)
    s = np.diff(x)
    window = {"index": [first_index + k0, first_index + len(levels) - 1],
              "energy": [float(E[0]), float(E[-1])]}
    return SpacingSample(s, window, method, collapse)


@dataclass
class SpacingDistribution:
    edges: np.ndarray
    pdf: np.ndarray  # histogram density
    s_sorted: np.ndarray
    cdf: np.ndarray  # right-continuous empirical CDF at s_sorted

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


def ecdf(sample, s) -> np.ndarray:
    """Right-continuous empirical CDF ``#{x <= s} / n``."""
    x = np.sort(np.asarray(sample, dtype=float))
    if x.size == 0:
        raise DomainError("empty sample")
    return np.searchsorted(x, np.asarray(s, dtype=float), side="right") / x.size


def spacing_distribution(sample, bins: int = DEFAULT_BINS,
                         range: Tuple[float, float] = DEFAULT_RANGE,
                         histogram: bool = True) -> SpacingDistribution:
    s = np.asarray(getattr(sample, "spacings", sample), dtype=float)
    if s.size == 0:
        raise DomainError("empty sample")
    if histogram and s.size < 50:
        raise DomainError("histogram mode needs at least 50 spacings")
    if histogram:
        pdf, edges = np.histogram(s, bins=bins, range=range, density=False)
        pdf = pdf / (s.size * np.diff(edges))
    else:
        edges, pdf = np.empty(0), np.empty(0)
    xs = np.sort(s)
    return SpacingDistribution(edges, pdf, xs, ecdf(xs, xs))


def ks_distance(sample, law: str, method: str = "sample-points") -> float:
    """Sup-distance between the empirical and reference spacing CDFs.

    ``sample-points`` takes the sup of ``|F_n(s_i) - F(s_i)|`` over the sample
    points with right-continuous ``F_n``; ``two-sided`` is the classical
    Kolmogorov-Smirnov statistic, which also looks at left limits.
    """
    s = np.sort(np.asarray(getattr(sample, "spacings", sample), dtype=float))
    n = s.size
    if n == 0:
        raise DomainError("empty sample")
    F = reference_cdf(law, s)
    Fn = np.searchsorted(s, s, side="right") / n
    if method == "sample-points":
        return float(np.max(np.abs(Fn - F)))
    if method == "two-sided":
        i = np.arange(1, n + 1)
        return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
    raise DomainError(f"unknown KS method {method!r}")


def ks_all(sample, method: str = "sample-points") -> dict:
    return {law: ks_distance(sample, law, method) for law in LAWS}


def best_law(sample, method: str = "sample-points") -> str:
    d = ks_all(sample, method)
    return min(d, key=d.get)


# degeneracies ----------------------------------------------------------

@dataclass
class Cluster:
    energy: float  # mean of the members
    multiplicity: int
    first: int  # 0-based index of the first member


@dataclass
class DegeneracyReport:
    clusters: List[Cluster]
    tol: float

    @property
    def energies(self) -> np.ndarray:
        return np.array([c.energy for c in self.clusters])

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([c.multiplicity for c in self.clusters], dtype=int)

    def multiplicity_at(self, E: float, tol: Optional[float] = None) -> int:
        tol = self.tol if tol is None else tol
        for c in self.clusters:
            if abs(c.energy - E) <= tol:
                return c.multiplicity
        return 0


def degeneracy_count(levels, tol: float) -> DegeneracyReport:
    """Greedy chain clustering: a gap above ``tol`` starts a new cluster."""
    E = check_levels(levels, tol) if np.size(levels) > 1 else np.asarray(levels, float).ravel()
    clusters = []
    start = 0
    for i in range(1, E.size + 1):
        if i == E.size or E[i] - E[i - 1] > tol:
            clusters.append(Cluster(float(np.mean(E[start:i])), i - start, start))
            start = i
    return DegeneracyReport(clusters, tol)


# Weyl ------------------------------------------------------------------

@dataclass
class WeylCheck:
    E: np.ndarray
    n_empirical: np.ndarray
    n_weyl: np.ndarray
    info: dict = field(default_factory=dict)

    @property
    def ratio(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.n_empirical / self.n_weyl

    def upper_half(self):
        k = len(self.E) // 2
        return self.E[k:], self.ratio[k:]


def staircase(levels, E) -> np.ndarray:
    """Number of levels ``<= E``."""
    return np.searchsorted(np.asarray(levels, float), np.asarray(E, float), side="right")


def weyl_check(levels, n_weyl: Callable[[float], float], E: Optional[Sequence[float]] = None,
               min_levels: int = 100) -> WeylCheck:
    """Compare the staircase with a counting function, by default at every level."""
    L = check_levels(levels)
    if L.size < min_levels:
        raise DomainError(f"weyl_check needs at least {min_levels} levels")
    E = L if E is None else np.asarray(E, dtype=float)
    return WeylCheck(E, staircase(L, E).astype(float), np.array([n_weyl(e) for e in E]))


# output ----------------------------------------------------------------

def spacing_table(sample) -> list:
    """Rows ``s, cdf_emp, cdf_poisson, cdf_sp, cdf_goe`` at the sorted spacings."""
    s = np.sort(np.asarray(getattr(sample, "spacings", sample), dtype=float))
    Fn = np.searchsorted(s, s, side="right") / s.size
    cols = [reference_cdf(law, s) for law in LAWS]
    return [list(r) for r in zip(s, Fn, *cols)]


SPACING_HEADER = ["s", "cdf_emp", "cdf_poisson", "cdf_sp", "cdf_goe"]


def spacing_summary(sample: SpacingSample, n_levels: int, method: str = "sample-points") -> dict:
    d = ks_all(sample, method)
    return {"ks_poisson": d[POISSON], "ks_sp": d[SEMI_POISSON], "ks_goe": d[GOE],
            "n_levels": int(n_levels), "window": sample.window,
            "unfolding": sample.method, "ks_method": method}
