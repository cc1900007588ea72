"""Eigenfunction analysis: product states, WKB envelopes, mixing and concentration.

Level indices ``n`` are 1-based (``n = 1`` is the ground state).  Fields are
``(n1, n2)`` arrays with ``q1`` along axis 0, normalized with weight ``h1 h2``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy import integrate

from .classical.geometry import turning_points
from .errors import DomainError, GridMismatchError
from .potentials import PotentialSpec, StepRegion
from .schrodinger.grid import Grid2D, build_grid_1d
from .schrodinger.hamiltonian import DiscreteHamiltonian
from .schrodinger.oned import Spectrum1D, solve_1d
from .spectral_stats import degeneracy_count

DEFAULT_THRESHOLD = 0.7
DEFAULT_DELTA = 0.01
DEFAULT_REF_INDEX = 301
CONCENTRATED, DELOCALIZED = "concentrated", "delocalized"


@dataclass
class WavefunctionField:
    grid: Grid2D
    values: np.ndarray
    energy: float
    index: Optional[int] = None

    @property
    def norm(self) -> float:
        return float(math.sqrt(np.sum(self.values ** 2) * self.grid.cell_area))


def fields_from_spectrum(spectrum, indices: Sequence[int]) -> List[WavefunctionField]:
    """Wrap 1-based levels of a :class:`~steposc.schrodinger.Spectrum` as fields."""
    out = []
    for n in indices:
        out.append(WavefunctionField(spectrum.grid, spectrum.field(n - 1),
                                     float(spectrum.eigenvalues[n - 1]), n))
    return out


def _require_origin(step: Optional[StepRegion]):
    if step is None or not step.at_origin:
        raise DomainError("product states exist only for the step at the origin")


def _require_parity(V: PotentialSpec):
    if not (V.is_even and abs(V.q_min_location) < 1e-14):
        raise DomainError("product states need potentials even about q = 0")


# product states --------------------------------------------------------

@dataclass
class ProductState:
    k1: int
    k2: int
    energy: float
    field: np.ndarray


def product_states(spec1: Spectrum1D, spec2: Spectrum1D, E_max: float, grid: Grid2D,
                   step: StepRegion = StepRegion()) -> List[ProductState]:
    """Odd-odd products of 1D eigenfunctions, zeroed on the step, sorted by energy.

    The 1D spectra must live on the axes of ``grid``.  Such a product vanishes
    on both half-axes bounding the step, so it is an eigenfunction of the
    stepped problem with energy ``E1_k1 + E2_k2``.
    """
    _require_origin(step)
    for s, g in ((spec1, grid.g1), (spec2, grid.g2)):
        if s.grid.n != g.n or not np.allclose(s.grid.q, g.q, rtol=0, atol=1e-12 * g.h):
            raise GridMismatchError("1D spectra must be computed on the 2D grid axes")
    for s, other in ((spec1, spec2), (spec2, spec1)):
        used = s.eigenvalues <= E_max - other.eigenvalues[0]
        if any(p == "none" for p, u in zip(s.parity, used) if u):
            raise DomainError("1D spectra lack parity labels (potential not even?)")
    mask = grid.step_mask(step)
    out = []
    for a in spec1.odd_indices():
        for b in spec2.odd_indices():
            E = spec1.eigenvalues[a] + spec2.eigenvalues[b]
            if E > E_max:
                continue
            f = np.outer(spec1.vectors[:, a], spec2.vectors[:, b])
            f[mask] = 0.0
            f /= math.sqrt(np.sum(f * f) * grid.cell_area)
            out.append(ProductState(a, b, float(E), f))
    out.sort(key=lambda p: (p.energy, p.k1))
    return out


def axis_spectra(V1: PotentialSpec, V2: PotentialSpec, grid: Grid2D, K: Optional[int] = None):
    return solve_1d(V1, grid.g1, K), solve_1d(V2, grid.g2, K)


def field_residual(ham: DiscreteHamiltonian, values: np.ndarray, E: float) -> float:
    """``||H psi - E psi|| / ||psi||`` of a field on the operator's grid."""
    v = ham.from_field(values)
    return float(np.linalg.norm(ham.matrix @ v - E * v) / np.linalg.norm(v))


def match_products(spectrum, products: Sequence[ProductState], threshold: float = 0.9):
    """Best squared overlap of each computed state with the product set.

    Returns ``(best, which)``: per state, the largest ``|<product|psi>|^2`` and
    the index of the product achieving it.  States with ``best >= threshold``
    are product states.
    """
    ham = spectrum.hamiltonian
    if not products:
        return np.zeros(len(spectrum)), np.full(len(spectrum), -1)
    P = np.stack([ham.from_field(p.field) for p in products], axis=1)
    C = (P.T @ spectrum.vectors) * ham.grid.cell_area
    C2 = C * C
    return C2.max(axis=0), C2.argmax(axis=0)


# WKB -------------------------------------------------------------------

@dataclass
class WkbProfile:
    q: np.ndarray
    amplitude: np.ndarray  # |psi| envelope up to a constant
    allowed: np.ndarray  # bool, classically allowed
    valid: np.ndarray  # bool, outside the turning-point neighbourhood


def wkb_profile(V: PotentialSpec, E: float, q, cutoff: Optional[float] = None,
                strict: bool = True) -> WkbProfile:
    """Leading-order WKB envelope.

    Inside the classical region the envelope is ``(2 (E - V))^(-1/4)``.
    Outside it is ``(2 (V - E))^(-1/4) exp(-|int_qt^q sqrt(2 (V - E)) dq|)``
    measured from the nearest turning point ``qt``.  Points with
    ``|E - V| < cutoff`` (default ``0.02 (E - V_min)``) are invalid; with
    ``strict`` they raise :class:`DomainError`, otherwise they give NaN.
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if E <= V.v_min:
        raise DomainError("E must exceed the potential minimum")
    cutoff = 0.02 * (E - V.v_min) if cutoff is None else cutoff
    Vq = V(q)
    d = E - Vq
    valid = np.abs(d) >= cutoff
    if strict and not np.all(valid):
        raise DomainError("WKB is invalid near a turning point (|E - V| below cutoff)")
    qa, qb = turning_points(V, E)
    amp = np.full(q.shape, np.nan)
    inside = valid & (d > 0)
    amp[inside] = (2.0 * d[inside]) ** -0.25
    for i in np.nonzero(valid & (d < 0))[0]:
        qt = qb if q[i] > qb else qa
        lo, hi = sorted((qt, q[i]))
        S = integrate.quad(lambda x: math.sqrt(max(2.0 * (V(x) - E), 0.0)), lo, hi)[0]
        amp[i] = (2.0 * -d[i]) ** -0.25 * math.exp(-S)
    return WkbProfile(q, amp, d > 0, valid)


# counting --------------------------------------------------------------

def levels_1d(V: PotentialSpec, E: float, ppw: float = 20.0) -> np.ndarray:
    """1D levels up to ``E``: exact for harmonic axes, finite differences otherwise."""
    if V.is_harmonic:
        k = np.arange(int(math.floor((E - V.v_min) / V.omega - 0.5)) + 1)
        return V.v_min + V.omega * (k + 0.5)
    g = build_grid_1d(V, E, ppw=ppw, confinement=2.5)
    s = solve_1d(V, g)
    return s.eigenvalues[s.eigenvalues <= E]


@dataclass
class FractionPrediction:
    E: float
    n_smooth: int
    n_odd_odd: int

    @property
    def smooth_odd_odd_fraction(self) -> float:
        return self.n_odd_odd / self.n_smooth if self.n_smooth else float("nan")

    @property
    def fraction(self) -> float:
        return self.n_odd_odd / (0.75 * self.n_smooth) if self.n_smooth else float("nan")


def concentrated_fraction_prediction(V1: PotentialSpec, V2: PotentialSpec,
                                     step: StepRegion, E: float) -> FractionPrediction:
    """Product-state count over three quarters of the smooth count below ``E``."""
    _require_origin(step)
    _require_parity(V1)
    _require_parity(V2)
    e1 = levels_1d(V1, E)
    e2 = levels_1d(V2, E)
    n_all = 0
    n_oo = 0
    for k1, a in enumerate(e1):
        m = int(np.searchsorted(e2, E - a, side="right"))
        n_all += m
        if k1 % 2:
            n_oo += m // 2
    return FractionPrediction(float(E), n_all, n_oo)


# overlaps and mixing ---------------------------------------------------

def _check_same(a, b):
    ga = a.grid if hasattr(a, "grid") else a
    gb = b.grid if hasattr(b, "grid") else b
    if not ga.same_as(gb):
        raise GridMismatchError("fields live on different grids")


def overlap_coefficients(psi: WavefunctionField, basis: Sequence[WavefunctionField],
                         parseval_tol: float = 1e-6) -> np.ndarray:
    """Weighted inner products ``<b_j | psi>``."""
    for b in basis:
        _check_same(psi, b)
    w = psi.grid.cell_area
    c = np.array([np.sum(b.values * psi.values) * w for b in basis])
    if np.sum(c * c) > 1.0 + parseval_tol:
        warnings.warn("sum of squared overlaps exceeds 1; basis is not orthonormal")
    return c


def overlap_matrix(basis, states) -> np.ndarray:
    """``C[j, n] = <basis_j | state_n>`` for two spectra on the same operator grid."""
    hb, hs = basis.hamiltonian, states.hamiltonian
    _check_same(hb.grid, hs.grid)
    if hb.active.shape != hs.active.shape or not np.array_equal(hb.active, hs.active):
        raise GridMismatchError("spectra use different sets of unknowns")
    return (basis.vectors.T @ states.vectors) * hb.grid.cell_area


@dataclass
class MixingReport:
    P: float
    T: float
    N: int
    dN: int
    J: int
    delta: float
    eps: tuple
    E_N: float
    E_ref: float
    x_scaled: float
    captured_mass_min: float
    warnings: list = field(default_factory=list)

    def row(self):
        return [self.x_scaled, self.P, self.T, self.N, self.eps[0], self.eps[1]]


MIXING_HEADER = ["x_scaled", "P", "T", "N", "eps1", "eps2"]


def scaled_parameter(eps1: float, E_N: float, E_ref: float) -> float:
    return eps1 * (E_N / E_ref) ** 1.5


def mixing_from_overlaps(C: np.ndarray, basis_energies: np.ndarray, delta: float = DEFAULT_DELTA,
                         cluster_tol: Optional[float] = None):
    """``(P, T, captured)`` from overlaps ``C[j, n]`` (basis rows, perturbed columns).

    The maximal projection is taken over the span of each degenerate cluster
    of the basis, so P does not depend on the rotation inside a cluster.
    """
    C2 = C * C
    E0 = np.asarray(basis_energies, dtype=float)
    if cluster_tol is None:
        cluster_tol = 1e-6 * (E0[-1] - E0[0]) / max(len(E0) - 1, 1)
    clusters = degeneracy_count(E0, cluster_tol).clusters
    spans = np.stack([C2[c.first:c.first + c.multiplicity].sum(axis=0) for c in clusters])
    P = float(np.mean(spans.max(axis=0)))
    captured = C2.sum(axis=0)
    T = float(np.sum(C2 > delta) / np.sum(captured))
    return P, T, captured


def mixing_metrics(basis, perturbed, N: int, dN: int = 10, J: int = 400,
                   delta: float = DEFAULT_DELTA, eps=(0.0, 0.0),
                   ref_index: int = DEFAULT_REF_INDEX, E_ref: Optional[float] = None,
                   cluster_tol: Optional[float] = None) -> MixingReport:
    """P and T over the perturbed states ``n = N, ..., N + dN - 1`` against basis ``j <= J``.

    ``E_N`` is the unperturbed level ``N`` and ``E_ref`` the unperturbed level
    ``ref_index`` unless given.
    """
    if len(perturbed) < N + dN - 1:
        raise DomainError(f"need {N + dN - 1} perturbed states, have {len(perturbed)}")
    if len(basis) < J:
        raise DomainError(f"need {J} basis states, have {len(basis)}")
    if E_ref is None:
        if len(basis) < ref_index:
            raise DomainError(f"E_ref needs basis level {ref_index}")
        E_ref = float(basis.eigenvalues[ref_index - 1])
    B = basis.head(J)
    S = perturbed
    C = overlap_matrix(B, S)[:, N - 1:N - 1 + dN]
    P, T, captured = mixing_from_overlaps(C, B.eigenvalues, delta, cluster_tol)
    E_N = float(basis.eigenvalues[N - 1])
    notes = []
    if np.any(captured < 0.9):
        notes.append(f"basis captures only {captured.min():.3f} of some state; increase J")
    return MixingReport(P, T, N, dN, J, delta, tuple(float(e) for e in eps), E_N, E_ref,
                        scaled_parameter(eps[0], E_N, E_ref), float(captured.min()), notes)


# marginals and the concentration indicator -----------------------------

@dataclass
class MarginalProfile:
    axis: str  # 'horizontal' (function of q2) or 'vertical' (function of q1)
    q: np.ndarray
    samples: np.ndarray

    @property
    def argmax(self) -> float:
        return float(self.q[argmax_outer(self.q, self.samples)])

    def integral(self) -> float:
        return float(np.sum(self.samples) * (self.q[1] - self.q[0]))


def argmax_outer(q: np.ndarray, m: np.ndarray, rtol: float = 1e-12) -> int:
    """Index of the maximum; ties go to the node with larger ``|q|``."""
    top = np.max(m)
    cand = np.nonzero(m >= top - rtol * abs(top))[0]
    return int(cand[np.argmax(np.abs(q[cand]))])


def marginal_means(psi: WavefunctionField):
    """``(M^H(q2), M^V(q1))``: integrate ``|psi|^2`` over ``q1`` resp. ``q2``."""
    d = psi.values ** 2
    g = psi.grid
    MH = MarginalProfile("horizontal", g.q2, d.sum(axis=0) * g.h1)
    MV = MarginalProfile("vertical", g.q1, d.sum(axis=1) * g.h2)
    return MH, MV


@dataclass
class ConcentrationReport:
    n: Optional[int]
    E: float
    e_tilde: float
    argmax_q1: float
    argmax_q2: float
    label: str
    product: Optional[bool] = None

    def as_dict(self) -> dict:
        d = {"n": self.n, "E": self.E, "e_tilde": self.e_tilde, "argmax_q1": self.argmax_q1,
             "argmax_q2": self.argmax_q2, "label": self.label}
        if self.product is not None:
            d["product"] = self.product
        return d


def e_tilde(psi: WavefunctionField, V1: PotentialSpec, V2: PotentialSpec,
            threshold: float = DEFAULT_THRESHOLD) -> ConcentrationReport:
    """``(V1(argmax M^V) + V2(argmax M^H)) / E`` with its label."""
    MH, MV = marginal_means(psi)
    a1, a2 = MV.argmax, MH.argmax
    val = float((V1(a1) + V2(a2)) / psi.energy)
    label = CONCENTRATED if val >= threshold else DELOCALIZED
    return ConcentrationReport(psi.index, float(psi.energy), val, a1, a2, label)


@dataclass
class Census:
    reports: List[ConcentrationReport]
    threshold: float

    @property
    def values(self) -> np.ndarray:
        return np.array([r.e_tilde for r in self.reports])

    @property
    def fraction_concentrated(self) -> float:
        return float(np.mean([r.label == CONCENTRATED for r in self.reports]))

    @property
    def product_fraction(self) -> Optional[float]:
        flags = [r.product for r in self.reports if r.product is not None]
        return float(np.mean(flags)) if flags else None

    def population_medians(self):
        hi = [r.e_tilde for r in self.reports if r.label == CONCENTRATED]
        lo = [r.e_tilde for r in self.reports if r.label == DELOCALIZED]
        return (float(np.median(hi)) if hi else float("nan"),
                float(np.median(lo)) if lo else float("nan"))

    def histogram(self, bins: int = 20, range=(0.0, 1.2)):
        return np.histogram(self.values, bins=bins, range=range)


def concentration_census(spectrum, window: Sequence[int], V1: PotentialSpec, V2: PotentialSpec,
                         threshold: float = DEFAULT_THRESHOLD,
                         products: Optional[Sequence[ProductState]] = None,
                         product_threshold: float = 0.9) -> Census:
    """Indicator for the 1-based levels ``window[0] .. window[1]`` inclusive.

    With ``products`` given, states whose squared overlap with a product state
    reaches ``product_threshold`` are flagged.
    """
    lo, hi = window
    if not 1 <= lo <= hi <= len(spectrum):
        raise DomainError(f"window {window} outside 1..{len(spectrum)}")
    flags = None
    if products is not None:
        best, _ = match_products(spectrum, products)
        flags = best >= product_threshold
    reports = []
    for psi in fields_from_spectrum(spectrum, range(lo, hi + 1)):
        r = e_tilde(psi, V1, V2, threshold)
        if flags is not None:
            r.product = bool(flags[psi.index - 1])
        reports.append(r)
    return Census(reports, threshold)


def log_density_export(psi) -> np.ndarray:
    """``log(|psi| + max |psi|)`` on the grid."""
    v = np.abs(getattr(psi, "values", psi))
    m = float(np.max(v))
    if m == 0.0:
        raise DomainError("identically zero field has no log-density")
    return np.log(v + m)
