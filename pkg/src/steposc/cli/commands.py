"""Subcommand implementations.  Each writes plot-ready data plus a manifest."""
from __future__ import annotations

import copy
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .. import io
from ..classical import level_set_geometry
from ..classical.angles import densify, fold_to_L, in_L_region, trajectory_angles
from ..classical.dynamics import (ClassicalState, EVENT_NAMES, initial_state_on_level_set,
                                  integrate_with_impacts, resonant_family, scan_families)
from ..errors import ConfigError, IngestionError
from ..experiments import ebk_table, estimate_emax, mixing_study
from ..schrodinger import build_grid, build_hamiltonian, lowest_eigenpairs
from ..schrodinger.eigen import Spectrum
from ..schrodinger.grid import Grid2D
from ..semiclassics import ebk_ladder, families, volume_function, weyl_count
from .. import spectral_stats as ss
from .. import wavefn as wf
from . import config as C
from .manifest import MANIFEST, RunManifest, load_manifest, verify_file

log = logging.getLogger(__name__)


def _out(cfg) -> Path:
    p = Path(cfg["output"]["dir"])
    p.mkdir(parents=True, exist_ok=True)
    return p


# classical -------------------------------------------------------------

def cmd_classical(cfg: dict) -> Path:
    out = _out(cfg)
    man = RunManifest(out, "classical", cfg)
    c = cfg["classical"]
    V1, V2 = C.potentials(cfg)
    step = C.step(cfg)
    if step is None:
        raise ConfigError("step.enabled: the classical command needs the step")
    if c["state"] is not None:
        q1, q2, p1, p2 = (float(x) for x in c["state"])
        state = ClassicalState(q1, q2, p1, p2, 0.0)
    else:
        if not (V1.is_harmonic and V2.is_harmonic):
            raise ConfigError("classical.state: tabulated potentials need an explicit state")
        state = initial_state_on_level_set(V1, V2, *c["energies"], *c["angles"])
    if step.contains(state.q1, state.q2):
        raise ConfigError("classical.angles: initial point lies inside the step")
    t0 = time.perf_counter()
    traj, summ = integrate_with_impacts(state, V1, V2, step, t_max=float(c["t_max"]),
                                        max_impacts=c["max_impacts"], dt=float(c["dt"]),
                                        periodicity_tol=float(c["periodicity_tol"]))
    man.time("integrate", time.perf_counter() - t0)
    traj.to_csv(out / "trajectory.csv")
    man.add(out / "trajectory.csv")
    dense = densify(traj, V1, V2, float(c["dense_dt"]))
    man.add(io.write_csv(out / "configuration.csv", ["t", "q1", "q2", "p1", "p2", "event"],
                         ((t, a, b, p, q, EVENT_NAMES[e]) for t, a, b, p, q, e in
                          zip(dense.t, dense.q1, dense.q2, dense.p1, dense.p2, dense.events))))
    th1, th2 = trajectory_angles(dense, V1, V2)
    man.add(io.write_csv(out / "cross_surface.csv", ["t", "theta1", "theta2"],
                         zip(dense.t, th1, th2)))
    x, y = fold_to_L(th1, th2)
    man.add(io.write_csv(out / "l_billiard.csv", ["t", "x", "y"], zip(dense.t, x, y)))
    E = traj.partial_energies(V1, V2)
    drift = np.max(np.abs(E - E[0]) / np.maximum(np.abs(E[0]), 1e-300), axis=0)
    geoms = [level_set_geometry(V, float(e), w) for V, e, w in
             ((V1, E[0, 0], step.q1_wall), (V2, E[0, 1], step.q2_wall))]
    summary = {
        "mu": list(summ.mu), "b": list(summ.b), "period": summ.period,
        "is_periodic": summ.is_periodic, "n_impacts": list(summ.n_impacts),
        "partial_energies": [float(E[0, 0]), float(E[0, 1])],
        "partial_energy_drift": [float(drift[0]), float(drift[1])],
        "theta_wall": [g.theta_wall for g in geoms],
        "frequency_ratio": geoms[1].omega_E / geoms[0].omega_E,
        "in_L_region": bool(np.all(in_L_region(x, y, geoms[0].theta_wall, geoms[1].theta_wall))),
        "t_end": float(traj.t[-1]),
    }
    man.add(io.write_json(out / "summary.json", summary))
    if c["resonances"]:
        fam = {}
        for m in c["resonances"]:
            found = scan_families(int(m))
            pred = sorted((f.mu, f.b) for f in resonant_family(int(m)))
            fam[str(m)] = {"found": [[list(a), list(b)] for a, b in found],
                           "predicted": [[list(a), list(b)] for a, b in pred],
                           "match": found == pred}
        man.add(io.write_json(out / "families.json", fam))
    man.write()
    return out


# spectrum --------------------------------------------------------------

def _ebk_outputs(cfg, ev, out, man):
    w1, w2 = cfg["potentials"]["omega"]
    r = w2 / w1
    if r >= 1:
        m, presentation, scale = int(round(r)), "direct", w1
    else:
        m, presentation, scale = int(round(1 / r)), "inverse", w1
    if abs((r if r >= 1 else 1 / r) - m) > 1e-12:
        return
    n_levels = int(np.ceil(ev[-1] / scale * 2 + 10))
    preds = []
    for f in families(m):
        lad = ebk_ladder(m, f.label, n_levels, presentation)
        rows = [(k, scale * e) for k, e in lad.levels if scale * e <= ev[-1] + 1.0]
        man.add(io.write_csv(out / f"ebk_{f.label}.csv", ["k", "E_pred"], rows))
        preds.extend(e for _, e in rows)
    tab = ebk_table(ev, np.array(sorted(set(preds))))
    man.add(io.write_csv(out / "ebk_compare.csv", ["index", "eigenvalue", "E_pred", "diff"],
                         ((i + 1, a, b, d) for i, (a, b, d) in enumerate(tab))))


def _run_spectrum(cfg: dict, out: Path) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    man = RunManifest(out, "spectrum", cfg)
    V1, V2 = C.potentials(cfg)
    step = C.step(cfg)
    g, s = cfg["grid"], cfg["solver"]
    K = int(s["levels"])
    t0 = time.perf_counter()
    E_max = g["e_max"] if g["e_max"] is not None else estimate_emax(V1, V2, step, K)
    grid = build_grid(V1, V2, step, float(E_max), float(g["ppw"]), float(g["confinement"]),
                      memory_budget=float(g["memory_budget"]))
    ham = build_hamiltonian(grid, V1, V2, step, cfg["step"]["mode"])
    spec = lowest_eigenpairs(ham, K, tol=float(s["tol"]), seed=int(cfg["seed"]),
                             slice_size=int(s["slice_size"]), max_attempts=int(s["max_attempts"]))
    man.time("solve", time.perf_counter() - t0)
    ev = spec.eigenvalues
    man.add(io.write_spectrum_csv(out / "spectrum.csv", ev, spec.residuals))
    desc = grid.describe()
    man.add(io.write_json(out / "grid.json", desc))
    solver = {"E_max": float(E_max), "levels": K, "unknowns": ham.dimension,
              "slices": spec.info["slices"], "max_residual": float(spec.residuals.max()),
              "orthonormality_error": spec.orthonormality_error(),
              "step_mode": ham.step_mode, "seed": int(cfg["seed"])}
    man.add(io.write_json(out / "solver.json", solver))
    if s["write_vectors"]:
        man.add(io.write_fields(out / "eigenvectors.bin", spec.fields(), desc,
                                {"eigenvalues_file": "spectrum.csv"}))
        man.add(out / "eigenvectors.json")
        if s["csv_fields"] and grid.n1 * grid.n2 <= 20000:
            for i in range(min(K, 10)):
                man.add(io.write_field_csv(out / f"field_{i + 1:04d}.csv", spec.field(i),
                                           grid.q1, grid.q2))
    harmonic = V1.is_harmonic and V2.is_harmonic
    if step is None and harmonic:
        n = int(np.ceil(ev[-1])) + 2
        ana = np.sort([V1.v_min + V2.v_min + V1.omega * (a + 0.5) + V2.omega * (b + 0.5)
                       for a in range(n + 1) for b in range(n + 1)])[:K]
        man.add(io.write_csv(out / "analytic.csv", ["index", "eigenvalue", "analytic", "rel_error"],
                             ((i + 1, e, a, abs(e - a) / abs(a)) for i, (e, a) in
                              enumerate(zip(ev, ana)))))
    if step is not None:
        if harmonic and step.at_origin and V1.load == 0 and V2.load == 0:
            _ebk_outputs(cfg, ev, out, man)
        vol = volume_function(V1, V2, step)
        Es = np.linspace(V1.v_min + V2.v_min, ev[-1], 201)[1:]
        man.add(io.write_csv(out / "weyl.csv", ["E", "N_weyl"],
                             ((e, weyl_count(e, vol)) for e in Es)))
    man.write()
    return out


def _sweep_member(args):
    cfg, out = args
    return str(_run_spectrum(cfg, Path(out)))


def cmd_spectrum(cfg: dict) -> Path:
    out = _out(cfg)
    sweep = cfg["potentials"]["eps_sweep"]
    if not sweep:
        return _run_spectrum(cfg, out)
    jobs = []
    for i, eps in enumerate(sweep):
        sub = copy.deepcopy(cfg)
        sub["potentials"]["eps"] = [float(eps[0]), float(eps[1])]
        sub["potentials"]["eps_sweep"] = None
        sub["output"]["dir"] = str(out / f"eps_{i:02d}")
        jobs.append((sub, sub["output"]["dir"]))
    threads = int(cfg["threads"])
    if threads > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as ex:
            list(ex.map(_sweep_member, jobs))
    else:
        for j in jobs:
            _sweep_member(j)
    man = RunManifest(out, "spectrum-sweep", cfg)
    for _, d in jobs:
        for f in sorted(Path(d).iterdir()):
            man.add(f)
    man.write()
    return out


# ingestion -------------------------------------------------------------

def load_levels(path) -> np.ndarray:
    """Levels from a bundle directory or a CSV.

    Files inside a directory that carries a manifest must match their
    recorded checksum; a bare CSV elsewhere is taken as a third-party spectrum.
    """
    p = Path(path)
    if p.is_dir():
        return io.read_spectrum_csv(verify_file(p, "spectrum.csv"))
    if (p.parent / MANIFEST).is_file():
        verify_file(p.parent, p.name)
    return io.read_spectrum_csv(p)


def load_bundle(path):
    """Spectrum with eigenvectors and the configuration that produced it."""
    p = Path(path)
    if not p.is_dir():
        raise IngestionError(f"{p}: expected a spectrum bundle directory")
    man = load_manifest(p)
    ev = io.read_spectrum_csv(verify_file(p, "spectrum.csv", man))
    names = {f["path"] for f in man.get("files", [])}
    if "eigenvectors.bin" not in names:
        raise IngestionError(f"{p}: bundle has no stored eigenvectors")
    verify_file(p, "eigenvectors.bin", man)
    verify_file(p, "eigenvectors.json", man)
    fields, meta = io.read_fields(p / "eigenvectors.bin")
    bcfg = man["config"]
    V1, V2 = C.potentials(bcfg)
    step = C.step(bcfg)
    grid = Grid2D.from_description(meta)
    ham = build_hamiltonian(grid, V1, V2, step, bcfg["step"]["mode"])
    X = np.stack([ham.from_field(f) for f in fields], axis=1)
    res = np.zeros(len(ev))
    spec = Spectrum(ev[:X.shape[1]], X, res[:X.shape[1]], ham, {"bundle": str(p)})
    return spec, bcfg


# stats -----------------------------------------------------------------

def _synthetic_levels(kind: str, n: int, seed: int) -> np.ndarray:
    if kind == "uniform":
        return 1.0 + 0.5 * np.arange(n)
    rng = np.random.default_rng(seed)
    return np.concatenate(([0.0], np.cumsum(ss.sample_spacings(kind, n - 1, rng))))


def _stats_one(cfg, levels, out: Path, man: RunManifest, resonant: bool, volume=None):
    a = cfg["analysis"]
    out.mkdir(parents=True, exist_ok=True)
    mean_sp = (levels[-1] - levels[0]) / max(len(levels) - 1, 1)
    tol = float(a["degeneracy_tol"]) * mean_sp
    collapse = resonant if a["collapse"] == "auto" else bool(a["collapse"])
    sample = ss.spacing_sample(levels, a["unfolding"], float(a["trim"]), collapse, tol,
                               volume=volume, local_window=a["local_window"])
    man.add(io.write_csv(out / "spacing.csv", ss.SPACING_HEADER, ss.spacing_table(sample)))
    summary = ss.spacing_summary(sample, len(levels), a["ks_method"])
    summary["collapsed"] = collapse
    man.add(io.write_json(out / "spacing_summary.json", summary))
    if len(sample) >= 50:
        dist = ss.spacing_distribution(sample, int(a["bins"]))
        c = dist.centers
        man.add(io.write_csv(out / "histogram.csv",
                             ["s_lo", "s_hi", "pdf", "pdf_poisson", "pdf_sp", "pdf_goe"],
                             zip(dist.edges[:-1], dist.edges[1:], dist.pdf,
                                 *(ss.reference_pdf(law, c) for law in ss.LAWS))))
    deg = ss.degeneracy_count(levels, tol)
    man.add(io.write_csv(out / "degeneracy.csv", ["energy", "multiplicity", "first_index"],
                         ((c.energy, c.multiplicity, c.first + 1) for c in deg.clusters)))
    if volume is not None and len(levels) >= 100:
        wc = ss.weyl_check(levels, lambda e: weyl_count(e, volume))
        man.add(io.write_csv(out / "weyl_check.csv", ["E", "N_emp", "N_weyl", "ratio"],
                             zip(wc.E, wc.n_empirical, wc.n_weyl, wc.ratio)))
    return summary


def cmd_stats(cfg: dict, inputs: Sequence[str] = (), synthetic: Optional[str] = None) -> Path:
    out = _out(cfg)
    man = RunManifest(out, "stats", cfg)
    inputs = list(inputs) or ([cfg["analysis"]["input"]] if cfg["analysis"]["input"] else [])
    if synthetic:
        lv = _synthetic_levels(synthetic, int(cfg["solver"]["levels"]), int(cfg["seed"]))
        _stats_one(cfg, lv, out, man, synthetic == "uniform")
    elif not inputs:
        raise ConfigError("analysis.input: no spectrum given (use --input or a synthetic set)")
    for k, src in enumerate(inputs):
        levels = load_levels(src)
        src_cfg = cfg
        bundle = Path(src) if Path(src).is_dir() else Path(src).parent
        if (bundle / MANIFEST).is_file():
            src_cfg = load_manifest(bundle)["config"]
        V1, V2 = C.potentials(src_cfg)
        step = C.step(src_cfg)
        volume = volume_function(V1, V2, step) if step is not None else None
        sub = out if len(inputs) == 1 else out / f"input_{k:02d}"
        _stats_one(cfg, levels, sub, man, C.is_resonant(src_cfg)
                   and V1.load == 0 and V2.load == 0, volume)
    man.write()
    return out


# concentration ---------------------------------------------------------

def cmd_concentration(cfg: dict, input_dir: Optional[str] = None) -> Path:
    out = _out(cfg)
    man = RunManifest(out, "concentration", cfg)
    a = cfg["analysis"]
    src = input_dir or a["input"]
    if not src:
        raise ConfigError("analysis.input: no spectrum bundle given")
    spec, bcfg = load_bundle(src)
    V1, V2 = C.potentials(bcfg)
    step = C.step(bcfg)
    grid = spec.grid
    products = None
    if step is not None and step.at_origin and V1.is_even and V2.is_even:
        s1, s2 = wf.axis_spectra(V1, V2, grid)
        products = wf.product_states(s1, s2, float(spec.eigenvalues[-1]) + 1.0, grid, step)
    summary = {}
    for lo, hi in a["windows"]:
        if hi > len(spec):
            raise ConfigError(f"analysis.windows: level {hi} beyond the {len(spec)} stored")
        census = wf.concentration_census(spec, (lo, hi), V1, V2, float(a["threshold"]), products)
        tag = f"{lo:04d}_{hi:04d}"
        man.add(io.write_json_lines(out / f"census_{tag}.jsonl",
                                    (r.as_dict() for r in census.reports)))
        med = census.population_medians()
        counts, edges = census.histogram()
        summary[f"{lo}-{hi}"] = {
            "fraction_concentrated": census.fraction_concentrated,
            "product_fraction": census.product_fraction,
            "median_concentrated": med[0], "median_delocalized": med[1],
            "threshold": census.threshold,
            "histogram": {"edges": edges.tolist(), "counts": counts.tolist()},
        }
        psis = wf.fields_from_spectrum(spec, range(lo, hi + 1))
        margs = [wf.marginal_means(p) for p in psis]
        man.add(io.write_array(out / f"marginal_H_{tag}.bin", np.stack([m[0].samples for m in margs]),
                               {"axis": "q2", "q_first": float(grid.q2[0]), "h": grid.h2,
                                "levels": [lo, hi]}))
        man.add(out / f"marginal_H_{tag}.json")
        man.add(io.write_array(out / f"marginal_V_{tag}.bin", np.stack([m[1].samples for m in margs]),
                               {"axis": "q1", "q_first": float(grid.q1[0]), "h": grid.h1,
                                "levels": [lo, hi]}))
        man.add(out / f"marginal_V_{tag}.json")
        if a["log_density"]:
            man.add(io.write_fields(out / f"logdensity_{tag}.bin",
                                    np.stack([wf.log_density_export(p) for p in psis]),
                                    grid.describe(), {"levels": [lo, hi],
                                                      "transform": "log(|psi| + max|psi|)"}))
            man.add(out / f"logdensity_{tag}.json")
    man.add(io.write_json(out / "census_summary.json", summary))
    man.write()
    return out


# mixing ----------------------------------------------------------------

def cmd_mixing(cfg: dict) -> Path:
    out = _out(cfg)
    man = RunManifest(out, "mixing", cfg)
    a = cfg["analysis"]
    step = C.step(cfg)
    if step is None:
        raise ConfigError("step.enabled: mixing needs the step")
    if cfg["potentials"]["tabulated"]:
        raise ConfigError("potentials.tabulated: mixing is defined for harmonic axes")
    t0 = time.perf_counter()
    study = mixing_study(cfg["potentials"]["omega"], step, [int(n) for n in a["N"]],
                         [float(x) for x in a["x_scaled"]], int(a["dN"]), int(a["J"]),
                         float(a["delta"]), float(a["eps_ratio"]), int(a["ref_index"]),
                         float(cfg["grid"]["ppw"]), float(cfg["grid"]["confinement"]),
                         float(cfg["solver"]["tol"]), int(cfg["seed"]))
    man.time("mixing", time.perf_counter() - t0)
    man.add(io.write_csv(out / "mixing.csv", wf.MIXING_HEADER, study.rows()))
    man.add(io.write_json(out / "mixing_summary.json", {
        "reports": [{"N": r.N, "x_scaled": r.x_scaled, "P": r.P, "T": r.T, "eps": list(r.eps),
                     "E_N": r.E_N, "E_ref": r.E_ref, "dN": r.dN, "J": r.J, "delta": r.delta,
                     "captured_mass_min": r.captured_mass_min, "warnings": r.warnings}
                    for r in study.reports],
        "E_ref": study.info["E_ref"], "eps_design": study.info["eps_design"],
        "grid": study.info["grid"]}))
    man.write()
    return out


COMMANDS = {"classical": cmd_classical, "spectrum": cmd_spectrum, "stats": cmd_stats,
            "concentration": cmd_concentration, "mixing": cmd_mixing}
