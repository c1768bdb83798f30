"""Experiment orchestration and deterministic CSV/JSON emission.

Each experiment writes one primary CSV, a JSON sidecar with the fully
resolved configuration plus fitted slopes (machine-readable results for the
acceptance suite), and optionally rendered figures.  Independent runs of a
mesh ladder may execute concurrently; files are written by the caller
thread in ladder order, so outputs are byte-identical regardless of the
worker count.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import beam_continuous as bc
from . import beam_discrete as bd
from .config import ExperimentSpec, validate_spec
from .lattice import write_field_csv
from .rays import group_velocity_fd, partial_symbol, sample_ray
from .solver import SimulationConfig, run


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def _fmt(value) -> str:
    if isinstance(value, float):  # includes numpy scalars; repr round-trips
        return repr(float(value))
    return str(value)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass
class ExperimentResult:
    kind: str
    exit_code: int
    files: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def _map_ladder(spec: ExperimentSpec, items, fn):
    """Run fn over ladder items, concurrently unless bit-exact pins serial.

    Results come back in ladder order; failures are collected per item."""
    workers = 1 if spec.bit_exact else max(1, spec.threads)
    results: list = [None] * len(items)
    errors: list = []
    if workers == 1:
        for i, item in enumerate(items):
            try:
                results[i] = fn(item)
            except Exception as exc:  # noqa: BLE001 - reported per run
                errors.append({"run": _fmt(item), "error": str(exc)})
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(fn, item) for item in items]
            for i, fut in enumerate(futures):
                try:
                    results[i] = fut.result()
                except Exception as exc:  # noqa: BLE001
                    errors.append({"run": _fmt(items[i]), "error": str(exc)})
    return results, errors


# ---------------------------------------------------------------------------
# table1: ansatz energy and lattice residual across the mesh ladder.
# ---------------------------------------------------------------------------

def _table1_one(spec: ExperimentSpec, h: float):
    """sup-t residual norms (both normalizations), energy and off-ray ratio.

    The sup over t runs over the leapfrog nodes h_t = mu h.  S_h is the
    l2(hZ^d) norm of the lattice residual; S_h_table is the plain Euclidean
    norm of the nodal residual vector, which is the quantity the reference
    table tabulates (its displayed definition equates ||.||_2 with the
    weighted norm, and only the unweighted reading reproduces its values
    and its h-scaling)."""
    beam = spec.beam(h)
    grid = bd.derive_box(beam, spec.T)
    h_t = spec.mu * h
    n = max(1, int(round(spec.T / h_t)))
    s_h = 0.0
    s_tab = 0.0
    e_h = 0.0
    off = 0.0
    off_every = max(1, n // 10)
    for i in range(n + 1):
        t = i * h_t
        res = bd.lattice_residual_values(beam, grid, t)
        nodal = float(np.sqrt(np.sum(np.abs(res) ** 2)))
        s_tab = max(s_tab, nodal)
        s_h = max(s_h, np.sqrt(h**spec.d) * nodal)
        e_h = max(e_h, bd.energy_discrete(beam, t, grid))
        if i % off_every == 0 or i == n:
            o, tot = bd.offray_energy(beam, t, grid)
            if tot > 0:
                off = max(off, o / tot)
    return h, e_h, s_h, s_tab, off


def _run_table1(spec: ExperimentSpec, out: Path, errors: list) -> dict:
    rows_raw, errs = _map_ladder(spec, list(spec.h_list), lambda h: _table1_one(spec, h))
    errors.extend(errs)
    rows = [(h, e, s, float(np.sqrt(h)), st, off)
            for r in rows_raw if r is not None
            for (h, e, s, st, off) in [r]]
    write_csv(out / "table1.csv",
              ["h", "E_h", "S_h", "sqrt_h", "S_h_table", "offray_ratio"], rows)
    summary = {}
    if len(rows) >= 2:
        hs = [r[0] for r in rows]
        es = [r[1] for r in rows]
        ss = [r[2] for r in rows]
        st = [r[4] for r in rows]
        offs = [r[5] for r in rows]
        summary = {
            "h": hs,
            "E_h": es,
            "S_h": ss,
            "S_h_table": st,
            "offray_ratio": offs,
            "residual_slope": loglog_slope(hs, ss),
            "residual_slope_table": loglog_slope(hs, st),
            "energy_max_over_min": max(es) / min(es),
            "offray_monotone_decreasing": all(b < a for a, b in zip(offs, offs[1:])),
        }
    return summary


# ---------------------------------------------------------------------------
# error_vs_h: leapfrog solution against the ansatz across the ladder.
# ---------------------------------------------------------------------------

def _error_one(spec: ExperimentSpec, h: float):
    beam = spec.beam(h)
    cfg = SimulationConfig(beam=beam, mu=spec.mu, T=spec.T,
                           diag_every=spec.diag_every)
    rows, _ = run(cfg)
    sup_err = max(r.error_l2 for r in rows)
    return h, sup_err, rows[-1].error_l2, rows


def _timeseries_rows(diag_rows, d: int):
    header = ["t", "error_l2", "energy", "offray_ratio"]
    header += ["centroid"] if d == 1 else [f"centroid{i}" for i in range(d)]
    header += ["residual_norm"]
    out = []
    for r in diag_rows:
        rec = [r.t, r.error_l2, r.energy, r.offray_ratio]
        rec += [float(x) for x in np.atleast_1d(r.centroid)]
        rec += [r.residual_norm]
        out.append(rec)
    return header, out


def _run_error_vs_h(spec: ExperimentSpec, out: Path, errors: list) -> dict:
    results, errs = _map_ladder(spec, list(spec.h_list), lambda h: _error_one(spec, h))
    errors.extend(errs)
    results = [r for r in results if r is not None]
    rows = [(h, sup, fin) for (h, sup, fin, _) in results]
    write_csv(out / "error_vs_h.csv", ["h", "sup_error", "final_error"], rows)
    for h, _, _, diag in results:
        header, ts = _timeseries_rows(diag, spec.d)
        write_csv(out / f"timeseries_h{h:g}.csv", header, ts)
    summary = {}
    if len(rows) >= 2:
        sups = [r[1] for r in rows]
        summary = {
            "h": [r[0] for r in rows],
            "sup_error": sups,
            "final_error": [r[2] for r in rows],
            "sup_error_monotone_decreasing": all(
                b < a for a, b in zip(sups, sups[1:])),
            "sup_error_slope": loglog_slope([r[0] for r in rows], sups),
        }
    return summary


# ---------------------------------------------------------------------------
# snapshot: one leapfrog run with field dumps.
# ---------------------------------------------------------------------------

def _run_snapshot(spec: ExperimentSpec, out: Path, errors: list) -> dict:
    h = spec.h_list[0]
    beam = spec.beam(h)
    cfg = SimulationConfig(beam=beam, mu=spec.mu, T=spec.T,
                           diag_every=spec.diag_every)
    diag, snaps = run(cfg, snapshot_times=spec.snapshot_times)
    header, ts = _timeseries_rows(diag, spec.d)
    write_csv(out / f"timeseries_h{h:g}.csv", header, ts)
    grid = cfg.grid
    for t, fld in sorted(snaps.items()):
        # field snapshot: t, coordinates, re, im, abs (axis 0 fastest)
        pts = grid.points().reshape(-1, grid.d, order="F") if grid.d > 1 \
            else grid.axis(0).reshape(-1, 1, order="F")
        vals = fld.values.reshape(-1, order="F")
        rows = []
        for i in range(vals.size):
            rec = [t] + [float(pts[i, k]) for k in range(grid.d)]
            rec += [float(vals[i].real), float(vals[i].imag), float(abs(vals[i]))]
            rows.append(rec)
        cols = ["t"] + (["x"] if grid.d == 1 else [f"x{k}" for k in range(grid.d)])
        cols += ["re", "im", "abs"]
        write_csv(out / f"snapshot_t{t:g}.csv", cols, rows)
        ansatz = bd.sample_beam(beam, grid, t)
        write_field_csv(ansatz, out / f"ansatz_t{t:g}.csv")
    return {"snapshot_times": sorted(float(t) for t in snaps),
            "grid_nodes": list(grid.n)}


# ---------------------------------------------------------------------------
# ray: closed-form bi-characteristic samples.
# ---------------------------------------------------------------------------

def _run_ray(spec: ExperimentSpec, out: Path, errors: list) -> dict:
    p = spec.beam_params()
    times = np.linspace(0.0, spec.T, 201)
    path = sample_ray(p, "fd", times)
    header = ["t"] + (["x"] if spec.d == 1 else [f"x{i}" for i in range(spec.d)])
    rows = [[t] + [float(v) for v in x] for t, x in path.samples]
    write_csv(out / "ray.csv", header, rows)
    span = max(float(np.linalg.norm(x - p.x0)) for _, x in path.samples)
    return {"max_distance_from_x0": span,
            "group_velocity": group_velocity_fd(p.xi0, p.c)}


# ---------------------------------------------------------------------------
# dispersion: group-velocity curve and partial lattice symbols.
# ---------------------------------------------------------------------------

def _run_dispersion(spec: ExperimentSpec, out: Path, errors: list) -> dict:
    xi = np.linspace(-4.0 * np.pi, 4.0 * np.pi, spec.xi_samples)
    rows = [(float(x), group_velocity_fd(np.array([x]), spec.c)) for x in xi]
    write_csv(out / "group_velocity.csv", ["xi", "v"], rows)

    xi_pos = np.linspace(1e-3, np.pi - 1e-3, 129)
    sym_rows = []
    for N in spec.N_list:
        for x in xi_pos:
            sym_rows.append((float(x), N,
                             partial_symbol(float(x), 0.0, spec.c, 1.0, int(N))))
    for x in xi_pos:
        sym_rows.append((float(x), "inf",
                         float(4.0 * spec.c * np.sin(x / 2.0) ** 2)))
    write_csv(out / "partial_symbols.csv", ["xi", "N", "value"], sym_rows)

    # zero set of sqrt(c)|cos(xi/2)|: odd multiples of pi in range
    zeros = [float(x) for x in xi
             if abs(group_velocity_fd(np.array([x]), spec.c)) < 1e-12]
    vs = [r[1] for r in rows]
    return {"velocity_zeros_expected": [m * np.pi for m in (-3, -1, 1, 3)],
            "velocity_min": min(vs),
            "velocity_max": max(vs),
            "sampled_zeros": zeros}


# ---------------------------------------------------------------------------
# continuous_rates: asymptotic-rate study for the continuous beam.
# ---------------------------------------------------------------------------

def _rates_one(spec: ExperimentSpec, k: float):
    beam = bc.ContinuousBeam(params=spec.beam_params(), k=k)
    times = np.linspace(0.0, spec.T, 9)
    residual = bc.residual_sup_norm(beam, times)
    xi0, xi1, xi2 = bc.energy_terms(beam, 0.0)
    offray = bc.offray_energy_fraction(beam, 0.0)
    return k, residual, xi0 + xi1 + xi2, offray, xi1, xi2


def _run_continuous_rates(spec: ExperimentSpec, out: Path, errors: list) -> dict:
    results, errs = _map_ladder(spec, list(spec.k_list),
                                lambda k: _rates_one(spec, k))
    errors.extend(errs)
    results = [r for r in results if r is not None]
    rows = [(k, res, en, off) for (k, res, en, off, _, _) in results]
    write_csv(out / "continuous_rates.csv",
              ["k", "residual_norm", "energy", "offray_fraction"], rows)
    summary = {}
    if len(rows) >= 2:
        ks = [r[0] for r in rows]
        summary = {
            "k": ks,
            "residual_slope": loglog_slope(ks, [r[1] for r in rows]),
            "energy": [r[2] for r in rows],
            "energy_top_ratio": rows[-1][2] / rows[-2][2],
            "offray_fraction": [r[3] for r in rows],
            "xi1": [abs(r[4]) for r in results],
            "xi2": [abs(r[5]) for r in results],
            "xi1_slope": loglog_slope(ks, [max(abs(r[4]), 1e-300) for r in results]),
            "xi2_slope": loglog_slope(ks, [max(abs(r[5]), 1e-300) for r in results]),
        }
    return summary


_RUNNERS = {
    "table1": _run_table1,
    "error_vs_h": _run_error_vs_h,
    "snapshot": _run_snapshot,
    "ray": _run_ray,
    "dispersion": _run_dispersion,
    "continuous_rates": _run_continuous_rates,
}


def run_experiment(spec: ExperimentSpec, out_dir, make_plots: bool = True) -> ExperimentResult:
    """Execute one experiment kind; returns exit code 0 iff every run
    completed.  Writes <kind>.csv-family files plus a JSON sidecar with the
    resolved configuration and fitted slopes."""
    spec = validate_spec(spec)
    if spec.kind not in _RUNNERS:
        raise ValueError(f"unknown experiment kind {spec.kind!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    errors: list = []
    summary = _RUNNERS[spec.kind](spec, out, errors)
    payload = {
        "kind": spec.kind,
        "config": spec.as_dict(),
        "results": summary,
        "errors": errors,
    }
    write_json(out / f"{spec.kind}.json", payload)
    if make_plots:
        from . import plots
        plots.render(spec.kind, out)
    files = sorted(str(p.name) for p in out.iterdir() if p.is_file())
    return ExperimentResult(kind=spec.kind, exit_code=0 if not errors else 1,
                            files=files, errors=errors, summary=summary)
