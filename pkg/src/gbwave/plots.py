"""Figure rendering for the experiment report path.

Each experiment kind gets a PNG next to its CSV output, produced from the
emitted files so the figures always show exactly what was written.  The
Agg backend keeps this headless-safe; pass --no-plots to skip rendering.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _read_csv(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = list(r)
    cols = {name: [row[i] for row in rows] for i, name in enumerate(header)}
    return header, cols


def _floats(vals):
    return [float(v) for v in vals]


def _plot_table1(out: Path):
    _, cols = _read_csv(out / "table1.csv")
    h = _floats(cols["h"])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.loglog(h, _floats(cols["S_h"]), "o-", label="S_h")
    ax1.loglog(h, _floats(cols["sqrt_h"]), "k--", label="sqrt(h)")
    ax1.set_xlabel("h")
    ax1.set_ylabel("sup-t lattice residual")
    ax1.legend()
    ax2.semilogx(h, _floats(cols["E_h"]), "s-")
    ax2.set_xlabel("h")
    ax2.set_ylabel("semi-discrete energy")
    ax2.set_ylim(bottom=0.0)
    fig.tight_layout()
    fig.savefig(out / "table1.png", dpi=150)
    plt.close(fig)


def _plot_error_vs_h(out: Path):
    _, cols = _read_csv(out / "error_vs_h.csv")
    h = _floats(cols["h"])
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.loglog(h, _floats(cols["sup_error"]), "o-", label="sup_t error")
    ax.loglog(h, _floats(cols["final_error"]), "s--", label="error at T")
    ax.set_xlabel("h")
    ax.set_ylabel("l2 error ansatz vs leapfrog")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "error_vs_h.png", dpi=150)
    plt.close(fig)


def _plot_snapshot(out: Path):
    snaps = sorted(out.glob("snapshot_t*.csv"))
    if not snaps:
        return
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for path in snaps:
        header, cols = _read_csv(path)
        t = cols["t"][0]
        if "x" in cols:
            ax.plot(_floats(cols["x"]), _floats(cols["abs"]), label=f"t={t}")
        else:
            # 2-D: plot |u| against the first axis at fixed second index
            x0 = _floats(cols["x0"])
            x1 = _floats(cols["x1"])
            a = _floats(cols["abs"])
            mid = sorted(set(x1))[len(set(x1)) // 2]
            pts = [(x, v) for x, y, v in zip(x0, x1, a) if y == mid]
            pts.sort()
            ax.plot([p[0] for p in pts], [p[1] for p in pts], label=f"t={t}")
    ax.set_xlabel("x")
    ax.set_ylabel("|u|")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "snapshot.png", dpi=150)
    plt.close(fig)


def _plot_ray(out: Path):
    header, cols = _read_csv(out / "ray.csv")
    t = _floats(cols["t"])
    fig, ax = plt.subplots(figsize=(5, 3.5))
    if "x" in cols:
        ax.plot(t, _floats(cols["x"]))
        ax.set_ylabel("x_fd(t)")
    else:
        ax.plot(_floats(cols["x0"]), _floats(cols["x1"]))
        ax.set_ylabel("x1")
        ax.set_xlabel("x0")
    if "x" in cols:
        ax.set_xlabel("t")
    fig.tight_layout()
    fig.savefig(out / "ray.png", dpi=150)
    plt.close(fig)


def _plot_dispersion(out: Path):
    _, vel = _read_csv(out / "group_velocity.csv")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(_floats(vel["xi"]), _floats(vel["v"]))
    ax1.set_xlabel("xi0")
    ax1.set_ylabel("group velocity")
    _, sym = _read_csv(out / "partial_symbols.csv")
    xi = _floats(sym["xi"])
    labels = []
    for N in dict.fromkeys(sym["N"]):
        pts = [(x, float(v)) for x, n, v in zip(xi, sym["N"], sym["value"]) if n == N]
        ax2.plot([p[0] for p in pts], [p[1] for p in pts], label=f"N={N}")
        labels.append(N)
    ax2.set_xlabel("xi")
    ax2.set_ylabel("xi^2 + s_N")
    if len(labels) <= 8:
        ax2.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out / "dispersion.png", dpi=150)
    plt.close(fig)


def _plot_continuous_rates(out: Path):
    _, cols = _read_csv(out / "continuous_rates.csv")
    k = _floats(cols["k"])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.loglog(k, _floats(cols["residual_norm"]), "o-", label="residual")
    ax1.loglog(k, [kk ** -0.5 * _floats(cols["residual_norm"])[0] / k[0] ** -0.5
                   for kk in k], "k--", label="k^(-1/2)")
    ax1.set_xlabel("k")
    ax1.legend()
    ax2.loglog(k, [max(v, 1e-300) for v in _floats(cols["offray_fraction"])], "s-")
    ax2.set_xlabel("k")
    ax2.set_ylabel("off-ray energy fraction")
    fig.tight_layout()
    fig.savefig(out / "continuous_rates.png", dpi=150)
    plt.close(fig)


_PLOTTERS = {
    "table1": _plot_table1,
    "error_vs_h": _plot_error_vs_h,
    "snapshot": _plot_snapshot,
    "ray": _plot_ray,
    "dispersion": _plot_dispersion,
    "continuous_rates": _plot_continuous_rates,
}


def render(kind: str, out_dir) -> None:
    plotter = _PLOTTERS.get(kind)
    if plotter is not None:
        plotter(Path(out_dir))
