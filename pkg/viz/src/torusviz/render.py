"""Figure rendering from torusflow run directories.

Three figure kinds:

* portrait     -- fundamental domain [0, 2pi]^2 with critical curves
                  (attracting solid, repelling dashed), contact markers,
                  and the detected limit cycles;
* torus3d      -- the same curves on the standard torus embedding
                  ((R + r cos y) cos x, (R + r cos y) sin x, r sin y),
                  R = 2, r = 1;
* convergence  -- log-log |eps * div integral - I| and Hausdorff distance
                  against eps, one line per critical curve.

Rendering is deterministic: fixed style, fixed SVG hash salt, no
timestamps in the output metadata, so identical inputs give identical
bytes in both PNG and SVG.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import (
    SchemaError,
    eps_tag,
    find_census_eps,
    load_census,
    load_curves,
    load_orbits,
    load_sweep,
)

TAU = 2.0 * math.pi
TORUS_R, TORUS_r = 2.0, 1.0

STYLE = {
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.25,
    "svg.hashsalt": "torusviz",
}

ATTRACTING_COLOR = "#c62828"
REPELLING_COLOR = "#1565c0"

PLOT_KINDS = ("portrait", "torus3d", "convergence")


@dataclass(frozen=True)
class PlotJob:
    indir: Path
    kind: str
    out: Path
    eps: float | None = None

    def __post_init__(self):
        if self.kind not in PLOT_KINDS:
            raise SchemaError(f"unknown plot kind {self.kind!r}")


def split_wrapped(samples: np.ndarray) -> list[np.ndarray]:
    """Break a wrapped polyline at the fundamental-domain seams."""
    jumps = np.where(np.any(np.abs(np.diff(samples, axis=0)) > math.pi, axis=1))[0]
    pieces = np.split(samples, jumps + 1)
    return [p for p in pieces if len(p) >= 2]


def _stability_styles(census: dict):
    curve_stab = {c["index"]: c["stability"] for c in census["critical_curves"]}
    cycle_stab = {i: c["stability"] for i, c in enumerate(census["cycles"])}
    return curve_stab, cycle_stab


def _pick_eps(job: PlotJob) -> float:
    if job.eps is not None:
        return job.eps
    return find_census_eps(job.indir)[0]


def render_portrait(job: PlotJob, fig):
    eps = _pick_eps(job)
    curves = load_curves(job.indir / "curves.csv")
    census = load_census(job.indir / f"census_eps{eps_tag(eps)}.json")
    orbits = load_orbits(job.indir / f"orbits_eps{eps_tag(eps)}.csv")
    curve_stab, cycle_stab = _stability_styles(census)

    ax = fig.add_subplot(111)
    for idx, pts in sorted(curves.items()):
        stab = curve_stab.get(idx, 0)
        style = "-" if stab == -1 else "--"
        for piece in split_wrapped(pts):
            ax.plot(piece[:, 0], piece[:, 1], style, color="0.35", lw=0.9)
    for idx, pts in sorted(orbits.items()):
        color = ATTRACTING_COLOR if cycle_stab.get(idx) == "attracting" else REPELLING_COLOR
        for piece in split_wrapped(pts):
            ax.plot(piece[:, 0], piece[:, 1], "-", color=color, lw=1.6)
    for c in census["critical_curves"]:
        for cp in c.get("contacts", []):
            ax.plot([cp["x"]], [cp["y"]], "ko", ms=4)
    ax.set_xlim(0, TAU)
    ax.set_ylim(0, TAU)
    ax.set_aspect("equal")
    ticks = [0, math.pi, TAU]
    ax.set_xticks(ticks, ["0", "$\\pi$", "$2\\pi$"])
    ax.set_yticks(ticks, ["0", "$\\pi$", "$2\\pi$"])
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(
        f"{census['model']}  eps={census['eps']:g}: critical curves and cycles"
    )


def torus_embedding(pts: np.ndarray) -> np.ndarray:
    x, y = pts[:, 0], pts[:, 1]
    return np.column_stack(
        [
            (TORUS_R + TORUS_r * np.cos(y)) * np.cos(x),
            (TORUS_R + TORUS_r * np.cos(y)) * np.sin(x),
            TORUS_r * np.sin(y),
        ]
    )


def render_torus3d(job: PlotJob, fig):
    eps = _pick_eps(job)
    census = load_census(job.indir / f"census_eps{eps_tag(eps)}.json")
    orbits = load_orbits(job.indir / f"orbits_eps{eps_tag(eps)}.csv")
    _, cycle_stab = _stability_styles(census)

    ax = fig.add_subplot(111, projection="3d")
    u = np.linspace(0, TAU, 60)
    v = np.linspace(0, TAU, 30)
    uu, vv = np.meshgrid(u, v)
    ax.plot_surface(
        (TORUS_R + TORUS_r * np.cos(vv)) * np.cos(uu),
        (TORUS_R + TORUS_r * np.cos(vv)) * np.sin(uu),
        TORUS_r * np.sin(vv),
        color="0.85", alpha=0.25, linewidth=0, shade=False,
    )
    for idx, pts in sorted(orbits.items()):
        color = ATTRACTING_COLOR if cycle_stab.get(idx) == "attracting" else REPELLING_COLOR
        xyz = torus_embedding(pts)
        ax.plot(xyz[:, 0], xyz[:, 1], xyz[:, 2], color=color, lw=1.4)
    k, l = census["winding"]
    ax.set_title(f"{census['model']}: ({k},{l})-knot cycles on the torus")
    ax.set_box_aspect((1, 1, 0.45))
    lim = TORUS_R + TORUS_r
    ax.set_xlim(-lim, lim)
    ax.set_ylim(-lim, lim)
    ax.set_zlim(-1.5, 1.5)
    ax.set_axis_off()


def render_convergence(job: PlotJob, fig):
    rows = load_sweep(job.indir / "sweep.csv")
    by_curve: dict[int, list] = {}
    for r in rows:
        by_curve.setdefault(r["curve_index"], []).append(r)
    ax1 = fig.add_subplot(121)
    ax2 = fig.add_subplot(122)
    for idx, rs in sorted(by_curve.items()):
        rs = sorted(rs, key=lambda r: -r["eps"])
        eps = [r["eps"] for r in rs]
        ax1.loglog(eps, [max(r["gap_abs"], 1e-300) for r in rs], "o-",
                   label=f"curve {idx}")
        ax2.loglog(eps, [max(r["hausdorff"], 1e-300) for r in rs], "s-",
                   label=f"curve {idx}")
    ax1.set_xlabel("eps")
    ax1.set_ylabel("|eps * div integral - I|")
    ax1.set_title("divergence-integral gap")
    ax2.set_xlabel("eps")
    ax2.set_ylabel("Hausdorff distance to critical curve")
    ax2.set_title("cycle convergence")
    ax1.legend(fontsize=7)
    ax2.legend(fontsize=7)


RENDERERS = {
    "portrait": (render_portrait, (5.2, 5.2)),
    "torus3d": (render_torus3d, (6.0, 4.2)),
    "convergence": (render_convergence, (8.0, 3.6)),
}


def render(job: PlotJob) -> list[Path]:
    """Render one job, writing both PNG and SVG next to ``job.out``.

    Returns the written paths.  Raises SchemaError before any file is
    written when the inputs do not parse.
    """
    fn, figsize = RENDERERS[job.kind]
    with plt.rc_context(STYLE):
        fig = plt.figure(figsize=figsize)
        try:
            fn(job, fig)
            fig.tight_layout()
            out = Path(job.out)
            out.parent.mkdir(parents=True, exist_ok=True)
            targets = [out.with_suffix(".png"), out.with_suffix(".svg")]
            for t in targets:
                if t.suffix == ".svg":
                    fig.savefig(t, metadata={"Date": None})
                else:
                    fig.savefig(t)
            return targets
        finally:
            plt.close(fig)
