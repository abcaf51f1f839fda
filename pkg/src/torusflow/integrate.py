"""Adaptive integration of the slow-fast flow on the universal cover.

The state is augmented with the running divergence integral
z(t) = int_0^t div X dtau (div X = f_x + eps * g_y), so the Floquet
data of detected cycles inherits the solver's error control instead of
being re-quadratured afterwards.  Backward runs integrate the
time-reversed field; their z carries the opposite sign.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .geometry import TAU, wrap
from .models import SlowFastModel


class IntegrationError(RuntimeError):
    """Solver failure: step-size underflow or budget exhaustion."""


@dataclass(frozen=True)
class SolverOptions:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = math.inf
    max_time: float = 1e7

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_step <= 0 or self.max_time <= 0:
            raise ValueError("max_step and max_time must be positive")


DEFAULT_OPTIONS = SolverOptions()


@dataclass
class Trajectory:
    """A solver run: times, lift points, and accumulated divergence.

    For ``direction == "backward"`` the points follow the time-reversed
    field and ``div_accum`` holds minus the divergence integral along
    the path.
    """

    times: np.ndarray
    points: np.ndarray  # (n, 2) lift coordinates
    div_accum: np.ndarray
    eps: float
    model_label: str
    direction: str = "forward"
    dense: object = field(default=None, repr=False)  # scipy OdeSolution

    def __post_init__(self):
        if len(self.times) != len(self.points) or len(self.times) != len(self.div_accum):
            raise ValueError("times, points, div_accum must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def end_point(self) -> np.ndarray:
        return self.points[-1]

    @property
    def end_state(self) -> np.ndarray:
        return np.append(self.points[-1], self.div_accum[-1])

    def sample(self, t) -> np.ndarray:
        """Evaluate the dense interpolant at times t -> rows (x, y, z)."""
        if self.dense is None:
            raise ValueError("trajectory was integrated without dense output")
        return np.atleast_2d(self.dense(np.asarray(t, dtype=float)).T)

    def resample_positions(self, n: int) -> np.ndarray:
        ts = np.linspace(self.times[0], self.times[-1], n)
        return self.sample(ts)[:, :2]

    def to_csv(self, path):
        wrapped = wrap(self.points)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x_lift", "y_lift", "x_wrapped", "y_wrapped", "div_accum"])
            for t, p, pw, z in zip(self.times, self.points, wrapped, self.div_accum):
                w.writerow([repr(float(t)), repr(float(p[0])), repr(float(p[1])),
                            repr(float(pw[0])), repr(float(pw[1])), repr(float(z))])


def flow(
    model: SlowFastModel,
    eps: float,
    p0,
    T: float,
    opts: SolverOptions | None = None,
    direction: str = "forward",
    dense: bool = False,
    z0: float = 0.0,
) -> Trajectory:
    """Integrate the augmented field for fast time T from p0.

    At eps = 0 the slow coordinate is frozen and the run reproduces the
    horizontal fast dynamics exactly (up to solver error).
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if direction not in ("forward", "backward"):
        raise ValueError(f"unknown direction {direction!r}")
    opts = opts or DEFAULT_OPTIONS
    if T > opts.max_time:
        raise IntegrationError(f"T = {T} exceeds max_time = {opts.max_time}")
    sigma = 1 if direction == "forward" else -1
    fun = model.rhs(eps, direction=sigma)
    state0 = np.array([p0[0], p0[1], z0], dtype=float)
    sol = solve_ivp(
        fun,
        (0.0, T),
        state0,
        method="RK45",
        rtol=opts.rel_tol,
        atol=opts.abs_tol,
        max_step=opts.max_step,
        dense_output=dense,
    )
    if not sol.success:
        raise IntegrationError(f"solver failed: {sol.message}")
    return Trajectory(
        times=sol.t,
        points=sol.y[:2].T.copy(),
        div_accum=sol.y[2].copy(),
        eps=eps,
        model_label=model.label,
        direction=direction,
        dense=sol.sol if dense else None,
    )
