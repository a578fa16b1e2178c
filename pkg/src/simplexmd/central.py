"""Centralized mirror descent with trace recording and a per-step monitor.

The solver iterates ``x_{k+1} = mirror_step(map, x_k, subgradient(x_k), alpha_k)``
for a fixed iteration budget. When monitoring is enabled, every step is
checked against the divergence-contraction inequality

    D(z, x_{k+1}) - D(z, x_k) <= alpha_k <g_k, z - x_k> + alpha_k^2 L^2 / (2 mu)

which consecutive iterates must satisfy for every feasible z (the monitor
uses a fixed reference point, by default the reference minimizer). Violations
are counted, never fatal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    NEGATIVE_ENTROPY,
    MirrorMap,
    bregman,
    interior_clamp,
    is_feasible,
    mirror_step,
)
from .problems import ProblemInstance, ReferenceOptimum, residuals
from .schedules import StepSchedule

# Pass condition for the step-inequality monitor: slack >= -STEP_SLACK_TOL.
STEP_SLACK_TOL = 1e-9

TRACE_HEADER = "k,alpha,f,f_gap,dist_ref,bregman_ref,step_norm,monitor_slack"


def default_decimation(iters: int) -> int:
    """Record every iteration up to 10^4, then every ceil(iters/10^4)-th."""
    return 1 if iters <= 10_000 else math.ceil(iters / 10_000)


@dataclass
class RunTrace:
    """Per-iteration records of a centralized run plus summary fields.

    Rows describe the pre-step state at iteration k together with the norm of
    the step taken from it; reference-based columns are NaN when no reference
    was supplied, ``monitor_slack`` is NaN when monitoring was off. Tail
    summaries cover the last 10% of iterations regardless of decimation.
    """

    k: np.ndarray
    alpha: np.ndarray
    f: np.ndarray
    f_gap: np.ndarray
    dist_ref: np.ndarray
    bregman_ref: np.ndarray
    step_norm: np.ndarray
    monitor_slack: np.ndarray
    final_x: np.ndarray
    iters: int
    monitor_violations: int
    min_monitor_slack: float
    tail_max_step_norm: float
    tail_bregman_osc: float

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(TRACE_HEADER + "\n")
            for i in range(len(self.k)):
                fh.write(
                    f"{int(self.k[i])},{self.alpha[i]:.17g},{self.f[i]:.17g},"
                    f"{self.f_gap[i]:.17g},{self.dist_ref[i]:.17g},"
                    f"{self.bregman_ref[i]:.17g},{self.step_norm[i]:.17g},"
                    f"{self.monitor_slack[i]:.17g}\n"
                )


def check_step_inequality(
    mirror_map: MirrorMap,
    p: ProblemInstance,
    x_k,
    x_k1,
    z,
    alpha: float,
) -> float:
    """Slack of the per-step inequality at probe z; pass is slack >= -1e-9.

    ``x_k1`` must be the mirror step taken from ``x_k`` with the instance's
    (deterministic) subgradient and step size ``alpha``.
    """
    x_k = np.asarray(x_k, dtype=float)
    s = np.sign(residuals(p, x_k))
    g = np.sum(s[:, None] * p.G, axis=0)
    return _step_slack(mirror_map, p.L, x_k, x_k1, z, alpha, g)


def _step_slack(mirror_map, L, x_k, x_k1, z, alpha, g):
    lhs = bregman(mirror_map, z, x_k1) - bregman(mirror_map, z, x_k)
    rhs = alpha * float(g @ (z - x_k)) + alpha * alpha * L * L / (2.0 * mirror_map.mu)
    return rhs - lhs


def run_md(
    p: ProblemInstance,
    mirror_map: MirrorMap,
    sched: StepSchedule,
    x0,
    iters: int,
    ref: ReferenceOptimum | None = None,
    monitor: bool = False,
    monitor_z=None,
    decimation: int | None = None,
) -> RunTrace:
    """Run centralized mirror descent for a fixed iteration budget.

    ``x0`` must be feasible; for the entropic map it is lifted into the
    interior first (no-op for interior points). The run is deterministic
    given its arguments. ``decimation`` overrides the default trace stride;
    monitoring and tail summaries always cover every iteration.
    """
    if iters < 1:
        raise ValueError(f"need at least one iteration, got {iters}")
    x0 = np.asarray(x0, dtype=float)
    if not is_feasible(x0, tol=1e-9):
        raise ValueError("x0 is not a feasible simplex point")
    x = interior_clamp(x0) if mirror_map.kind == NEGATIVE_ENTROPY else x0.copy()

    z = None
    if monitor:
        if monitor_z is not None:
            z = np.asarray(monitor_z, dtype=float)
        elif ref is not None and ref.x_star is not None:
            z = ref.x_star
        else:
            raise ValueError("monitor=True needs monitor_z or a reference with x_star")

    x_star = ref.x_star if ref is not None else None
    f_star = ref.f_star if ref is not None else math.nan
    stride = decimation if decimation else default_decimation(iters)
    if stride < 1:
        raise ValueError(f"decimation must be >= 1, got {decimation}")
    tail_start = iters - max(1, iters // 10)

    rows_k, rows_a, rows_f, rows_gap = [], [], [], []
    rows_dist, rows_breg, rows_step, rows_slack = [], [], [], []
    violations = 0
    min_slack = math.inf
    tail_max_step = 0.0
    tail_breg_lo, tail_breg_hi = math.inf, -math.inf

    for k in range(iters):
        a = sched.alpha(k)
        r = residuals(p, x)
        g = np.sum(np.sign(r)[:, None] * p.G, axis=0)
        x_next = mirror_step(mirror_map, x, g, a)
        step_norm = float(np.linalg.norm(x_next - x))

        slack = math.nan
        if monitor:
            slack = _step_slack(mirror_map, p.L, x, x_next, z, a, g)
            if slack < -STEP_SLACK_TOL:
                violations += 1
            if slack < min_slack:
                min_slack = slack

        record = (k % stride == 0) or (k == iters - 1)
        breg = math.nan
        if record or (k >= tail_start and x_star is not None):
            if x_star is not None:
                breg = bregman(mirror_map, x_star, x)
        if record:
            rows_k.append(k)
            rows_a.append(a)
            rows_f.append(float(np.sum(np.abs(r))))
            rows_gap.append(rows_f[-1] - f_star)
            rows_dist.append(
                float(np.linalg.norm(x - x_star)) if x_star is not None else math.nan
            )
            rows_breg.append(breg)
            rows_step.append(step_norm)
            rows_slack.append(slack)
        if k >= tail_start:
            if step_norm > tail_max_step:
                tail_max_step = step_norm
            if x_star is not None:
                tail_breg_lo = min(tail_breg_lo, breg)
                tail_breg_hi = max(tail_breg_hi, breg)
        x = x_next

    return RunTrace(
        k=np.array(rows_k, dtype=int),
        alpha=np.array(rows_a),
        f=np.array(rows_f),
        f_gap=np.array(rows_gap),
        dist_ref=np.array(rows_dist),
        bregman_ref=np.array(rows_breg),
        step_norm=np.array(rows_step),
        monitor_slack=np.array(rows_slack),
        final_x=x,
        iters=iters,
        monitor_violations=violations,
        min_monitor_slack=min_slack if monitor else math.nan,
        tail_max_step_norm=tail_max_step,
        tail_bregman_osc=(
            tail_breg_hi - tail_breg_lo if x_star is not None else math.nan
        ),
    )
