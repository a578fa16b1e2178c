"""Robust L1 regression over the unit simplex.

Instances hold data ``G`` (one row per measurement/agent) and targets ``h``;
the objective is ``f(x) = ||G x - h||_1``. The module provides value and
subgradient oracles, per-row (per-agent) subgradients, deterministic instance
generation, plain-text serialization, and a grid-search reference optimum for
low-dimensional acceptance tests.

All residual and subgradient kernels are written so that the vectorized forms
are bit-identical to per-row evaluation (row products reduced with row-axis
sums, sign aggregation reduced along axis 0). The distributed solver's
sequential/vectorized equivalence and the per-agent decomposition identity
``sum_i row_subgradient(p, i, x) == subgradient(p, x)`` hold exactly, not
merely to rounding.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class ProblemInstance:
    """Data (G, h) of the L1 objective plus its Lipschitz bound.

    ``L = sum_i ||g_i||_2`` dominates every subgradient norm, hence is a valid
    Lipschitz constant for ``f`` on the whole space. ``row_norms[i]`` is the
    Lipschitz constant of the single-row term ``|<g_i, x> - h_i|``.
    """

    G: np.ndarray
    h: np.ndarray
    L: float = field(init=False)
    row_norms: np.ndarray = field(init=False)

    def __post_init__(self):
        G = np.array(self.G, dtype=float)
        h = np.array(self.h, dtype=float)
        if G.ndim != 2:
            raise ValueError(f"G must be a 2-D matrix, got shape {G.shape}")
        n, d = G.shape
        if n < 1 or d < 2:
            raise ValueError(f"need at least 1 row and dimension >= 2, got {n}x{d}")
        if h.shape != (n,):
            raise ValueError(f"h must have shape ({n},), got {h.shape}")
        if not (np.all(np.isfinite(G)) and np.all(np.isfinite(h))):
            raise ValueError("instance data must be finite")
        G.setflags(write=False)
        h.setflags(write=False)
        self.G = G
        self.h = h
        self.row_norms = np.linalg.norm(G, axis=1)
        self.row_norms.setflags(write=False)
        self.L = float(np.sum(self.row_norms))

    @property
    def n_rows(self) -> int:
        return self.G.shape[0]

    @property
    def dim(self) -> int:
        return self.G.shape[1]


def generate_instance(n_rows: int, dim: int, seed: int) -> ProblemInstance:
    """Instance with G, h entries i.i.d. uniform on [0, 1].

    Drawn from numpy's seeded PCG64 generator, so the same arguments always
    reproduce the same instance bit for bit.
    """
    if n_rows < 1 or dim < 2:
        raise ValueError(f"need n_rows >= 1 and dim >= 2, got {n_rows}, {dim}")
    rng = np.random.default_rng(seed)
    G = rng.random((n_rows, dim))
    h = rng.random(n_rows)
    return ProblemInstance(G, h)


def residuals(p: ProblemInstance, x) -> np.ndarray:
    """Per-row residuals <g_i, x> - h_i (row products, row-axis sum)."""
    x = np.asarray(x, dtype=float)
    return np.sum(p.G * x, axis=1) - p.h


def objective(p: ProblemInstance, x) -> float:
    """f(x) = sum_i |<g_i, x> - h_i|."""
    return float(np.sum(np.abs(residuals(p, x))))


def subgradient(p: ProblemInstance, x) -> np.ndarray:
    """A subgradient sum_i sgn(r_i) g_i with the sgn(0) = 0 convention.

    Equals the ordered sum over rows of ``row_subgradient``, exactly.
    """
    s = np.sign(residuals(p, x))
    return np.sum(s[:, None] * p.G, axis=0)


def row_subgradient(p: ProblemInstance, agent: int, x) -> np.ndarray:
    """Subgradient sgn(r_i) g_i of the single-row term owned by ``agent``."""
    if not 0 <= agent < p.n_rows:
        raise IndexError(f"agent {agent} out of range for {p.n_rows} rows")
    x = np.asarray(x, dtype=float)
    r = np.sum(p.G[agent] * x) - p.h[agent]
    return np.sign(r) * p.G[agent]


def block_subgradient(p: ProblemInstance, rows, x) -> np.ndarray:
    """Subgradient of the partial objective formed by the given rows.

    Used when an agent owns a block of rows instead of a single one.
    """
    rows = np.asarray(rows, dtype=int)
    x = np.asarray(x, dtype=float)
    r = np.sum(p.G[rows] * x, axis=1) - p.h[rows]
    return np.sum(np.sign(r)[:, None] * p.G[rows], axis=0)


def block_lipschitz(p: ProblemInstance, rows) -> float:
    """Lipschitz bound of the partial objective formed by the given rows."""
    return float(np.sum(p.row_norms[np.asarray(rows, dtype=int)]))


@dataclass(frozen=True)
class ReferenceOptimum:
    """A reference minimizer and value; ``x_star`` may be None when only a
    value is known (e.g. supplied externally for high-dimensional runs)."""

    x_star: np.ndarray | None
    f_star: float


def simplex_grid(dim: int, step: float) -> np.ndarray:
    """All points of the regular simplex lattice with spacing ~``step``.

    The realized spacing is 1/round(1/step). Point count grows like
    (1/step)^(dim-1); keep dim small.
    """
    if not 0 < step <= 1:
        raise ValueError(f"step must be in (0, 1], got {step}")
    m = int(round(1.0 / step))
    return _compositions(m, dim) / m


def _compositions(total: int, parts: int) -> np.ndarray:
    if parts == 1:
        return np.array([[total]], dtype=float)
    blocks = []
    for first in range(total + 1):
        rest = _compositions(total - first, parts - 1)
        blocks.append(np.column_stack([np.full(len(rest), float(first)), rest]))
    return np.vstack(blocks)


def _tangent_lattice(dim: int, radius: int = 2) -> np.ndarray:
    """Nonzero integer vectors with zero sum and max-norm <= radius.

    The refinement's shrinking grid steps along these directions. The set is
    richer than the bare edge directions e_i - e_j on purpose: the piecewise
    linear objective can hide a descent cone between adjacent edge directions
    and stall a plain coordinate-exchange search.
    """
    from itertools import product

    dirs = [
        z
        for z in product(range(-radius, radius + 1), repeat=dim)
        if sum(z) == 0 and any(z)
    ]
    return np.array(dirs, dtype=float)


def reference_optimum(p: ProblemInstance, grid_step: float = 1e-2) -> ReferenceOptimum:
    """Reference optimum by dense simplex grid search plus local refinement.

    Exhaustive search on the lattice with the given spacing, then a shrinking
    grid around the incumbent: step along a fan of integer tangent directions,
    recenter while any move improves, halve the scale on stall, down to cell
    size 1e-7. This pins ``f_star`` to within roughly ``L`` times the final
    cell diameter. Exponential in the dimension; restricted to dim <= 4.
    """
    if p.dim > 4:
        raise ValueError(f"grid reference supports dim <= 4, got {p.dim}")
    if not 0 < grid_step <= 1e-2:
        raise ValueError(f"grid_step must be in (0, 1e-2], got {grid_step}")
    pts = simplex_grid(p.dim, grid_step)
    vals = np.sum(np.abs(pts @ p.G.T - p.h), axis=1)
    best = pts[int(np.argmin(vals))].copy()
    best_val = objective(p, best)

    dirs = _tangent_lattice(p.dim)
    s = 1.0 / round(1.0 / grid_step)
    stages = 0
    while s >= 1e-7:
        improved = False
        for z in dirs:
            cand = best + s * z
            if cand.min() < 0.0:
                continue
            val = objective(p, cand)
            if val < best_val:
                best, best_val = cand, val
                improved = True
        if not improved:
            s *= 0.5
        stages += 1
        if stages > 200_000:
            raise RuntimeError("reference refinement failed to terminate")
    return ReferenceOptimum(x_star=best, f_star=best_val)


def save_instance(p: ProblemInstance, path) -> None:
    """Write an instance as text: "N d", N rows of G, then the h row."""
    lines = [f"{p.n_rows} {p.dim}"]
    for row in p.G:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    lines.append(" ".join(f"{v:.17g}" for v in p.h))
    Path(path).write_text("\n".join(lines) + "\n")


def load_instance(path) -> ProblemInstance:
    """Read an instance written by ``save_instance``."""
    raw = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not raw:
        raise ValueError(f"{path}: empty instance file")
    head = raw[0].split()
    if len(head) != 2:
        raise ValueError(f"{path}:1: expected 'N d', got {raw[0]!r}")
    n, d = int(head[0]), int(head[1])
    if len(raw) != n + 2:
        raise ValueError(f"{path}: expected {n + 2} lines, got {len(raw)}")
    G = np.empty((n, d))
    for i in range(n):
        row = [float(t) for t in raw[1 + i].split()]
        if len(row) != d:
            raise ValueError(f"{path}:{i + 2}: expected {d} entries, got {len(row)}")
        G[i] = row
    h = np.array([float(t) for t in raw[n + 1].split()])
    if h.shape != (n,):
        raise ValueError(f"{path}:{n + 2}: expected {n} targets, got {h.size}")
    return ProblemInstance(G, h)
