"""Mirror maps, Bregman divergences, and mirror steps on the unit simplex.

Two geometries are supported: the half squared Euclidean norm and negative
entropy. Both are used with strong-convexity modulus 1 in the ambient 2-norm
(negative entropy is 1-strongly convex w.r.t. the 1-norm on the simplex by
Pinsker's inequality, and ``||.||_2 <= ||.||_1``, so 1 is a valid modulus).

The batch helpers (``*_rows``) apply the corresponding point operation to
every row of a matrix. They are built exclusively from elementwise ops and
row-axis reductions, so each output row is bit-identical to calling the
single-point function on that row; the distributed solver relies on this.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EUCLIDEAN = "euclidean"
NEGATIVE_ENTROPY = "entropy"
_KINDS = (EUCLIDEAN, NEGATIVE_ENTROPY)

# Coordinates below this are lifted into the interior before entropic runs.
INTERIOR_FLOOR = 1e-15


class GeometryDomainError(ValueError):
    """A point lies outside the domain required by the requested map."""


@dataclass(frozen=True)
class MirrorMap:
    """A strongly convex generating function, identified by kind.

    ``mu`` is the strong-convexity modulus in the ambient 2-norm. Both
    supported kinds use ``mu = 1`` (see module docstring).
    """

    kind: str
    mu: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown mirror map kind {self.kind!r}; expected one of {_KINDS}")
        if not self.mu > 0:
            raise ValueError(f"strong-convexity modulus must be positive, got {self.mu}")


def euclidean() -> MirrorMap:
    """Map generated by psi(x) = 0.5*||x||^2 (mirror step = project a subgradient step)."""
    return MirrorMap(EUCLIDEAN, 1.0)


def negative_entropy() -> MirrorMap:
    """Map generated by psi(x) = sum_j x_j log x_j (mirror step = exponentiated update)."""
    return MirrorMap(NEGATIVE_ENTROPY, 1.0)


def psi_value(mirror_map: MirrorMap, x) -> float:
    """Evaluate the generating function at ``x``.

    For negative entropy the continuous extension 0*log(0) = 0 is used, but
    negative coordinates are a domain error.
    """
    x = np.asarray(x, dtype=float)
    if mirror_map.kind == EUCLIDEAN:
        return 0.5 * float(x @ x)
    if np.any(x < 0.0):
        raise GeometryDomainError("negative entropy requires nonnegative coordinates")
    pos = x > 0.0
    xp = x[pos]
    return float(np.sum(xp * np.log(xp)))


def psi_grad(mirror_map: MirrorMap, x) -> np.ndarray:
    """Gradient of the generating function; needs interior x for entropy."""
    x = np.asarray(x, dtype=float)
    if mirror_map.kind == EUCLIDEAN:
        return x.copy()
    if np.any(x <= 0.0):
        raise GeometryDomainError(
            "entropy gradient is undefined on the simplex boundary (zero coordinate)"
        )
    return 1.0 + np.log(x)


def bregman(mirror_map: MirrorMap, y, x) -> float:
    """Bregman divergence D(y, x) = psi(y) - psi(x) - <grad psi(x), y - x>.

    The Euclidean kind reduces to 0.5*||y - x||^2 and is computed in that form
    (it avoids cancellation for nearby points). The second argument must be
    interior for negative entropy; the first may touch the boundary.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if mirror_map.kind == EUCLIDEAN:
        d = y - x
        return 0.5 * float(d @ d)
    return psi_value(mirror_map, y) - psi_value(mirror_map, x) - float(
        psi_grad(mirror_map, x) @ (y - x)
    )


def project_simplex(v) -> np.ndarray:
    """Euclidean projection of ``v`` onto the unit simplex.

    Sort-and-threshold method: exact in exact arithmetic, O(d log d). The
    output is renormalized so its coordinates sum to 1 up to roundoff.
    """
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("projection input must be finite")
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, v.size + 1)
    support = u * idx > css - 1.0
    rho = int(np.nonzero(support)[0][-1])
    tau = (css[rho] - 1.0) / (rho + 1.0)
    w = np.maximum(v - tau, 0.0)
    return w / np.sum(w)


def project_simplex_rows(V) -> np.ndarray:
    """Row-wise simplex projection; each row matches ``project_simplex`` bitwise."""
    V = np.asarray(V, dtype=float)
    if not np.all(np.isfinite(V)):
        raise ValueError("projection input must be finite")
    n = V.shape[1]
    U = np.sort(V, axis=1)[:, ::-1]
    CSS = np.cumsum(U, axis=1)
    idx = np.arange(1, n + 1)
    support = U * idx > CSS - 1.0
    rho = n - 1 - np.argmax(support[:, ::-1], axis=1)
    tau = (CSS[np.arange(V.shape[0]), rho] - 1.0) / (rho + 1.0)
    W = np.maximum(V - tau[:, None], 0.0)
    return W / np.sum(W, axis=1, keepdims=True)


def mirror_step(mirror_map: MirrorMap, x, g, alpha: float) -> np.ndarray:
    """One mirror-descent step from ``x`` with (sub)gradient ``g`` and step ``alpha``.

    Minimizes <g, z - x> + D(z, x)/alpha over the simplex. Euclidean: a
    subgradient step followed by simplex projection. Negative entropy: the
    closed-form multiplicative update x_j * exp(-alpha*g_j), renormalized;
    the exponent is shifted by its maximum before exponentiating, which is
    algebraically neutral and avoids overflow.
    """
    if not alpha > 0:
        raise ValueError(f"step size must be positive, got {alpha}")
    x = np.asarray(x, dtype=float)
    g = np.asarray(g, dtype=float)
    if mirror_map.kind == EUCLIDEAN:
        return project_simplex(x - alpha * g)
    if np.any(x <= 0.0):
        raise GeometryDomainError(
            "entropic step is undefined on the simplex boundary (zero coordinate)"
        )
    z = -alpha * g
    e = np.exp(z - np.max(z))
    w = x * e
    return w / np.sum(w)


def mirror_step_rows(mirror_map: MirrorMap, X, G, alpha: float) -> np.ndarray:
    """Row-wise mirror step; each row matches ``mirror_step`` bitwise."""
    if not alpha > 0:
        raise ValueError(f"step size must be positive, got {alpha}")
    X = np.asarray(X, dtype=float)
    G = np.asarray(G, dtype=float)
    if mirror_map.kind == EUCLIDEAN:
        return project_simplex_rows(X - alpha * G)
    if np.any(X <= 0.0):
        raise GeometryDomainError(
            "entropic step is undefined on the simplex boundary (zero coordinate)"
        )
    Z = -alpha * G
    E = np.exp(Z - np.max(Z, axis=1, keepdims=True))
    W = X * E
    return W / np.sum(W, axis=1, keepdims=True)


def is_feasible(x, tol: float = 1e-12) -> bool:
    """True when ``x`` is finite, nonnegative, and sums to 1 within ``tol``."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        return False
    return bool(np.all(x >= -tol) and abs(float(np.sum(x)) - 1.0) <= tol)


def interior_clamp(x, floor: float = INTERIOR_FLOOR) -> np.ndarray:
    """Lift boundary coordinates to ``floor`` and renormalize.

    Points already in the clamped interior are returned unchanged (same
    floats), so clamping is a no-op on generic interior inputs.
    """
    x = np.asarray(x, dtype=float)
    if np.all(x >= floor):
        return x
    w = np.maximum(x, floor)
    return w / np.sum(w)


def sample_simplex(dim: int, rng: np.random.Generator, size=None) -> np.ndarray:
    """Uniform (Dirichlet(1,...,1)) sample(s) from the unit simplex."""
    return rng.dirichlet(np.ones(dim), size=size)
