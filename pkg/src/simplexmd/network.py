"""Communication graphs, Metropolis-Hastings mixing matrices, spectral checks."""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on nodes 0..n-1 (no self-loops stored)."""

    n: int
    edges: frozenset

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 nodes, got {self.n}")
        for e in self.edges:
            i, j = e
            if not (0 <= i < j < self.n):
                raise ValueError(f"bad edge {e}: expected 0 <= i < j < {self.n}")

    @property
    def m(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def neighbor_lists(self) -> list:
        nbrs = [[] for _ in range(self.n)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return nbrs


def is_connected(graph: Graph) -> bool:
    nbrs = graph.neighbor_lists()
    seen = np.zeros(graph.n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        u = stack.pop()
        for v in nbrs[u]:
            if not seen[v]:
                seen[v] = True
                stack.append(v)
    return bool(seen.all())


def _uniform_tree_edges(n: int, rng: np.random.Generator) -> list:
    """Uniform random labeled tree on n nodes via a random Prufer sequence."""
    if n == 2:
        return [(0, 1)]
    seq = [int(v) for v in rng.integers(0, n, size=n - 2)]
    degree = [1] * n
    for v in seq:
        degree[v] += 1
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    edges = []
    for v in seq:
        u = heapq.heappop(leaves)
        edges.append((min(u, v), max(u, v)))
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(leaves, v)
    u = heapq.heappop(leaves)
    w = heapq.heappop(leaves)
    edges.append((min(u, w), max(u, w)))
    return edges


def generate_graph(n: int, target_edges: int, seed: int) -> Graph:
    """Random connected graph with exactly ``target_edges`` edges.

    Samples a uniform spanning tree (Prufer), then adds distinct non-tree
    edges chosen uniformly at random until the requested count is reached.
    Deterministic per seed.
    """
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    max_edges = n * (n - 1) // 2
    if not n - 1 <= target_edges <= max_edges:
        raise ValueError(
            f"edge count {target_edges} infeasible for {n} nodes "
            f"(connected range is [{n - 1}, {max_edges}])"
        )
    rng = np.random.default_rng(seed)
    tree = set(_uniform_tree_edges(n, rng))
    extra = target_edges - (n - 1)
    chosen = set()
    if extra:
        candidates = [
            (i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in tree
        ]
        picks = rng.choice(len(candidates), size=extra, replace=False)
        chosen = {candidates[int(t)] for t in picks}
    return Graph(n, frozenset(tree | chosen))


@dataclass(frozen=True)
class MixingMatrix:
    """Doubly stochastic mixing weights with cached second singular value."""

    weights: np.ndarray
    sigma2: float

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def from_weights(cls, weights) -> "MixingMatrix":
        W = np.array(weights, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError(f"mixing weights must be square, got shape {W.shape}")
        if not np.all(np.isfinite(W)):
            raise ValueError("mixing weights must be finite")
        W.setflags(write=False)
        return cls(W, second_singular_value(W))


def metropolis_weights(graph: Graph) -> MixingMatrix:
    """Metropolis-Hastings weights: A_ij = 1/(1+max(deg_i, deg_j)) per edge,
    with the diagonal absorbing each row's remainder.

    The weights are exact rationals; each entry is rounded to the nearest
    double only once, so e.g. a diagonal of 2/3 equals the float literal 2/3.
    The result is symmetric and doubly stochastic, and for a connected graph
    it is irreducible with strictly positive diagonal (aperiodic).
    """
    if not is_connected(graph):
        raise ValueError("metropolis weights require a connected graph")
    deg = graph.degrees()
    n = graph.n
    W = np.zeros((n, n))
    diag = [Fraction(1)] * n
    for i, j in sorted(graph.edges):
        w = Fraction(1, 1 + int(max(deg[i], deg[j])))
        W[i, j] = W[j, i] = float(w)
        diag[i] -= w
        diag[j] -= w
    for i in range(n):
        W[i, i] = float(diag[i])
    return MixingMatrix.from_weights(W)


def second_singular_value(A, tol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Second-largest singular value of a doubly stochastic matrix.

    Deflates the known top singular pair (the normalized all-ones vector,
    singular value 1) by subtracting 11^T/n, then runs power iteration on the
    Gram matrix of the deflated part. Raises on non-convergence, reporting
    the achieved residual.
    """
    W = A.weights if isinstance(A, MixingMatrix) else np.asarray(A, dtype=float)
    n = W.shape[0]
    B = W - 1.0 / n
    lam, resid, converged, _v = _top_eigval_psd(B.T @ B, tol=tol, max_iter=max_iter)
    if not converged:
        raise RuntimeError(
            f"power iteration for sigma2 did not converge within {max_iter} "
            f"iterations (residual {resid:.3e}, tolerance {tol:.1e})"
        )
    return float(np.sqrt(max(lam, 0.0)))


def _top_eigval_psd(B, tol, max_iter, v0=None):
    """Largest eigenvalue of a symmetric PSD matrix by power iteration.

    Returns (eigenvalue, residual, converged, vector). For symmetric B the
    Rayleigh quotient rho = v'Bv with ||v|| = 1 satisfies
    |rho - lambda| <= ||Bv - rho v||, which is the stopping residual. Returns
    early when the iterate is annihilated (zero matrix after deflation).
    ``v0`` warm-starts the iteration.
    """
    n = B.shape[0]
    if v0 is None:
        v = np.random.default_rng(0).standard_normal(n)
    else:
        v = np.asarray(v0, dtype=float).copy()
    v /= np.linalg.norm(v)
    lam = 0.0
    resid = np.inf
    for _ in range(max_iter):
        w = B @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0, 0.0, True, v
        lam = float(v @ w)
        # direct residual; the norm identity ||Bv||^2 - lam^2 cancels badly
        resid = float(np.linalg.norm(w - lam * v))
        if resid <= tol * max(1.0, lam):
            return lam, resid, True, v
        v = w / nw
    return lam, resid, False, v


@dataclass(frozen=True)
class AssumptionReport:
    """Structural and spectral checks a mixing matrix must pass."""

    doubly_stochastic: bool
    symmetric: bool
    irreducible: bool
    aperiodic: bool
    contractive: bool
    sigma2: float

    @property
    def all_ok(self) -> bool:
        return (
            self.doubly_stochastic
            and self.symmetric
            and self.irreducible
            and self.aperiodic
            and self.contractive
        )

    def __str__(self) -> str:
        def yn(b):
            return "yes" if b else "NO"

        return (
            f"doubly stochastic: {yn(self.doubly_stochastic)}\n"
            f"symmetric:         {yn(self.symmetric)}\n"
            f"irreducible:       {yn(self.irreducible)}\n"
            f"aperiodic:         {yn(self.aperiodic)}\n"
            f"sigma2 < 1:        {yn(self.contractive)} (sigma2 = {self.sigma2:.17g})"
        )


def _strongly_connected(P: np.ndarray) -> bool:
    n = P.shape[0]
    for adj in (P, P.T):
        seen = np.zeros(n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            u = stack.pop()
            for v in np.nonzero(adj[u])[0]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(int(v))
        if not seen.all():
            return False
    return True


def verify_assumptions(A, tol: float = 1e-12) -> AssumptionReport:
    """Report whether a matrix qualifies as a consensus mixing matrix.

    Checks: row and column sums equal 1 and entries nonnegative (within
    ``tol``), symmetry, irreducibility (strong connectivity of the positive
    pattern), aperiodicity via the sufficient condition of a positive
    diagonal entry, and sigma2 < 1. Report-only; the distributed solver
    refuses matrices that fail any check.
    """
    W = A.weights if isinstance(A, MixingMatrix) else np.asarray(A, dtype=float)
    n = W.shape[0]
    ds = bool(
        np.all(W >= -tol)
        and np.max(np.abs(W.sum(axis=1) - 1.0)) <= tol
        and np.max(np.abs(W.sum(axis=0) - 1.0)) <= tol
    )
    sym = bool(np.max(np.abs(W - W.T)) <= tol)
    irr = _strongly_connected(W > 0.0)
    aper = bool(np.any(np.diag(W) > 0.0))
    sigma2 = A.sigma2 if isinstance(A, MixingMatrix) else second_singular_value(W)
    return AssumptionReport(
        doubly_stochastic=ds,
        symmetric=sym,
        irreducible=irr,
        aperiodic=aper,
        contractive=bool(sigma2 < 1.0),
        sigma2=float(sigma2),
    )


def save_graph(graph: Graph, path) -> None:
    """Write edge-list text: first line "n m", then one "i j" line per edge."""
    lines = [f"{graph.n} {graph.m}"]
    lines.extend(f"{i} {j}" for i, j in sorted(graph.edges))
    Path(path).write_text("\n".join(lines) + "\n")


def load_graph(path) -> Graph:
    """Read a graph written by ``save_graph``; the graph must be connected."""
    raw = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not raw:
        raise ValueError(f"{path}: empty graph file")
    head = raw[0].split()
    if len(head) != 2:
        raise ValueError(f"{path}:1: expected 'n m', got {raw[0]!r}")
    n, m = int(head[0]), int(head[1])
    if len(raw) != m + 1:
        raise ValueError(f"{path}: expected {m} edge lines, got {len(raw) - 1}")
    edges = set()
    for ln_no, ln in enumerate(raw[1:], start=2):
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{ln_no}: expected 'i j', got {ln!r}")
        i, j = int(parts[0]), int(parts[1])
        if i == j:
            raise ValueError(f"{path}:{ln_no}: self-loop {i}")
        edges.add((min(i, j), max(i, j)))
    if len(edges) != m:
        raise ValueError(f"{path}: duplicate edges (got {len(edges)}, declared {m})")
    g = Graph(n, frozenset(edges))
    if not is_connected(g):
        raise ValueError(f"{path}: graph is not connected")
    return g


def save_matrix(A, path) -> None:
    """Write mixing weights as n lines of n decimals (17 significant digits)."""
    W = A.weights if isinstance(A, MixingMatrix) else np.asarray(A, dtype=float)
    lines = [" ".join(f"{v:.17g}" for v in row) for row in W]
    Path(path).write_text("\n".join(lines) + "\n")


def load_matrix(path) -> MixingMatrix:
    """Read weights written by ``save_matrix``."""
    rows = []
    for ln in Path(path).read_text().splitlines():
        if ln.strip():
            rows.append([float(t) for t in ln.split()])
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError(f"{path}: matrix is not square")
    return MixingMatrix.from_weights(np.array(rows))
