"""Distance from signalling: first-signalling times and position recovery.

Under a one-tick dynamics, the first time at which one agent's actions
become visible to another defines a distance (time times signal speed).
Hop counts on a signalling graph play the same role for sensor-style
setups.  Coordinates are recovered by classical multidimensional scaling,
optionally polished by SMACOF stress majorization, and evaluated against
ground truth with a scaled orthogonal Procrustes alignment.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateMatrix, SizeMismatch
from .secrecy import Agent, check_extended_secrecy
from .statespace import DEFAULT_CAP, GeneratedMonoid, Transform, compose, identity

CLASSICAL_MDS = "classical_mds"
STRESS_MAJORIZATION = "stress_majorization"


@dataclass(frozen=True)
class DynamicsFamily:
    """Discrete time evolution: tick t is the t-fold composite of one step."""

    step: Transform
    name: str = ""

    def at(self, t: int) -> Transform:
        if t < 0:
            raise ValueError(f"time must be >= 0, got {t}")
        powers = self.__dict__.get("_powers")
        if powers is None:
            powers = [identity(self.step.size)]
            object.__setattr__(self, "_powers", powers)
        while len(powers) <= t:
            powers.append(compose(self.step, powers[-1]))
        return powers[t]


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric nonnegative matrix with zero diagonal; +inf marks no signalling."""

    d: np.ndarray
    units: str = "ticks"
    directed: Optional[np.ndarray] = None  # raw one-way times, NaN = never

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        d.setflags(write=False)
        object.__setattr__(self, "d", d)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError(f"distance matrix must be square, got {d.shape}")
        if np.abs(np.diag(d)).max() > 1e-9:
            raise ValueError("distance matrix diagonal must be zero")
        finite = np.isfinite(d)
        if np.any(d[finite] < 0):
            raise ValueError("distances must be nonnegative")
        if not (
            np.array_equal(finite, finite.T)
            and np.allclose(d[finite], d.T[finite], atol=1e-9)
        ):
            raise ValueError("distance matrix must be symmetric")

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.d).all())


@dataclass(frozen=True, eq=False)
class Embedding:
    coords: np.ndarray
    stress: float
    method: str
    alignment_rmse: Optional[float] = None
    negative_eigenvalues: tuple[float, ...] = ()

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        if c.ndim != 2:
            raise ValueError("coords must be an n x k array")
        n, k = c.shape
        if not 1 <= k <= max(n - 1, 1):
            raise ValueError(f"embedding dimension {k} outside [1, {n - 1}]")
        if self.stress < 0:
            raise ValueError("stress must be nonnegative")


def first_signalling_time(
    a_ops: GeneratedMonoid,
    b: Agent,
    dyn: DynamicsFamily,
    t_max: int,
    cap: int = DEFAULT_CAP,
) -> Optional[int]:
    """Smallest tick at which extended secrecy under the evolution breaks.

    Returns None when the actions stay invisible for every t <= t_max.
    """
    if t_max < 0:
        raise ValueError(f"t_max must be >= 0, got {t_max}")
    for t in range(t_max + 1):
        verdict = check_extended_secrecy(a_ops, b, dyn.at(t), cap=cap)
        if not verdict.holds:
            return t
    return None


def distance_matrix(
    agents: Sequence[tuple[GeneratedMonoid, Agent]],
    dyn: DynamicsFamily,
    t_max: int,
    speed: float = 1.0,
    cap: int = DEFAULT_CAP,
) -> DistanceMatrix:
    """Pairwise distances as speed times the earlier of the two one-way times.

    Pairs that cannot signal either way within t_max become +inf; they must
    be dropped before embedding (a warning is emitted here).
    """
    n = len(agents)
    if n < 2:
        raise ValueError("need at least two agents")
    directed = np.full((n, n), np.nan)
    for i, (ops_i, _) in enumerate(agents):
        for j, (_, agent_j) in enumerate(agents):
            if i == j:
                continue
            t = first_signalling_time(ops_i, agent_j, dyn, t_max, cap=cap)
            directed[i, j] = np.nan if t is None else t
    d = np.zeros((n, n))
    unreachable = []
    for i in range(n):
        for j in range(i + 1, n):
            times = [
                t for t in (directed[i, j], directed[j, i]) if not np.isnan(t)
            ]
            if not times:
                d[i, j] = d[j, i] = np.inf
                unreachable.append((i, j))
            else:
                d[i, j] = d[j, i] = speed * min(times)
    if unreachable:
        warnings.warn(
            f"no signalling within t_max={t_max} for pairs {unreachable}; "
            "exclude them before embedding",
            stacklevel=2,
        )
    return DistanceMatrix(d, units="ticks", directed=directed)


def hop_distances(adjacency: Sequence[Sequence[int]]) -> DistanceMatrix:
    """All-pairs shortest path lengths on an undirected graph, by BFS."""
    n = len(adjacency)
    neighbours = [set() for _ in range(n)]
    for u, nbrs in enumerate(adjacency):
        for v in nbrs:
            if not 0 <= v < n:
                raise ValueError(f"edge endpoint {v} outside [0, {n})")
            if u != v:
                neighbours[u].add(v)
                neighbours[v].add(u)
    d = np.full((n, n), np.inf)
    for src in range(n):
        d[src, src] = 0.0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v in neighbours[u]:
                if not np.isfinite(d[src, v]):
                    d[src, v] = d[src, u] + 1
                    queue.append(v)
    return DistanceMatrix(d, units="hops")


def _raw_stress(d: np.ndarray, coords: np.ndarray) -> float:
    delta = np.linalg.norm(coords[:, None, :] - coords[None, :, :], axis=2)
    iu = np.triu_indices(d.shape[0], k=1)
    return float(((d[iu] - delta[iu]) ** 2).sum())


def _classical_mds(d: np.ndarray, k: int) -> tuple[np.ndarray, tuple[float, ...]]:
    n = d.shape[0]
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * j @ (d**2) @ j
    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(-evals, kind="stable")
    evals, evecs = evals[order], evecs[:, order]
    negatives = tuple(float(v) for v in evals if v < 0)
    top = np.clip(evals[:k], 0.0, None)
    coords = evecs[:, :k] * np.sqrt(top)
    return coords, negatives


def _guttman(d: np.ndarray, coords: np.ndarray) -> np.ndarray:
    n = d.shape[0]
    delta = np.linalg.norm(coords[:, None, :] - coords[None, :, :], axis=2)
    ratio = np.where(delta > 0, d / np.where(delta > 0, delta, 1.0), 0.0)
    bmat = -ratio
    np.fill_diagonal(bmat, 0.0)
    np.fill_diagonal(bmat, -bmat.sum(axis=1))
    return (bmat @ coords) / n


def _smacof(
    d: np.ndarray,
    start: np.ndarray,
    max_iter: int = 500,
    rel_tol: float = 1e-9,
    trace: Optional[list[float]] = None,
) -> tuple[np.ndarray, float]:
    coords = start.copy()
    stress = _raw_stress(d, coords)
    if trace is not None:
        trace.append(stress)
    for _ in range(max_iter):
        new_coords = _guttman(d, coords)
        new_stress = _raw_stress(d, new_coords)
        if new_stress > stress:
            break  # numerical floor; keep the monotone iterate
        converged = stress > 0 and (stress - new_stress) / stress < rel_tol
        coords, stress = new_coords, new_stress
        if trace is not None:
            trace.append(stress)
        if converged or stress == 0.0:
            break
    return coords, stress


def embed(dm: DistanceMatrix, k: int, method: str = CLASSICAL_MDS) -> Embedding:
    """Recover coordinates from a finite distance matrix.

    classical_mds: double-center the squared distances and keep the top-k
    eigenpairs (negative eigenvalues are clipped to zero and reported).
    stress_majorization: SMACOF iterations seeded with the classical
    solution, stopping when the relative stress change drops below 1e-9 or
    after 500 iterations (stress is nonincreasing throughout).
    """
    if not dm.is_finite():
        raise ValueError(
            "distance matrix has unreachable (+inf) pairs; exclude them first"
        )
    if np.all(dm.d == 0):
        raise DegenerateMatrix("all distances are zero; no geometry to recover")
    if not 1 <= k <= dm.n - 1:
        raise ValueError(f"embedding dimension {k} outside [1, {dm.n - 1}]")
    coords, negatives = _classical_mds(dm.d, k)
    if method == CLASSICAL_MDS:
        return Embedding(coords, _raw_stress(dm.d, coords), method,
                         negative_eigenvalues=negatives)
    if method == STRESS_MAJORIZATION:
        coords, stress = _smacof(dm.d, coords)
        return Embedding(coords, stress, method, negative_eigenvalues=negatives)
    raise ValueError(f"unknown embedding method {method!r}")


def procrustes_rmse(embedding: Embedding | np.ndarray, truth: np.ndarray) -> float:
    """Residual after the best translation + rotation/reflection + uniform scale.

    Zero means the embedding is the ground truth up to a similarity
    transform; units are those of ``truth``.
    """
    coords = embedding.coords if isinstance(embedding, Embedding) else np.asarray(embedding, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if coords.shape != truth.shape:
        raise SizeMismatch(f"embedding shape {coords.shape} != truth shape {truth.shape}")
    xc = coords - coords.mean(axis=0)
    yc = truth - truth.mean(axis=0)
    norm_x = float((xc**2).sum())
    if norm_x == 0.0:
        aligned = np.zeros_like(yc)
    else:
        u, s, vt = np.linalg.svd(xc.T @ yc)
        rotation = u @ vt
        scale = float(s.sum()) / norm_x
        aligned = scale * xc @ rotation
    residual = aligned - yc
    return float(np.sqrt((residual**2).sum(axis=1).mean()))


def with_alignment(e: Embedding, truth: np.ndarray) -> Embedding:
    """Copy of the embedding with its Procrustes residual filled in."""
    return replace(e, alignment_rmse=procrustes_rmse(e, truth))
