"""Shared oracles and fixture builders, independent of the code paths they check."""

from __future__ import annotations

import numpy as np

from oplocal import (
    Agent,
    GeneratedMonoid,
    Partition,
    StateSpace,
    Transform,
    closure,
    generated,
)
from oplocal.bitops import bit_partition, bit_space, flip_bit, set_bit

THREE_BITS = bit_space(3)
NOT1 = flip_bit(3, 1)
NOT2 = flip_bit(3, 2)
NOT3 = flip_bit(3, 3)

# the worked noncommuting pair: flip bit1 then clear bit3 / flip bits 2 and 3
SIDE_EFFECT_A = Transform(
    tuple(set_bit(3, 3, 0).table[NOT1.table[x]] for x in range(8)), "a"
)
SIDE_EFFECT_B = Transform(tuple(x ^ 0b011 for x in range(8)), "b")


def bob_agent() -> Agent:
    return Agent(bit_partition(3, [2]), generated(THREE_BITS, NOT2, name="bob_ops"), "bob")


def alice_agent() -> Agent:
    return Agent(bit_partition(3, [1]), generated(THREE_BITS, NOT1, name="alice_ops"), "alice")


def monoid(*gens: Transform, space: StateSpace = THREE_BITS, name: str = "") -> GeneratedMonoid:
    return generated(space, *gens, name=name)


def all_partitions(n: int):
    """Every partition of n states, via restricted growth strings."""

    def grow(prefix, max_used):
        if len(prefix) == n:
            yield Partition.from_class_of(prefix)
            return
        for c in range(max_used + 2):
            yield from grow(prefix + [c], max(max_used, c))

    yield from grow([0], 0)


def random_transform(rng: np.random.Generator, n: int, name: str = "") -> Transform:
    return Transform(tuple(int(v) for v in rng.integers(0, n, size=n)), name)


def random_monoid(
    rng: np.random.Generator, n: int, n_gens: int, name: str = "", prefix: str = "g"
) -> GeneratedMonoid:
    space = StateSpace(n)
    gens = tuple(random_transform(rng, n, f"{prefix}{i}") for i in range(n_gens))
    return GeneratedMonoid(space, gens, name=name)


def random_partition(rng: np.random.Generator, n: int, max_classes: int) -> Partition:
    return Partition.from_class_of(
        [int(v) for v in rng.integers(0, max_classes, size=n)]
    )


def induced_perspective_oracle(m: GeneratedMonoid, cap: int = 500) -> Partition:
    """Literal reading of the coarsest insensitive view, for cross-checking.

    Enumerates the monoid, relates states whose full-monoid images intersect,
    and takes the transitive closure by explicit breadth-first chains rather
    than union-find.
    """
    elements = closure(m, cap)
    n = m.space.size
    images = [frozenset(e.table[x] for e in elements) for x in range(n)]
    related = [
        [bool(images[x] & images[y]) for y in range(n)] for x in range(n)
    ]
    class_of = [-1] * n
    next_class = 0
    for start in range(n):
        if class_of[start] != -1:
            continue
        queue = [start]
        class_of[start] = next_class
        while queue:
            x = queue.pop(0)
            for y in range(n):
                if class_of[y] == -1 and related[x][y]:
                    class_of[y] = next_class
                    queue.append(y)
        next_class += 1
    return Partition.from_class_of(class_of)


def light_cone_oracle(n_cells: int, i: int, j: int, t_max: int):
    """First tick a bit-i flip reaches cell j under rule 150, by difference simulation.

    Simulates the propagation of the flipped-bit difference pattern directly
    on a cell array; linearity of the rule makes the difference evolution
    independent of the background state.
    """
    diff = [0] * (n_cells + 2)  # 1-indexed with zero boundary guards
    diff[i] = 1
    for t in range(t_max + 1):
        if diff[j]:
            return t
        diff = [0] + [
            diff[c - 1] ^ diff[c] ^ diff[c + 1] for c in range(1, n_cells + 1)
        ] + [0]
    return None


def bfs_hops_oracle(n: int, edges: list[tuple[int, int]]) -> np.ndarray:
    """Plain BFS all-pairs hop counts, kept independent of the library path."""
    neighbours = [set() for _ in range(n)]
    for u, v in edges:
        neighbours[u].add(v)
        neighbours[v].add(u)
    d = np.full((n, n), np.inf)
    for src in range(n):
        d[src, src] = 0
        frontier = [src]
        hops = 0
        while frontier:
            hops += 1
            nxt = []
            for u in frontier:
                for v in neighbours[u]:
                    if not np.isfinite(d[src, v]):
                        d[src, v] = hops
                        nxt.append(v)
            frontier = nxt
    return d


def unit_disk_fixture(n: int = 30, radius: float = 0.35, seed: int = 7):
    """The frozen sensor layout: points, undirected edges, adjacency list."""
    rng = np.random.default_rng(seed)
    points = rng.uniform(size=(n, 2))
    edges = [
        (u, v)
        for u in range(n)
        for v in range(u + 1, n)
        if np.linalg.norm(points[u] - points[v]) <= radius
    ]
    adjacency = [[] for _ in range(n)]
    for u, v in edges:
        adjacency[u].append(v)
    return points, edges, adjacency


def transform_channel(t: Transform):
    """Deterministic channel with the same action as a state transform."""
    from oplocal.gpt import Channel

    n = t.size
    m = np.zeros((n, n))
    for x, z in enumerate(t.table):
        m[z, x] = 1.0
    return Channel(m, t.name)


def evaluate_witness(witness, by_name: dict, perspective: Partition):
    """Re-run a witness chain; returns the class pair it reproduces."""
    state = witness.state
    baseline = witness.state
    drop = set(witness.secret_indices)
    for idx, name in enumerate(witness.chain):
        t = by_name[name]
        state = t.table[state]
        if idx not in drop:
            baseline = t.table[baseline]
    return perspective.class_of[state], perspective.class_of[baseline]
