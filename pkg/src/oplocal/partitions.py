"""Equivalence relations on a finite state space, as canonical partitions.

A partition doubles as the effective (quotient) state space and its
canonical reduction map: ``class_of[x]`` is both the class of ``x`` and the
index of the quotient state it reduces to.  Classes are numbered by first
occurrence, so two partitions are equal iff their arrays are equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import IndexOutOfRange, NotRefinement, SizeMismatch


def _canonicalize(seq: Sequence[int]) -> tuple[tuple[int, ...], int]:
    remap: dict[int, int] = {}
    out = []
    for c in seq:
        if c not in remap:
            remap[c] = len(remap)
        out.append(remap[c])
    return tuple(out), len(remap)


@dataclass(frozen=True, eq=False)
class Partition:
    """Canonical class-index array over ``len(class_of)`` states."""

    class_of: tuple[int, ...]
    num_classes: int
    class_labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        canon, k = _canonicalize(self.class_of)
        if canon != self.class_of or k != self.num_classes:
            raise ValueError(
                "partition not in canonical first-occurrence form; "
                "build it with from_class_of/from_classes"
            )
        if self.class_labels is not None and len(self.class_labels) != k:
            raise ValueError(
                f"expected {k} class labels, got {len(self.class_labels)}"
            )

    @classmethod
    def from_class_of(cls, seq: Sequence[int], class_labels=None) -> "Partition":
        canon, k = _canonicalize(seq)
        return cls(canon, k, tuple(class_labels) if class_labels else None)

    @classmethod
    def from_classes(cls, size: int, classes: Iterable[Iterable[int]]) -> "Partition":
        """Build from an explicit class list; classes must tile 0..size-1."""
        class_of = [-1] * size
        for ci, members in enumerate(classes):
            for x in members:
                if not 0 <= x < size:
                    raise IndexOutOfRange(f"state {x} outside [0, {size})")
                if class_of[x] != -1:
                    raise ValueError(f"state {x} listed in two classes")
                class_of[x] = ci
        missing = [x for x, c in enumerate(class_of) if c == -1]
        if missing:
            raise ValueError(f"states not covered by any class: {missing[:8]}")
        return cls.from_class_of(class_of)

    @property
    def size(self) -> int:
        return len(self.class_of)

    @property
    def arr(self) -> np.ndarray:
        cached = self.__dict__.get("_arr")
        if cached is None:
            cached = np.asarray(self.class_of, dtype=np.intp)
            cached.setflags(write=False)
            object.__setattr__(self, "_arr", cached)
        return cached

    def classes(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.num_classes)]
        for x, c in enumerate(self.class_of):
            out[c].append(x)
        return out

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.class_of == other.class_of

    def __hash__(self):
        return hash(self.class_of)

    def __repr__(self):
        return f"Partition({self.num_classes} classes over {self.size} states)"


def discrete(size: int) -> Partition:
    """All singletons: the finest partition."""
    return Partition.from_class_of(range(size))


def trivial(size: int) -> Partition:
    """One class: the coarsest partition."""
    return Partition.from_class_of([0] * size)


def reduce(p: Partition, x: int) -> int:
    """The canonical map: send a global state to its quotient class."""
    if not 0 <= x < p.size:
        raise IndexOutOfRange(f"state {x} outside [0, {p.size})")
    return p.class_of[x]


def _check_sizes(p: Partition, q: Partition) -> None:
    if p.size != q.size:
        raise SizeMismatch(f"partitions over {p.size} vs {q.size} states")


def refines(p: Partition, q: Partition) -> bool:
    """True iff every p-class lies inside a single q-class."""
    _check_sizes(p, q)
    seen: dict[int, int] = {}
    for pc, qc in zip(p.class_of, q.class_of):
        if seen.setdefault(pc, qc) != qc:
            return False
    return True


def factor(p: Partition, q: Partition) -> Partition:
    """The quotient relation identifying p-classes that share a q-class.

    Requires ``refines(p, q)``.  Satisfies, for every state x,
    ``reduce(factor(p, q), reduce(p, x)) == reduce(q, x)``; its class count
    equals ``q.num_classes``.
    """
    _check_sizes(p, q)
    table = [-1] * p.num_classes
    for pc, qc in zip(p.class_of, q.class_of):
        if table[pc] == -1:
            table[pc] = qc
        elif table[pc] != qc:
            raise NotRefinement(
                f"class {pc} of the finer partition straddles classes "
                f"{table[pc]} and {qc} of the coarser one"
            )
    # Scanning p-classes in index order visits q-classes in canonical order,
    # so the table is already canonical.
    return Partition(tuple(table), q.num_classes)


def meet(p: Partition, q: Partition) -> Partition:
    """Coarsest common refinement: classwise intersection."""
    _check_sizes(p, q)
    return Partition.from_class_of(
        [pc * q.num_classes + qc for pc, qc in zip(p.class_of, q.class_of)]
    )


def join(p: Partition, q: Partition) -> Partition:
    """Finest common coarsening: transitive closure of the union relation."""
    _check_sizes(p, q)
    uf = UnionFind(p.size)
    for part in (p, q):
        first: dict[int, int] = {}
        for x, c in enumerate(part.class_of):
            if c in first:
                uf.union(first[c], x)
            else:
                first[c] = x
    return uf.to_partition()


class UnionFind:
    """Union-find with path compression; the workhorse for transitive closures."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            # deterministic: lower root wins, for reproducible class numbering
            if ry < rx:
                rx, ry = ry, rx
            self.parent[ry] = rx

    def to_partition(self) -> Partition:
        return Partition.from_class_of([self.find(x) for x in range(len(self.parent))])
