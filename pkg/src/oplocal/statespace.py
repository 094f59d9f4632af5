"""Finite state spaces, transformations as function tables, and generated monoids.

States are plain integer indices ``0 .. size-1``; any bit-string or label
semantics is a presentation concern of callers.  Transformations are total
functions stored as index tables, so extensional equality is table equality
and composition is table lookup.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CapExceeded, IndexOutOfRange, SizeMismatch

#: Default ceiling for materializing a generated monoid.  Full transformation
#: monoids blow up combinatorially (8^8 already for three bits); overflowing
#: the cap is an error, never silent truncation.
DEFAULT_CAP = 100_000


@dataclass(frozen=True)
class StateSpace:
    """A finite set of states, optionally labelled."""

    size: int
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"state space must be nonempty, got size={self.size}")
        if self.labels is not None:
            if len(self.labels) != self.size:
                raise ValueError(
                    f"expected {self.size} labels, got {len(self.labels)}"
                )
            if len(set(self.labels)) != len(self.labels):
                raise ValueError("state labels must be pairwise distinct")

    def label(self, x: int) -> str:
        return self.labels[x] if self.labels is not None else str(x)

    def check_state(self, x: int) -> None:
        if not 0 <= x < self.size:
            raise IndexOutOfRange(f"state {x} outside [0, {self.size})")


@dataclass(frozen=True, eq=False)
class Transform:
    """A total function on a state space, as an index table.

    ``table[i]`` is the image of state ``i``.  Equality and hashing are
    extensional (table only); ``name`` is presentation metadata.
    """

    table: tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        n = len(self.table)
        if n == 0:
            raise ValueError("empty transform table")
        for v in self.table:
            if not 0 <= v < n:
                raise ValueError(f"table entry {v} outside [0, {n})")

    @property
    def size(self) -> int:
        return len(self.table)

    @property
    def arr(self) -> np.ndarray:
        """Read-only numpy view of the table (cached)."""
        cached = self.__dict__.get("_arr")
        if cached is None:
            cached = np.asarray(self.table, dtype=np.intp)
            cached.setflags(write=False)
            object.__setattr__(self, "_arr", cached)
        return cached

    def __call__(self, x: int) -> int:
        return self.table[x]

    def __eq__(self, other):
        if not isinstance(other, Transform):
            return NotImplemented
        return self.table == other.table

    def __hash__(self):
        return hash(self.table)

    def __repr__(self):
        shown = self.name or f"table={list(self.table[:8])}{'...' if self.size > 8 else ''}"
        return f"Transform({shown}, size={self.size})"


def identity(size: int) -> Transform:
    return Transform(tuple(range(size)), "id")


def compose(f: Transform, g: Transform) -> Transform:
    """Concatenation f∘g: apply ``g`` first, then ``f``."""
    if f.size != g.size:
        raise SizeMismatch(f"compose: tables of size {f.size} vs {g.size}")
    table = tuple(f.arr[g.arr].tolist())
    if f.name and g.name:
        name = f"{f.name}∘{g.name}"
    else:
        name = f.name or g.name
    return Transform(table, name)


@dataclass(frozen=True, eq=False)
class GeneratedMonoid:
    """A submonoid of all transformations, given by generators.

    The identity is always a member and need not be listed.  The element set
    is only materialized on demand (see :func:`closure`), since it may be
    astronomically larger than the generator list.
    """

    space: StateSpace
    generators: tuple[Transform, ...]
    name: str = ""

    def __post_init__(self):
        for g in self.generators:
            if g.size != self.space.size:
                raise SizeMismatch(
                    f"generator {g.name or g!r} acts on {g.size} states, "
                    f"space has {self.space.size}"
                )

    @property
    def size(self) -> int:
        return self.space.size


def generated(space: StateSpace, *gens: Transform, name: str = "") -> GeneratedMonoid:
    return GeneratedMonoid(space, tuple(gens), name=name)


def _closure_levels(m: GeneratedMonoid, cap: int) -> list[list[Transform]]:
    """Breadth-first closure grouped by word length (level 0 = identity).

    Deduplicates by table, so each distinct function appears once, at its
    shortest word length; caches the completed result on the monoid.
    """
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    cached = m.__dict__.get("_levels")
    if cached is not None:
        total = sum(len(level) for level in cached)
        if total > cap:
            raise CapExceeded(total, cap)
        return cached

    ident = identity(m.space.size)
    seen = {ident.table}
    levels: list[list[Transform]] = [[ident]]
    frontier = []
    for g in m.generators:
        if g.table not in seen:
            seen.add(g.table)
            frontier.append(g)
            if len(seen) > cap:
                raise CapExceeded(len(seen), cap)
    while frontier:
        levels.append(frontier)
        new = []
        for w in frontier:
            for g in m.generators:
                h = compose(g, w)
                if h.table not in seen:
                    seen.add(h.table)
                    new.append(h)
                    if len(seen) > cap:
                        raise CapExceeded(len(seen), cap)
        frontier = new
    object.__setattr__(m, "_levels", levels)
    return levels


def closure(m: GeneratedMonoid, cap: int = DEFAULT_CAP) -> list[Transform]:
    """Materialize the generated monoid, in breadth-first (shortest-word) order.

    Raises :class:`CapExceeded` as soon as the element count passes ``cap``,
    signalling that the caller must fall back to generator- or orbit-based
    algorithms.
    """
    return [t for level in _closure_levels(m, cap) for t in level]


def orbit(x: int, m: GeneratedMonoid) -> frozenset[int]:
    """Forward-reachability closure of ``x`` under the generators.

    Equals the image of ``x`` under every element of the generated monoid,
    without enumerating the monoid.
    """
    m.space.check_state(x)
    seen = {x}
    stack = [x]
    while stack:
        y = stack.pop()
        for g in m.generators:
            z = g.table[y]
            if z not in seen:
                seen.add(z)
                stack.append(z)
    return frozenset(seen)


@dataclass(frozen=True)
class CommuteWitness:
    f_name: str
    g_name: str
    state: int
    fg_state: int
    gf_state: int

    def __str__(self):
        return (
            f"{self.f_name}∘{self.g_name}({self.state}) = {self.fg_state} but "
            f"{self.g_name}∘{self.f_name}({self.state}) = {self.gf_state}"
        )


@dataclass(frozen=True)
class CommutationResult:
    commutes: bool
    witness: Optional[CommuteWitness] = None

    def __bool__(self):
        return self.commutes


def check_commute(ma: GeneratedMonoid, mb: GeneratedMonoid) -> CommutationResult:
    """Decide whether the two generated monoids commute elementwise.

    Checking generator pairs suffices: pairwise-commuting generators extend
    to commuting products by associativity.  On failure, returns the first
    witness in (ma generator, mb generator, state) order.
    """
    if ma.space.size != mb.space.size:
        raise SizeMismatch(
            f"commute: spaces of size {ma.space.size} vs {mb.space.size}"
        )
    for i, f in enumerate(ma.generators):
        for j, g in enumerate(mb.generators):
            fg = f.arr[g.arr]
            gf = g.arr[f.arr]
            bad = np.nonzero(fg != gf)[0]
            if bad.size:
                x = int(bad[0])
                witness = CommuteWitness(
                    f.name or f"a{i}", g.name or f"b{j}", x, int(fg[x]), int(gf[x])
                )
                return CommutationResult(False, witness)
    return CommutationResult(True)


def elements_up_to_depth(m: GeneratedMonoid, max_depth: int) -> list[list[Transform]]:
    """Distinct monoid elements reachable by words of length <= max_depth.

    Level ``d`` holds the functions whose shortest word has length ``d``.
    No cap is needed: the element count is bounded by the words enumerated.
    """
    if max_depth < 0:
        raise ValueError(f"max_depth must be >= 0, got {max_depth}")
    ident = identity(m.space.size)
    seen = {ident.table}
    levels = [[ident]]
    frontier = [ident]
    for _ in range(max_depth):
        new = []
        for w in frontier:
            for g in m.generators:
                h = compose(g, w)
                if h.table not in seen:
                    seen.add(h.table)
                    new.append(h)
        if not new:
            break
        levels.append(new)
        frontier = new
    return levels


def contains(m: GeneratedMonoid, t: Transform, cap: int = DEFAULT_CAP) -> bool:
    """Membership test by closure enumeration."""
    tables = {e.table for e in closure(m, cap)}
    return t.table in tables


def power(t: Transform, k: int) -> Transform:
    """k-fold self-composition (k >= 0)."""
    if k < 0:
        raise ValueError("negative power of a (possibly non-invertible) transform")
    out = identity(t.size)
    for _ in range(k):
        out = compose(t, out)
    return out
