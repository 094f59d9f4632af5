"""Constructing agents from transformations alone.

Given only a monoid of actions, the coarsest view that cannot see them is
the transitive closure of "some action images coincide".  For commuting
monoids this hands back mutually secret agents for free; without
commutation a heavier fixpoint-style construction over the other agent's
monoid is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    CapExceeded,
    InvariantViolation,
    NotCommuting,
    PreconditionFailed,
    SizeMismatch,
)
from .partitions import Partition, UnionFind, factor, refines
from .secrecy import (
    Agent,
    check_extended_secrecy,
    check_secrecy,
    is_congruence,
)
from .statespace import (
    DEFAULT_CAP,
    GeneratedMonoid,
    Transform,
    check_commute,
    closure,
    orbit,
)

METHOD_WEAK_COMPONENTS = "weak_components"
METHOD_FIXPOINT_GENERAL = "fixpoint_general"


@dataclass(frozen=True)
class InducedPerspective:
    """A perspective insensitive to a monoid of actions, plus how it was built."""

    partition: Partition
    source_ops: GeneratedMonoid
    method: str

    def __post_init__(self):
        cls = self.partition.arr
        for g in self.source_ops.generators:
            if not np.array_equal(cls[g.arr], cls):
                raise InvariantViolation(
                    f"induced perspective distinguishes x from {g.name or 'g'}(x)"
                )


def induced_perspective(ops: GeneratedMonoid) -> InducedPerspective:
    """The coarsest-by-construction view that cannot detect ``ops``.

    Computed as the weakly connected components of the union of the
    generators' functional graphs (edges x — g(x)): each edge witnesses the
    convergence relation with one side the identity, and conversely states
    with intersecting orbits share a weak component.  This replaces monoid
    enumeration with an O(|states| * |generators|) union-find pass.
    """
    uf = UnionFind(ops.space.size)
    for g in ops.generators:
        for x, y in enumerate(g.table):
            uf.union(x, y)
    return InducedPerspective(uf.to_partition(), ops, METHOD_WEAK_COMPONENTS)


def derive_secret_agents(
    ta: GeneratedMonoid,
    tb: GeneratedMonoid,
    cap: int = DEFAULT_CAP,
    verify: bool = True,
) -> tuple[Agent, Agent]:
    """Turn two commuting monoids into mutually secret agents.

    Each agent is blinded by the view insensitive to the *other* agent's
    actions.  When ``verify`` is set, both secrecy directions are re-checked
    exhaustively provided the closures fit the cap.
    """
    comm = check_commute(ta, tb)
    if not comm:
        raise NotCommuting(comm.witness)
    agent_a = Agent(induced_perspective(tb).partition, ta, name=ta.name or "A")
    agent_b = Agent(induced_perspective(ta).partition, tb, name=tb.name or "B")
    if verify:
        for ops, towards in ((ta, agent_b), (tb, agent_a)):
            try:
                verdict = check_secrecy(ops, towards, cap=cap, exhaustive=True)
            except CapExceeded:
                continue
            if not verdict.holds:
                raise InvariantViolation(
                    f"derived agents are not mutually secret: {verdict.witness}"
                )
    return agent_a, agent_b


@dataclass(frozen=True)
class MinimalityResult:
    holds: bool
    induced: Partition
    factor: Partition

    def __bool__(self):
        return self.holds


def check_minimality(b: Agent, ta: GeneratedMonoid, cap: int = DEFAULT_CAP) -> MinimalityResult:
    """Check that the induced perspective refines any legitimate agent's view.

    Preconditions: ``ta`` secret towards ``b`` and the two ops commuting.
    The agent's effective space then factors through the induced one; the
    factoring partition is returned alongside the verdict.
    """
    verdict = check_secrecy(ta, b, cap=cap)
    if not verdict.holds:
        raise PreconditionFailed(
            f"ops are not secret towards {b.name or 'the agent'}: {verdict.witness}"
        )
    comm = check_commute(ta, b.ops)
    if not comm:
        raise PreconditionFailed(f"ops do not commute with the agent's: {comm.witness}")
    induced = induced_perspective(ta).partition
    if not refines(induced, b.perspective):
        raise InvariantViolation(
            "induced perspective fails to refine a secret commuting agent's view"
        )
    return MinimalityResult(True, induced, factor(induced, b.perspective))


def check_operationality(ta: GeneratedMonoid, tb: GeneratedMonoid) -> bool:
    """Check that commuting actions preserve the induced classes.

    Under the commutation precondition this is guaranteed to hold; a False
    outcome is reported as an InvariantViolation rather than returned.
    """
    comm = check_commute(ta, tb)
    if not comm:
        raise NotCommuting(comm.witness)
    if not is_congruence(induced_perspective(ta).partition, tb):
        raise InvariantViolation(
            "commuting ops moved states across induced-perspective classes"
        )
    return True


@dataclass(frozen=True)
class PerceivedCommutation:
    holds: bool
    mode: str
    witness: Optional[tuple[str, str, int, int, int]] = None

    def __bool__(self):
        return self.holds


def perceived_commutation(
    ta: GeneratedMonoid,
    tb: GeneratedMonoid,
    p: Partition,
    cap: int = DEFAULT_CAP,
) -> PerceivedCommutation:
    """Do the two monoids commute as seen through the partition ``p``?

    A generator-level check extends to the full monoids only when ``p`` is a
    congruence for both; otherwise both closures are enumerated.  The
    witness is (f name, g name, state, class of f∘g(x), class of g∘f(x)).
    """
    if ta.space.size != tb.space.size or p.size != ta.space.size:
        raise SizeMismatch("perceived commutation needs one shared state space")
    if is_congruence(p, ta) and is_congruence(p, tb):
        fs, gs, mode = ta.generators, tb.generators, "generator_congruence"
    else:
        fs, gs, mode = closure(ta, cap), closure(tb, cap), "exhaustive"
    cls = p.arr
    for f in fs:
        for g in gs:
            fg = cls[f.arr[g.arr]]
            gf = cls[g.arr[f.arr]]
            bad = np.nonzero(fg != gf)[0]
            if bad.size:
                x = int(bad[0])
                return PerceivedCommutation(
                    False, mode, (f.name, g.name, x, int(fg[x]), int(gf[x]))
                )
    return PerceivedCommutation(True, mode)


def derive_secret_general(
    secret_ops: GeneratedMonoid,
    tb: GeneratedMonoid,
    f: Optional[Transform] = None,
    cap: int = DEFAULT_CAP,
    verify: bool = True,
) -> InducedPerspective:
    """Smallest view towards which ``secret_ops`` stays secret, no commutation needed.

    Construction: relate states whose orbits under the secret ops intersect;
    push every related pair through every element of the other agent's
    monoid (and through every f_B∘f∘f'_B sandwich when ``f`` is given); take
    the transitive closure.  Exactly one merge round is performed, as the
    underlying statement prescribes; the post-verification re-checks the
    resulting extended secrecy and raises InvariantViolation on failure
    instead of silently iterating further.
    """
    if secret_ops.space.size != tb.space.size:
        raise SizeMismatch("secret ops and agent ops act on different spaces")
    n = secret_ops.space.size
    elements = closure(tb, cap)

    orbits = [orbit(x, secret_ops) for x in range(n)]
    pairs = [
        (r, s)
        for r in range(n)
        for s in range(r + 1, n)
        if orbits[r] & orbits[s]
    ]

    uf = UnionFind(n)
    for r, s in pairs:
        uf.union(r, s)
    images = [e.arr for e in elements]
    for img in images:
        for r, s in pairs:
            uf.union(int(img[r]), int(img[s]))
    if f is not None:
        for outer in elements:
            pre = outer.arr[f.arr]
            for inner in elements:
                sandwich = pre[inner.arr]
                for r, s in pairs:
                    uf.union(int(sandwich[r]), int(sandwich[s]))

    result = InducedPerspective(uf.to_partition(), secret_ops, METHOD_FIXPOINT_GENERAL)
    if verify:
        verdict = check_extended_secrecy(
            secret_ops, Agent(result.partition, tb), f, cap=cap
        )
        if not verdict.holds:
            raise InvariantViolation(
                "one merge round left a detectable action (research finding, "
                f"not auto-repaired): {verdict.witness}"
            )
    return result
