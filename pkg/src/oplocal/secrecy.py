"""Agents and the secrecy decision procedures.

An agent pairs an indistinguishability partition with a submonoid of
actions.  Secrecy of a set of actions towards an agent means the agent's
quotient view cannot detect whether an action was applied, no matter how it
post-processes.

Quantifier economy (proved in the tests, exploited here):

* The secret side reduces to generators: operations individually secret
  (also in the presence of a global transform) compose to secret
  operations, so a generated monoid is secret iff its generators are.
* The agent's *outer* post-processing reduces to generators exactly when
  its perspective is a congruence for its ops (equivalent states map to
  equivalent states); then a single invisibility pass propagates along any
  word.  Without that certificate the full monoid is enumerated, with a
  cap.
* No reduction is known for the *inner* post-processing slot of the
  extended check; it always ranges over the enumerated monoid.
"""

from __future__ import annotations

import itertools
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
from .partitions import Partition, refines
from .statespace import (
    DEFAULT_CAP,
    GeneratedMonoid,
    Transform,
    _closure_levels,
    check_commute,
    closure,
    elements_up_to_depth,
    identity,
)

MODE_EXHAUSTIVE = "exhaustive"
MODE_CONGRUENCE = "generator_congruence"
MODE_RANDOMIZED = "randomized"


@dataclass(frozen=True)
class Agent:
    """A restricted agent: what it can tell apart, and what it can do."""

    perspective: Partition
    ops: GeneratedMonoid
    name: str = ""

    def __post_init__(self):
        if self.perspective.size != self.ops.space.size:
            raise SizeMismatch(
                f"perspective over {self.perspective.size} states, "
                f"ops over {self.ops.space.size}"
            )

    @property
    def size(self) -> int:
        return self.ops.space.size


@dataclass(frozen=True)
class Witness:
    """A reproducible counterexample chain.

    ``chain`` lists transform names in application order (first applied
    first); removing the entries at ``secret_indices`` yields the baseline
    side.  ``class_lhs``/``class_rhs`` are the differing quotient classes the
    two sides reach from ``state``.
    """

    chain: tuple[str, ...]
    secret_indices: tuple[int, ...]
    state: int
    class_lhs: int
    class_rhs: int

    def baseline(self) -> tuple[str, ...]:
        drop = set(self.secret_indices)
        return tuple(n for i, n in enumerate(self.chain) if i not in drop)

    def to_json(self) -> dict:
        return {
            "chain": list(self.chain),
            "state": self.state,
            "class_lhs": self.class_lhs,
            "class_rhs": self.class_rhs,
        }


@dataclass(frozen=True)
class SecrecyVerdict:
    holds: bool
    mode: str
    witness: Optional[Witness] = None
    chains_checked: Optional[int] = None  # set by the robustness suite only

    def __post_init__(self):
        if not self.holds and self.witness is None:
            raise ValueError("failing verdict requires a witness")

    def __bool__(self):
        return self.holds

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "mode": self.mode,
            "witness": self.witness.to_json() if self.witness else None,
        }


def is_congruence(p: Partition, m: GeneratedMonoid) -> bool:
    """True iff every generator maps p-equivalent states to p-equivalent states.

    The full monoid then preserves p too, by induction on words.
    """
    if p.size != m.space.size:
        raise SizeMismatch(f"partition over {p.size} states, ops over {m.space.size}")
    cls = p.arr
    rep = np.empty(p.num_classes, dtype=np.intp)
    for g in m.generators:
        img = cls[g.arr]
        # congruence per generator <=> image class constant on every class
        rep[cls] = img
        if not np.array_equal(rep[cls], img):
            return False
    return True


def _require_shared_space(a: GeneratedMonoid, b: Agent) -> None:
    if a.space.size != b.size:
        raise SizeMismatch(
            f"secret ops over {a.space.size} states, agent over {b.size}"
        )


def _outer_elements(
    b: Agent, cap: int, exhaustive: Optional[bool]
) -> tuple[list[tuple[Transform, int]], str]:
    """The (element, word-length) list the outer f_B quantifier runs over."""
    if exhaustive is not True and is_congruence(b.perspective, b.ops):
        elems = [(identity(b.size), 0)]
        elems += [(g, 1) for g in b.ops.generators]
        return elems, MODE_CONGRUENCE
    levels = _closure_levels(b.ops, cap)
    return [(t, d) for d, level in enumerate(levels) for t in level], MODE_EXHAUSTIVE


def check_secrecy(
    secret_ops: GeneratedMonoid,
    b: Agent,
    cap: int = DEFAULT_CAP,
    exhaustive: Optional[bool] = None,
) -> SecrecyVerdict:
    """Decide whether every action in ``secret_ops`` is invisible to ``b``.

    The condition: for all states x, secret g, post-processing f_B of the
    agent, f_B(g(x)) and f_B(x) share a perspective class.  ``exhaustive``
    forces (True) or forbids (False is meaningless; None = auto) the closure
    enumeration for f_B even when the congruence shortcut applies.
    """
    _require_shared_space(secret_ops, b)
    if not secret_ops.generators:
        return SecrecyVerdict(True, MODE_EXHAUSTIVE)  # only the identity: vacuous
    posts, mode = _outer_elements(b, cap, exhaustive)
    cls = b.perspective.arr
    for f_b, _depth in posts:
        base = cls[f_b.arr]
        for g in secret_ops.generators:
            lhs = base[g.arr]
            bad = np.nonzero(lhs != base)[0]
            if bad.size:
                x = int(bad[0])
                witness = Witness(
                    chain=(g.name, f_b.name),
                    secret_indices=(0,),
                    state=x,
                    class_lhs=int(lhs[x]),
                    class_rhs=int(base[x]),
                )
                return SecrecyVerdict(False, mode, witness)
    return SecrecyVerdict(True, mode)


def _extended_pairs(outer, inner):
    """(f_B, f'_B) pairs ordered by combined word length, shortest first."""
    outer_levels: dict[int, list[Transform]] = {}
    inner_levels: dict[int, list[Transform]] = {}
    for t, d in outer:
        outer_levels.setdefault(d, []).append(t)
    for t, d in inner:
        inner_levels.setdefault(d, []).append(t)
    for total in range(max(outer_levels) + max(inner_levels) + 1):
        for outer_depth in range(total + 1):
            for f_b in outer_levels.get(outer_depth, ()):
                for f_b_inner in inner_levels.get(total - outer_depth, ()):
                    yield f_b, f_b_inner


def check_extended_secrecy(
    secret_ops: GeneratedMonoid,
    b: Agent,
    f: Optional[Transform],
    cap: int = DEFAULT_CAP,
    exhaustive: Optional[bool] = None,
) -> SecrecyVerdict:
    """Decide secrecy in the presence of a global transform ``f``.

    Condition: f_B∘f∘f'_B∘g(x) and f_B∘f∘f'_B(x) share a class for all
    states x, secret generators g, and agent post-processing f_B (outer) and
    f'_B (inner).  The inner slot always ranges over the enumerated monoid;
    with ``f`` the identity the verdict coincides with :func:`check_secrecy`.
    """
    _require_shared_space(secret_ops, b)
    if f is None:
        f = identity(b.size)
    elif f.size != b.size:
        raise SizeMismatch(f"global transform over {f.size} states, agent over {b.size}")
    if not secret_ops.generators:
        return SecrecyVerdict(True, MODE_EXHAUSTIVE)
    levels = _closure_levels(b.ops, cap)
    inner = [(t, d) for d, level in enumerate(levels) for t in level]
    if exhaustive is not True and is_congruence(b.perspective, b.ops):
        outer = [(identity(b.size), 0)] + [(g, 1) for g in b.ops.generators]
        mode = MODE_CONGRUENCE
    else:
        outer = inner
        mode = MODE_EXHAUSTIVE
    cls = b.perspective.arr
    for f_b, f_b_inner in _extended_pairs(outer, inner):
        pipeline = f_b.arr[f.arr[f_b_inner.arr]]
        base = cls[pipeline]
        for g in secret_ops.generators:
            lhs = base[g.arr]
            bad = np.nonzero(lhs != base)[0]
            if bad.size:
                x = int(bad[0])
                witness = Witness(
                    chain=(g.name, f_b_inner.name, f.name, f_b.name),
                    secret_indices=(0,),
                    state=x,
                    class_lhs=int(lhs[x]),
                    class_rhs=int(base[x]),
                )
                return SecrecyVerdict(False, mode, witness)
    return SecrecyVerdict(True, mode)


def check_terminality(ops: GeneratedMonoid, p: Partition) -> SecrecyVerdict:
    """The independence condition: acting never moves a state out of its class.

    Generators suffice: if each generator fixes classes pointwise along its
    orbit, transitivity extends the condition to all words.
    """
    if p.size != ops.space.size:
        raise SizeMismatch(f"partition over {p.size} states, ops over {ops.space.size}")
    cls = p.arr
    for g in ops.generators:
        img = cls[g.arr]
        bad = np.nonzero(img != cls)[0]
        if bad.size:
            x = int(bad[0])
            witness = Witness(
                chain=(g.name,),
                secret_indices=(0,),
                state=x,
                class_lhs=int(img[x]),
                class_rhs=int(cls[x]),
            )
            return SecrecyVerdict(False, MODE_EXHAUSTIVE, witness)
    return SecrecyVerdict(True, MODE_EXHAUSTIVE)


def check_secrecy_commuting(
    secret_ops: GeneratedMonoid,
    b: Agent,
    f: Optional[Transform] = None,
    cap: int = DEFAULT_CAP,
    exhaustive: Optional[bool] = None,
    cross_check: bool = True,
) -> SecrecyVerdict:
    """Decide secrecy via the commuting shortcut (no inner post-processing).

    Requires the secret ops to commute with the agent's ops; the simplified
    condition f_B∘f∘g(x) ~ f_B∘f(x) is then equivalent to full extended
    secrecy.  With ``cross_check`` the full check is re-run (when the
    closure fits the cap) and agreement is asserted.
    """
    _require_shared_space(secret_ops, b)
    comm = check_commute(secret_ops, b.ops)
    if not comm:
        raise NotCommuting(comm.witness)
    if f is None:
        f = identity(b.size)
    posts, mode = _outer_elements(b, cap, exhaustive)
    cls = b.perspective.arr
    verdict = None
    for f_b, _depth in posts:
        base = cls[f_b.arr[f.arr]]
        for g in secret_ops.generators:
            lhs = base[g.arr]
            bad = np.nonzero(lhs != base)[0]
            if bad.size:
                x = int(bad[0])
                witness = Witness(
                    chain=(g.name, f.name, f_b.name),
                    secret_indices=(0,),
                    state=x,
                    class_lhs=int(lhs[x]),
                    class_rhs=int(base[x]),
                )
                verdict = SecrecyVerdict(False, mode, witness)
                break
        if verdict:
            break
    if verdict is None:
        verdict = SecrecyVerdict(True, mode)
    if cross_check:
        try:
            full = check_extended_secrecy(secret_ops, b, f, cap=cap)
        except CapExceeded:
            full = None
        if full is not None and full.holds != verdict.holds:
            raise InvariantViolation(
                "simplified commuting verdict disagrees with the full check: "
                f"simplified={verdict.holds}, full={full.holds}"
            )
    return verdict


def check_secrecy_depth_limited(
    secret_ops: GeneratedMonoid,
    b: Agent,
    f: Optional[Transform] = None,
    max_depth: int = 0,
) -> SecrecyVerdict:
    """Extended secrecy with the agent's post-processing cut off at a word length.

    Models an agent whose actions take time: only concatenations of at most
    ``max_depth`` generators fit in its window.  Words are enumerated
    directly, so no closure cap is involved.  ``max_depth=0`` leaves only
    the bare invisibility of the secret action after ``f``.
    """
    _require_shared_space(secret_ops, b)
    if f is None:
        f = identity(b.size)
    levels = elements_up_to_depth(b.ops, max_depth)
    words = [(t, d) for d, level in enumerate(levels) for t in level]
    cls = b.perspective.arr
    for f_b, f_b_inner in _extended_pairs(words, words):
        pipeline = f_b.arr[f.arr[f_b_inner.arr]]
        base = cls[pipeline]
        for g in secret_ops.generators:
            lhs = base[g.arr]
            bad = np.nonzero(lhs != base)[0]
            if bad.size:
                x = int(bad[0])
                witness = Witness(
                    chain=(g.name, f_b_inner.name, f.name, f_b.name),
                    secret_indices=(0,),
                    state=x,
                    class_lhs=int(lhs[x]),
                    class_rhs=int(base[x]),
                )
                return SecrecyVerdict(False, MODE_EXHAUSTIVE, witness)
    return SecrecyVerdict(True, MODE_EXHAUSTIVE)


def _chain_images(slots, start: np.ndarray) -> np.ndarray:
    """Apply (g, f_b) slots in order to an index array of all states."""
    idx = start
    for g, f_b in slots:
        if g is not None:
            idx = g.arr[idx]
        idx = f_b.arr[idx]
    return idx


def _chain_names(slots, with_secret: bool) -> list[str]:
    names = []
    for g, f_b in slots:
        if with_secret and g is not None:
            names.append(g.name)
        names.append(f_b.name)
    return names


def check_robustness_chain(
    secret_ops: GeneratedMonoid,
    b: Agent,
    f: Optional[Transform] = None,
    pre: Optional[Transform] = None,
    n: int = 4,
    trials: int = 1000,
    seed: int = 0,
    cap: int = DEFAULT_CAP,
    exhaustive_limit: int = 1_000_000,
) -> SecrecyVerdict:
    """Assert that interleaved post-processing never lifts an established secrecy.

    With ``f`` absent, chains f_B^N∘g^N∘…∘f_B^1∘g^1∘pre are compared against
    the same chains with the secret g's removed.  With ``f`` present, the
    two-sided pattern L∘f∘R∘pre is used, with independent interleavings L
    and R of length <= n.  The base (extended) secrecy must already hold;
    any chain violation is therefore a bug and raises InvariantViolation.
    Enumeration is exhaustive when the chain count fits ``exhaustive_limit``,
    else ``trials`` seeded samples are drawn.
    """
    _require_shared_space(secret_ops, b)
    if n < 0:
        raise ValueError(f"chain length bound must be >= 0, got {n}")
    base = (
        check_secrecy(secret_ops, b, cap=cap)
        if f is None
        else check_extended_secrecy(secret_ops, b, f, cap=cap)
    )
    if not base.holds:
        raise PreconditionFailed(
            "robustness chains need the base secrecy to hold; "
            f"it fails with witness {base.witness}"
        )

    ident = identity(b.size)
    posts = closure(b.ops, cap)
    secrets: list[Optional[Transform]] = [None] + list(secret_ops.generators)
    pre_arr = (pre or ident).arr
    start = np.arange(b.size, dtype=np.intp)
    cls = b.perspective.arr

    def verify(left_slots, right_slots=None):
        if right_slots is None:
            lhs = _chain_images(left_slots, pre_arr[start])
            rhs = _chain_images([(None, fb) for _, fb in left_slots], pre_arr[start])
            names = [*( [pre.name] if pre else [] ), *_chain_names(left_slots, True)]
        else:
            mid = f.arr[_chain_images(right_slots, pre_arr[start])]
            lhs = _chain_images(left_slots, mid)
            mid_base = f.arr[
                _chain_images([(None, fb) for _, fb in right_slots], pre_arr[start])
            ]
            rhs = _chain_images([(None, fb) for _, fb in left_slots], mid_base)
            names = [
                *([pre.name] if pre else []),
                *_chain_names(right_slots, True),
                f.name,
                *_chain_names(left_slots, True),
            ]
        bad = np.nonzero(cls[lhs] != cls[rhs])[0]
        if bad.size:
            x = int(bad[0])
            raise InvariantViolation(
                "robustness chain broke an established secrecy "
                f"(chain={names}, state={x}, classes "
                f"{int(cls[lhs[x]])} vs {int(cls[rhs[x]])})"
            )

    slot_choices = list(itertools.product(secrets, posts))

    def all_chains():
        for length in range(n + 1):
            for combo in itertools.product(slot_choices, repeat=length):
                yield list(combo)

    per_slot = len(posts) * len(secrets)
    count = sum(per_slot**length for length in range(n + 1))
    total = count if f is None else count * count
    if total <= exhaustive_limit:
        if f is None:
            for chain in all_chains():
                verify(chain)
        else:
            for left in all_chains():
                for right in all_chains():
                    verify(left, right)
        return SecrecyVerdict(True, MODE_EXHAUSTIVE, chains_checked=total)

    rng = np.random.default_rng(seed)

    def sample_chain():
        length = int(rng.integers(0, n + 1))
        return [
            (
                secrets[int(rng.integers(0, len(secrets)))],
                posts[int(rng.integers(0, len(posts)))],
            )
            for _ in range(length)
        ]

    for _ in range(trials):
        if f is None:
            verify(sample_chain())
        else:
            verify(sample_chain(), sample_chain())
    return SecrecyVerdict(True, MODE_RANDOMIZED, chains_checked=trials)


def check_restricted_inheritance(
    a: Agent,
    b: Agent,
    c: Agent,
    f: Optional[Transform] = None,
    cap: int = DEFAULT_CAP,
) -> bool:
    """Re-check that secrecy survives restricting an agent.

    ``c`` must be a restriction of ``b``: its ops contained in b's monoid and
    its perspective a coarsening of b's.  Both inherited directions are
    re-run (a's ops towards the restricted agent; the restricted ops towards
    a); a verdict that held for ``b`` but fails for ``c`` is a bug and raises
    InvariantViolation.  Returns the conjunction of the re-run checks.
    """
    b_tables = {t.table for t in closure(b.ops, cap)}
    for g in c.ops.generators:
        if g.table not in b_tables:
            raise PreconditionFailed(
                f"ops of {c.name or 'C'} not contained in ops of {b.name or 'B'}: "
                f"generator {g.name or g!r}"
            )
    if not refines(b.perspective, c.perspective):
        raise PreconditionFailed(
            f"perspective of {b.name or 'B'} does not refine "
            f"perspective of {c.name or 'C'}"
        )

    def run(ops: GeneratedMonoid, towards: Agent) -> SecrecyVerdict:
        if f is None:
            return check_secrecy(ops, towards, cap=cap)
        return check_extended_secrecy(ops, towards, f, cap=cap)

    towards_b, towards_c = run(a.ops, b), run(a.ops, c)
    if towards_b.holds and not towards_c.holds:
        raise InvariantViolation(
            f"secrecy towards {b.name or 'B'} not inherited by its restriction: "
            f"{towards_c.witness}"
        )
    of_b, of_c = run(b.ops, a), run(c.ops, a)
    if of_b.holds and not of_c.holds:
        raise InvariantViolation(
            f"secrecy of the restricted ops broke although {b.name or 'B'}'s held: "
            f"{of_c.witness}"
        )
    return towards_c.holds and of_c.holds
