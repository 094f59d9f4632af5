"""Probabilistic instantiation: distributions, stochastic channels, events.

States are probability vectors over outcomes of a global random variable;
transformations are column-stochastic conditional matrices; a restricted
view groups outcomes into events and sums their probabilities.  Secrecy
becomes a total-variation condition, which degrades gracefully to the
approximate (epsilon-ball) notion.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvariantViolation, LayoutError, SizeMismatch
from .partitions import Partition

#: Absolute tolerance for stochasticity and equality checks; total variation
#: is the designated metric for approximate secrecy.
TOL = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dist:
    """A probability vector over outcomes."""

    probs: np.ndarray
    outcome_labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "probs", _readonly(self.probs))
        p = self.probs
        if p.ndim != 1 or p.size == 0:
            raise ValueError("distribution must be a nonempty vector")
        if p.min() < -TOL:
            raise ValueError(f"negative probability {p.min()}")
        if abs(p.sum() - 1.0) > TOL:
            raise ValueError(f"probabilities sum to {p.sum()}, not 1")
        if self.outcome_labels is not None and len(self.outcome_labels) != p.size:
            raise ValueError("one label per outcome required")

    @property
    def size(self) -> int:
        return self.probs.size


def point_mass(size: int, outcome: int) -> Dist:
    p = np.zeros(size)
    p[outcome] = 1.0
    return Dist(p)


def uniform_dist(size: int) -> Dist:
    return Dist(np.full(size, 1.0 / size))


@dataclass(frozen=True, eq=False)
class Channel:
    """A column-stochastic matrix: entry [z, x] is P(output z | input x)."""

    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "matrix", _readonly(self.matrix))
        m = self.matrix
        if m.ndim != 2 or 0 in m.shape:
            raise ValueError("channel matrix must be 2-d and nonempty")
        if m.min() < -TOL or m.max() > 1.0 + TOL:
            raise ValueError("channel entries must lie in [0, 1]")
        colsums = m.sum(axis=0)
        if np.abs(colsums - 1.0).max() > TOL:
            raise ValueError(f"channel columns must sum to 1, got {colsums}")

    @property
    def n_in(self) -> int:
        return self.matrix.shape[1]

    @property
    def n_out(self) -> int:
        return self.matrix.shape[0]


def identity_channel(n: int, name: str = "id") -> Channel:
    return Channel(np.eye(n), name)


def apply(c: Channel, p: Dist) -> Dist:
    """Push a distribution through a channel (matrix-vector product)."""
    if c.n_in != p.size:
        raise SizeMismatch(f"channel takes {c.n_in} inputs, dist has {p.size}")
    return Dist(c.matrix @ p.probs)


def chain(*channels: Channel) -> Channel:
    """Compose channels; the rightmost is applied first."""
    out = channels[0].matrix
    for c in channels[1:]:
        if out.shape[1] != c.matrix.shape[0]:
            raise SizeMismatch("channel chain with incompatible sizes")
        out = out @ c.matrix
    name = "∘".join(c.name for c in channels if c.name)
    return Channel(out, name)


def coarse_grain(events: Partition, p: Dist) -> Dist:
    """Sum outcome probabilities within each event."""
    if events.size != p.size:
        raise SizeMismatch(f"events over {events.size} outcomes, dist has {p.size}")
    out = np.zeros(events.num_classes)
    np.add.at(out, events.arr, p.probs)
    return Dist(out)


def tv_distance(p: Dist, q: Dist) -> float:
    if p.size != q.size:
        raise SizeMismatch("total variation of different-length distributions")
    return 0.5 * float(np.abs(p.probs - q.probs).sum())


@dataclass(frozen=True)
class GptWitness:
    action: str
    post_outer: str
    post_inner: str
    state_index: int
    distance: float


@dataclass(frozen=True)
class GptVerdict:
    holds: bool
    max_distance: float
    eps: float
    witness: Optional[GptWitness] = None

    def __bool__(self):
        return self.holds

    def to_json(self) -> dict:
        w = self.witness
        return {
            "holds": self.holds,
            "max_distance": self.max_distance,
            "eps": self.eps,
            "witness": None
            if w is None
            else {
                "action": w.action,
                "post_outer": w.post_outer,
                "post_inner": w.post_inner,
                "state_index": w.state_index,
                "distance": w.distance,
            },
        }


def check_gpt_extended_secrecy(
    alice_actions: Sequence[Channel],
    bob_posts: Sequence[Channel],
    f: Channel,
    bob_events: Partition,
    states: Sequence[Dist],
    eps: float = 0.0,
) -> GptVerdict:
    """Secrecy of Alice's channels through Bob's events, around a global channel.

    For every supplied state, Alice action g and Bob post-processing pair
    (outer, inner), the event views of outer∘f∘inner∘g(state) and
    outer∘f∘inner(state) must agree within ``eps`` total variation.
    ``eps=0`` (with the numeric tolerance) is exact secrecy; larger values
    give the approximate, epsilon-ball notion.
    """
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    # event-summing matrix, applied to raw vectors in the hot loop
    grouping = np.zeros((bob_events.num_classes, bob_events.size))
    grouping[bob_events.arr, np.arange(bob_events.size)] = 1.0
    state_vecs = [s.probs for s in states]
    worst = 0.0
    worst_witness = None
    for outer, inner in itertools.product(bob_posts, bob_posts):
        try:
            hull = outer.matrix @ f.matrix @ inner.matrix
        except ValueError as exc:
            raise SizeMismatch(str(exc)) from None
        if hull.shape[0] != bob_events.size:
            raise SizeMismatch(
                f"events over {bob_events.size} outcomes, channel emits {hull.shape[0]}"
            )
        grouped_hull = grouping @ hull
        for g in alice_actions:
            try:
                grouped_with_g = grouped_hull @ g.matrix
            except ValueError as exc:
                raise SizeMismatch(str(exc)) from None
            for si, vec in enumerate(state_vecs):
                if vec.size != grouped_with_g.shape[1] or vec.size != grouped_hull.shape[1]:
                    raise SizeMismatch(
                        f"state {si} has {vec.size} outcomes, channels take "
                        f"{grouped_with_g.shape[1]} / {grouped_hull.shape[1]}"
                    )
                d = 0.5 * float(
                    np.abs(grouped_with_g @ vec - grouped_hull @ vec).sum()
                )
                if d > worst:
                    worst = d
                    worst_witness = GptWitness(
                        g.name, outer.name, inner.name, si, d
                    )
    holds = worst <= eps + TOL
    return GptVerdict(holds, worst, eps, None if holds else worst_witness)


# ---------------------------------------------------------------------------
# 2-bit boxes.  Outcome indexing is row-major: column 2a+b, row 2x+y, with
# the first (most significant) bit on Alice's side.
# ---------------------------------------------------------------------------


def _check_box_layout(box: Channel) -> None:
    if box.matrix.shape != (4, 4):
        raise LayoutError(
            f"expected a 2-bit box (4x4 conditional matrix), got {box.matrix.shape}"
        )


def pr_box() -> Channel:
    """P(xy|ab) = 1/2 when x xor y = a and b, else 0."""
    m = np.zeros((4, 4))
    for a, b, x, y in itertools.product(range(2), repeat=4):
        if x ^ y == a & b:
            m[2 * x + y, 2 * a + b] = 0.5
    return Channel(m, "pr_box")


def swap_box() -> Channel:
    """Outputs are the swapped inputs: x=b, y=a."""
    m = np.zeros((4, 4))
    for a, b in itertools.product(range(2), repeat=2):
        m[2 * b + a, 2 * a + b] = 1.0
    return Channel(m, "swap")


def xor_leak_box() -> Channel:
    """Both outputs carry the xor of the two inputs."""
    m = np.zeros((4, 4))
    for a, b in itertools.product(range(2), repeat=2):
        v = a ^ b
        m[2 * v + v, 2 * a + b] = 1.0
    return Channel(m, "xor_leak")


def product_coin_box(p_x: float = 0.5, p_y: float = 0.5) -> Channel:
    """Independent local coins, ignoring both inputs."""
    m = np.zeros((4, 4))
    for a, b, x, y in itertools.product(range(2), repeat=4):
        px = p_x if x else 1 - p_x
        py = p_y if y else 1 - p_y
        m[2 * x + y, 2 * a + b] = px * py
    return Channel(m, "product_coins")


def local_deterministic_box(fx: Sequence[int], fy: Sequence[int]) -> Channel:
    """x = fx[a], y = fy[b]: deterministic and local on each side."""
    m = np.zeros((4, 4))
    for a, b in itertools.product(range(2), repeat=2):
        m[2 * fx[a] + fy[b], 2 * a + b] = 1.0
    return Channel(m, f"local_det:{list(fx)}|{list(fy)}")


NAMED_BOXES = {
    "pr_box": pr_box,
    "swap": swap_box,
    "xor_leak": xor_leak_box,
    "product_coins": product_coin_box,
}


def named_box(key: str) -> Channel:
    try:
        return NAMED_BOXES[key]()
    except KeyError:
        raise KeyError(
            f"unknown box {key!r}; available: {sorted(NAMED_BOXES)}"
        ) from None


def set_first_bit_channel(value: int) -> Channel:
    """Local action on the first bit of a 2-bit variable: overwrite it."""
    m = np.zeros((4, 4))
    for a, b in itertools.product(range(2), repeat=2):
        m[2 * value + b, 2 * a + b] = 1.0
    return Channel(m, f"set_first:{value}")


def set_second_bit_channel(value: int) -> Channel:
    m = np.zeros((4, 4))
    for a, b in itertools.product(range(2), repeat=2):
        m[2 * a + value, 2 * a + b] = 1.0
    return Channel(m, f"set_second:{value}")


def flip_second_bit_channel() -> Channel:
    m = np.zeros((4, 4))
    for a, b in itertools.product(range(2), repeat=2):
        m[2 * a + (1 - b), 2 * a + b] = 1.0
    return Channel(m, "flip_second")


def swap_sides_channel() -> Channel:
    """(x, y) -> (y, x): pulls the remote side into the local one (non-local)."""
    m = np.zeros((4, 4))
    for x, y in itertools.product(range(2), repeat=2):
        m[2 * y + x, 2 * x + y] = 1.0
    return Channel(m, "swap_sides")


def second_bit_events() -> Partition:
    """Group the four outcomes xy by the second bit y."""
    return Partition.from_class_of([idx & 1 for idx in range(4)])


def standard_alice_actions() -> list[Channel]:
    return [set_first_bit_channel(0), set_first_bit_channel(1)]


def standard_bob_posts() -> list[Channel]:
    return [
        identity_channel(4),
        set_second_bit_channel(0),
        set_second_bit_channel(1),
        flip_second_bit_channel(),
    ]


def standard_states() -> list[Dist]:
    return [point_mass(4, i) for i in range(4)] + [uniform_dist(4)]


def check_traditional_ns(box: Channel) -> bool:
    """Marginal-based non-signalling: P(y|ab) free of a and P(x|ab) free of b."""
    _check_box_layout(box)
    m = box.matrix
    for y, b in itertools.product(range(2), repeat=2):
        lhs = sum(m[2 * x + y, 2 * 0 + b] for x in range(2))
        rhs = sum(m[2 * x + y, 2 * 1 + b] for x in range(2))
        if abs(lhs - rhs) > TOL:
            return False
    for x, a in itertools.product(range(2), repeat=2):
        lhs = sum(m[2 * x + y, 2 * a + 0] for y in range(2))
        rhs = sum(m[2 * x + y, 2 * a + 1] for y in range(2))
        if abs(lhs - rhs) > TOL:
            return False
    return True


def gpt_ns_verdict(box: Channel, local_posts: bool = True) -> GptVerdict:
    """The channel-secrecy side of the non-signalling comparison, on one box.

    With ``local_posts`` dropped, the post-processing battery also contains a
    side-swapping channel; that is exploratory only, since the agreement with
    the marginal notion is proved for truly local post-processing.
    """
    _check_box_layout(box)
    posts = standard_bob_posts()
    if not local_posts:
        posts = posts + [swap_sides_channel()]
    return check_gpt_extended_secrecy(
        standard_alice_actions(),
        posts,
        box,
        second_bit_events(),
        standard_states(),
        eps=0.0,
    )


@dataclass(frozen=True)
class NsAgreementEntry:
    name: str
    secrecy_holds: bool
    traditional_holds: bool

    @property
    def agree(self) -> bool:
        return self.secrecy_holds == self.traditional_holds


@dataclass(frozen=True)
class NsEquivalenceReport:
    entries: tuple[NsAgreementEntry, ...]

    @property
    def total(self) -> int:
        return len(self.entries)

    @property
    def agreements(self) -> int:
        return sum(1 for e in self.entries if e.agree)

    def to_json(self) -> dict:
        return {
            "total": self.total,
            "agreements": self.agreements,
            "entries": [
                {
                    "name": e.name,
                    "secrecy_holds": e.secrecy_holds,
                    "traditional_holds": e.traditional_holds,
                    "agree": e.agree,
                }
                for e in self.entries
            ],
        }


def _random_box(rng: np.random.Generator) -> Channel:
    pool = [
        pr_box(),
        swap_box(),
        xor_leak_box(),
        product_coin_box(float(rng.random()), float(rng.random())),
        local_deterministic_box(
            [int(v) for v in rng.integers(0, 2, size=2)],
            [int(v) for v in rng.integers(0, 2, size=2)],
        ),
    ]
    weights = rng.random(len(pool))
    weights /= weights.sum()
    mixed = sum(w * c.matrix for w, c in zip(weights, pool))
    return Channel(mixed, "mixture")


def check_ns_equivalence(
    box: Optional[Channel] = None,
    trials: int = 200,
    seed: int = 0,
) -> NsEquivalenceReport:
    """Assert the two non-signalling notions agree, box by box.

    Runs the named fixtures, the given box (if any) and ``trials`` seeded
    random mixtures through both checkers; a disagreement indicates a bug
    and raises InvariantViolation naming the box.
    """
    samples: list[Channel] = [named_box(k) for k in ("pr_box", "swap", "xor_leak")]
    if box is not None:
        samples.append(box)
    rng = np.random.default_rng(seed)
    samples += [_random_box(rng) for _ in range(trials)]

    entries = []
    for i, sample in enumerate(samples):
        secrecy = gpt_ns_verdict(sample).holds
        traditional = check_traditional_ns(sample)
        if secrecy != traditional:
            raise InvariantViolation(
                f"non-signalling notions disagree on box #{i} "
                f"({sample.name}): secrecy={secrecy}, traditional={traditional}, "
                f"matrix={sample.matrix.tolist()}"
            )
        entries.append(
            NsAgreementEntry(sample.name or f"box{i}", secrecy, traditional)
        )
    return NsEquivalenceReport(tuple(entries))


def channel_from_json(data: dict) -> Channel:
    """Load {"inputs": n, "outputs": m, "matrix": [[...]]}."""
    matrix = np.asarray(data["matrix"], dtype=float)
    expected = (int(data["outputs"]), int(data["inputs"]))
    if matrix.shape != expected:
        raise ValueError(f"matrix shape {matrix.shape} != declared {expected}")
    return Channel(matrix, str(data.get("name", "")))


def channel_to_json(c: Channel) -> dict:
    return {
        "inputs": c.n_in,
        "outputs": c.n_out,
        "matrix": c.matrix.tolist(),
        "name": c.name,
    }
