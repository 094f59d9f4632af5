"""Bit-string presentations of power-of-two state spaces.

Convention: positions are 1-indexed, position 1 = most significant bit, so
on three bits state 5 reads "101" and flipping position 1 is ``x ^ 4``.  The
same convention names cells of the cellular-automaton line.
"""

from __future__ import annotations

from .partitions import Partition
from .statespace import StateSpace, Transform

MAX_LABELLED_BITS = 10


def bit_space(n_bits: int, labelled: bool = True) -> StateSpace:
    if n_bits < 1:
        raise ValueError(f"need at least one bit, got {n_bits}")
    size = 1 << n_bits
    labels = None
    if labelled and n_bits <= MAX_LABELLED_BITS:
        labels = tuple(format(x, f"0{n_bits}b") for x in range(size))
    return StateSpace(size, labels)


def _check_position(n_bits: int, i: int) -> None:
    if not 1 <= i <= n_bits:
        raise ValueError(f"bit position {i} outside [1, {n_bits}]")


def position_mask(n_bits: int, i: int) -> int:
    _check_position(n_bits, i)
    return 1 << (n_bits - i)


def get_bit(n_bits: int, x: int, i: int) -> int:
    return (x >> (n_bits - i)) & 1


def xor_mask(n_bits: int, mask: int, name: str = "") -> Transform:
    size = 1 << n_bits
    if not 0 <= mask < size:
        raise ValueError(f"mask {mask} outside [0, {size})")
    return Transform(tuple(x ^ mask for x in range(size)), name or f"xor_mask:{mask}")


def flip_bit(n_bits: int, i: int, name: str = "") -> Transform:
    return xor_mask(n_bits, position_mask(n_bits, i), name or f"not{i}")


def set_bit(n_bits: int, i: int, value: int, name: str = "") -> Transform:
    mask = position_mask(n_bits, i)
    if value not in (0, 1):
        raise ValueError(f"bit value must be 0 or 1, got {value}")
    if value:
        table = tuple(x | mask for x in range(1 << n_bits))
    else:
        table = tuple(x & ~mask for x in range(1 << n_bits))
    return Transform(table, name or f"set_bit:{i}={value}")


def swap_bits(n_bits: int, i: int, j: int, name: str = "") -> Transform:
    mi, mj = position_mask(n_bits, i), position_mask(n_bits, j)

    def swapped(x: int) -> int:
        bi, bj = bool(x & mi), bool(x & mj)
        if bi == bj:
            return x
        return x ^ mi ^ mj

    return Transform(
        tuple(swapped(x) for x in range(1 << n_bits)), name or f"swap_bits:{i},{j}"
    )


def permute_bits(n_bits: int, perm: dict[int, int], name: str = "") -> Transform:
    """Send the bit at position i to position perm[i]; unlisted bits stay."""
    target = dict(perm)
    for i, j in target.items():
        _check_position(n_bits, i)
        _check_position(n_bits, j)

    def moved(x: int) -> int:
        out = 0
        for i in range(1, n_bits + 1):
            if get_bit(n_bits, x, i):
                out |= position_mask(n_bits, target.get(i, i))
        return out

    return Transform(tuple(moved(x) for x in range(1 << n_bits)), name or "permute")


def rule150_step(n_cells: int, name: str = "ca_rule150") -> Transform:
    """One tick of the rule-150 automaton on a line with fixed zero boundaries.

    New cell value = left xor self xor right; the unit-width neighbourhood
    gives the dynamics an exactly unit-speed light cone.
    """

    def step(x: int) -> int:
        out = 0
        for i in range(1, n_cells + 1):
            left = get_bit(n_cells, x, i - 1) if i > 1 else 0
            mid = get_bit(n_cells, x, i)
            right = get_bit(n_cells, x, i + 1) if i < n_cells else 0
            if left ^ mid ^ right:
                out |= position_mask(n_cells, i)
        return out

    return Transform(tuple(step(x) for x in range(1 << n_cells)), name)


def bit_partition(n_bits: int, positions: list[int] | tuple[int, ...]) -> Partition:
    """Distinguish exactly the given bit positions.

    With no positions this is the trivial partition; with all positions, the
    discrete one.
    """
    for i in positions:
        _check_position(n_bits, i)
    masks = [position_mask(n_bits, i) for i in sorted(set(positions))]
    keys = []
    for x in range(1 << n_bits):
        key = 0
        for m in masks:
            key = (key << 1) | bool(x & m)
        keys.append(key)
    return Partition.from_class_of(keys)
