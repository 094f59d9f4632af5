"""Induced perspectives and agent-deriving constructions."""

import numpy as np
import pytest

from helpers import (
    NOT1,
    NOT2,
    NOT3,
    SIDE_EFFECT_A,
    SIDE_EFFECT_B,
    THREE_BITS,
    induced_perspective_oracle,
    monoid,
    random_monoid,
)
from oplocal import (
    Agent,
    CapExceeded,
    NotCommuting,
    PreconditionFailed,
    StateSpace,
    Transform,
    check_commute,
    check_minimality,
    check_operationality,
    check_secrecy,
    derive_secret_agents,
    derive_secret_general,
    discrete,
    generated,
    induced_perspective,
    perceived_commutation,
    refines,
    trivial,
)
from oplocal.bitops import bit_partition, swap_bits, xor_mask

SWAP12 = swap_bits(3, 1, 2)


# --- induced perspective --------------------------------------------------------


def test_induced_perspective_not3():
    ip = induced_perspective(monoid(NOT3))
    assert ip.method == "weak_components"
    assert ip.partition.classes() == [[0, 1], [2, 3], [4, 5], [6, 7]]


def test_induced_perspective_identity_monoid():
    ip = induced_perspective(generated(THREE_BITS))
    assert ip.partition == discrete(8)


def test_induced_perspective_constant_map():
    const0 = Transform((0,) * 8, "const0")
    ip = induced_perspective(monoid(const0))
    assert ip.partition == trivial(8)


def test_induced_perspective_saturated():
    rng = np.random.default_rng(17)
    for _ in range(30):
        m = random_monoid(rng, 9, 2)
        p = induced_perspective(m).partition
        for g in m.generators:
            for x in range(9):
                assert p.class_of[x] == p.class_of[g.table[x]]


def test_induced_perspective_matches_literal_oracle():
    rng = np.random.default_rng(42)
    checked = 0
    while checked < 100:
        n = int(rng.integers(3, 13))
        m = random_monoid(rng, n, int(rng.integers(1, 4)))
        try:
            expected = induced_perspective_oracle(m, cap=500)
        except CapExceeded:
            continue
        assert induced_perspective(m).partition == expected
        checked += 1


# --- deriving secret agents -------------------------------------------------------


def test_derive_secret_agents_three_bits():
    a, b = derive_secret_agents(monoid(NOT1, name="TA"), monoid(NOT2, name="TB"))
    # each side is blinded exactly against the other's flips
    assert a.perspective.classes() == [[0, 2], [1, 3], [4, 6], [5, 7]]
    assert b.perspective.classes() == [[0, 4], [1, 5], [2, 6], [3, 7]]
    assert check_secrecy(a.ops, b).holds
    assert check_secrecy(b.ops, a).holds


def test_derive_secret_agents_identity_monoids():
    a, b = derive_secret_agents(generated(THREE_BITS), generated(THREE_BITS))
    assert a.perspective == discrete(8)
    assert b.perspective == discrete(8)


def test_derive_secret_agents_noncommuting():
    with pytest.raises(NotCommuting):
        derive_secret_agents(monoid(SIDE_EFFECT_A), monoid(SIDE_EFFECT_B))


def test_derive_secret_agents_random_commuting_families():
    rng = np.random.default_rng(7)
    for _ in range(15):
        n_bits = int(rng.integers(3, 6))
        split = int(rng.integers(1, n_bits))
        mask_a = int(rng.integers(1, 1 << split)) << (n_bits - split)
        mask_b = int(rng.integers(1, 1 << (n_bits - split)))
        ta = generated(
            StateSpace(1 << n_bits), xor_mask(n_bits, mask_a), name="TA"
        )
        tb = generated(
            StateSpace(1 << n_bits), xor_mask(n_bits, mask_b), name="TB"
        )
        a, b = derive_secret_agents(ta, tb)
        assert check_secrecy(ta, b, exhaustive=True).holds
        assert check_secrecy(tb, a, exhaustive=True).holds


# --- minimality / operationality ----------------------------------------------------


def test_minimality_concrete():
    b = Agent(bit_partition(3, [1]), monoid(NOT1, name="TB"), "b")
    result = check_minimality(b, monoid(NOT3, name="TA"))
    assert result
    assert result.induced.num_classes == 4
    # the 4 induced classes group pairwise into b's 2
    assert result.factor.num_classes == 2
    assert result.factor.class_of == (0, 0, 1, 1)


def test_minimality_identity_factor():
    induced = induced_perspective(monoid(NOT3)).partition
    b = Agent(induced, monoid(NOT1, name="TB"), "b")
    result = check_minimality(b, monoid(NOT3))
    assert result.factor == discrete(induced.num_classes)


def test_minimality_precondition_fails_first():
    finer = Agent(discrete(8), monoid(NOT1), "fine")
    with pytest.raises(PreconditionFailed):
        check_minimality(finer, monoid(NOT3))


def test_minimality_rejects_noncommuting():
    b = Agent(trivial(8), monoid(SIDE_EFFECT_B), "b")
    with pytest.raises(PreconditionFailed):
        check_minimality(b, monoid(SIDE_EFFECT_A))


def test_operationality():
    assert check_operationality(monoid(NOT3), monoid(NOT1, NOT2))
    assert check_operationality(generated(THREE_BITS), monoid(SIDE_EFFECT_A))
    assert check_operationality(monoid(NOT3), monoid(SIDE_EFFECT_B))
    with pytest.raises(NotCommuting):
        check_operationality(monoid(SIDE_EFFECT_A), monoid(SIDE_EFFECT_B))


# --- perceived commutation ----------------------------------------------------------


def test_perceived_commutation_side_effect_pair():
    ta, tb = monoid(SIDE_EFFECT_A), monoid(SIDE_EFFECT_B)
    assert not check_commute(ta, tb).commutes
    result = perceived_commutation(ta, tb, bit_partition(3, [1, 2]))
    assert result.holds
    assert result.mode == "generator_congruence"


def test_perceived_commutation_discrete_matches_global():
    ta, tb = monoid(SIDE_EFFECT_A), monoid(SIDE_EFFECT_B)
    result = perceived_commutation(ta, tb, discrete(8))
    assert result.holds == check_commute(ta, tb).commutes
    assert not result.holds
    f_name, g_name, state, lhs, rhs = result.witness
    assert state == 0 and lhs != rhs


def test_perceived_commutation_trivial_always_holds():
    rng = np.random.default_rng(2)
    for _ in range(10):
        ta = random_monoid(rng, 8, 2, prefix="a")
        tb = random_monoid(rng, 8, 2, prefix="b")
        assert perceived_commutation(ta, tb, trivial(8)).holds


# --- general construction -----------------------------------------------------------


def test_general_specializes_to_induced_perspective():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n_bits = int(rng.integers(2, 5))
        space = StateSpace(1 << n_bits)
        cut = int(rng.integers(1, n_bits)) if n_bits > 1 else 1
        mask_a = int(rng.integers(1, 1 << cut)) << (n_bits - cut)
        mask_b = int(rng.integers(1, 1 << (n_bits - cut)))
        secret = generated(space, xor_mask(n_bits, mask_a), name="TS")
        tb = generated(space, xor_mask(n_bits, mask_b), name="TB")
        built = derive_secret_general(secret, tb)
        assert built.method == "fixpoint_general"
        assert built.partition == induced_perspective(secret).partition


def test_general_identity_secret_gives_discrete():
    assert (
        derive_secret_general(generated(THREE_BITS), monoid(SWAP12)).partition
        == discrete(8)
    )


def test_general_noncommuting_is_strictly_coarser():
    built = derive_secret_general(monoid(NOT1, name="TS"), monoid(SWAP12, name="TB"))
    induced = induced_perspective(monoid(NOT1)).partition
    assert built.partition.classes() == [[0, 2, 4, 6], [1, 3, 5, 7]]
    assert refines(induced, built.partition)
    assert built.partition != induced


def test_general_noncommuting_post_verification_passes():
    rng = np.random.default_rng(13)
    done = 0
    while done < 20:
        secret = random_monoid(rng, 8, 1, prefix="s", name="TS")
        tb = random_monoid(rng, 8, 2, prefix="b", name="TB")
        try:
            derive_secret_general(secret, tb, cap=400)  # raises on violation
        except CapExceeded:
            continue
        done += 1


def test_general_with_global_transform():
    built = derive_secret_general(
        monoid(NOT1, name="TS"), monoid(NOT2, name="TB"), f=SWAP12
    )
    # the swap forwards bit-1 flips into bit 2, so both bits blur together
    assert refines(induced_perspective(monoid(NOT1)).partition, built.partition)
    from oplocal import check_extended_secrecy

    assert check_extended_secrecy(
        monoid(NOT1), Agent(built.partition, monoid(NOT2)), SWAP12
    ).holds
