"""Generator checks against published values and basic distribution sanity."""

from __future__ import annotations

import math

from mpcpsched.rng import SplitMix64, Xoshiro256StarStar, derive_stream_seed

MASK64 = (1 << 64) - 1

# First three outputs of splitmix64 for seed 1234567, as published with the
# reference C implementation's test values.
SPLITMIX_1234567 = (
    6457827717110365317,
    3203168211198807973,
    9817491932198370423,
)


def test_splitmix64_reference_vector():
    sm = SplitMix64(1234567)
    assert tuple(sm.next_u64() for _ in range(3)) == SPLITMIX_1234567


def test_splitmix64_masks_seed():
    a = SplitMix64((1 << 64) + 5).next_u64()
    b = SplitMix64(5).next_u64()
    assert a == b


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


def test_xoshiro_first_output_matches_hand_derivation():
    # Re-derive output 0 from the seeding recipe without touching the
    # generator's own stepping code: state = 4 splitmix64 draws, first
    # output = rotl(s1 * 5, 7) * 9.
    seed = 987654321
    sm = SplitMix64(seed)
    s = [sm.next_u64() for _ in range(4)]
    expected = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
    assert Xoshiro256StarStar(seed).next_u64() == expected


def test_xoshiro_deterministic_stream():
    a = Xoshiro256StarStar(42)
    b = Xoshiro256StarStar(42)
    assert [a.next_u64() for _ in range(100)] == [b.next_u64() for _ in range(100)]


def test_random_unit_interval():
    rng = Xoshiro256StarStar(7)
    draws = [rng.random() for _ in range(20000)]
    assert all(0.0 <= d < 1.0 for d in draws)
    mean = math.fsum(draws) / len(draws)
    assert abs(mean - 0.5) < 0.02


def test_uniform_bounds():
    rng = Xoshiro256StarStar(8)
    draws = [rng.uniform(3.0, 9.0) for _ in range(5000)]
    assert all(3.0 <= d <= 9.0 for d in draws)
    assert min(draws) < 3.5 and max(draws) > 8.5


def test_randrange_and_randint_cover_support():
    rng = Xoshiro256StarStar(9)
    seen = {rng.randrange(5) for _ in range(500)}
    assert seen == {0, 1, 2, 3, 4}
    seen_int = {rng.randint(2, 3) for _ in range(200)}
    assert seen_int == {2, 3}


def test_derive_stream_seed_distinct_and_stable():
    seeds = [derive_stream_seed(123, i) for i in range(200)]
    assert len(set(seeds)) == len(seeds)
    assert seeds[17] == derive_stream_seed(123, 17)
    assert derive_stream_seed(123, 0) != derive_stream_seed(124, 0)


def test_derived_streams_do_not_collide_with_base():
    base = Xoshiro256StarStar(55)
    stream = Xoshiro256StarStar(derive_stream_seed(55, 0))
    assert [base.next_u64() for _ in range(4)] != [stream.next_u64() for _ in range(4)]
