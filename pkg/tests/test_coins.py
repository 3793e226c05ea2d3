import numpy as np
import pytest

from selfstab_mis import backend, coins


def test_word_is_pure():
    a = coins.word(123, 4, 56, 78)
    assert a == coins.word(123, 4, 56, 78)
    assert 0 <= a < 2**64


def test_distinct_addresses_give_distinct_words():
    seen = set()
    for stream in range(4):
        for ctr in range(50):
            for unit in range(20):
                seen.add(coins.word(99, stream, ctr, unit))
    assert len(seen) == 4 * 50 * 20


def test_vectorized_matches_scalar():
    units = np.arange(1000, dtype=np.uint64)
    vec = coins.words_for_units(7, 2, 13, units)
    for u in (0, 1, 17, 999):
        assert int(vec[u]) == coins.word(7, 2, 13, u)


@pytest.mark.skipif("compiled" not in backend.available_backends(),
                    reason="compiled backend not built")
def test_compiled_coin_matches_python():
    comp = backend.get_impl("compiled")
    for args in [(0, 0, 0, 0), (7, 3, 12345, 99), (2**64 - 1, 8, 2**40, 65535),
                 (42, 1, 10**6, 4095)]:
        assert comp.coin_word(*args) == coins.word(*args)


@pytest.mark.parametrize("stream", [coins.STREAM_PROCESS, coins.STREAM_SWITCH,
                                    coins.STREAM_INIT])
def test_fair_bit_balance(stream):
    units = np.arange(100_000, dtype=np.uint64)
    bits = coins.fair_bits_for_units(2024, stream, 1, units)
    assert abs(float(bits.mean()) - 0.5) < 0.01


def test_lag1_serial_correlation_over_rounds():
    bits = np.array([coins.fair_bit(11, coins.STREAM_PROCESS, t, 5)
                     for t in range(100_000)], dtype=np.float64)
    x, y = bits[:-1], bits[1:]
    r = np.corrcoef(x, y)[0, 1]
    assert abs(r) < 0.01


def test_lag1_serial_correlation_over_vertices():
    units = np.arange(100_001, dtype=np.uint64)
    bits = coins.fair_bits_for_units(12, coins.STREAM_PROCESS, 3,
                                     units).astype(np.float64)
    r = np.corrcoef(bits[:-1], bits[1:])[0, 1]
    assert abs(r) < 0.01


def test_unit_float_open_interval():
    for w in (0, 1, 2**63, 2**64 - 1):
        f = coins.unit_float(w)
        assert 0.0 < f < 1.0


def test_threshold_for_probability():
    assert coins.threshold_for_probability(0.0) == 0
    assert coins.threshold_for_probability(1.0) == 2**64 - 1
    assert coins.threshold_for_probability(2**-7) == 2**57
    with pytest.raises(ValueError):
        coins.threshold_for_probability(1.5)


def test_uniform_below_range_and_determinism():
    vals = [coins.uniform_below(5, coins.STREAM_TREE, i, 7) for i in range(2000)]
    assert all(0 <= v < 7 for v in vals)
    assert vals == [coins.uniform_below(5, coins.STREAM_TREE, i, 7)
                    for i in range(2000)]
    counts = np.bincount(vals, minlength=7)
    assert counts.min() > 2000 / 7 * 0.75


def test_uniform_below_rejects_bad_bound():
    with pytest.raises(ValueError):
        coins.uniform_below(1, 0, 0, 0)


def test_trial_seed_derivation_distinct():
    seeds = {coins.derive_trial_seed(77, i) for i in range(10_000)}
    assert len(seeds) == 10_000


def test_coinstream_wrapper():
    cs = coins.CoinStream(2**64 + 5)  # masked to 64 bits
    assert cs.master_seed == 5
    assert cs.word(0, 1, 2) == coins.word(5, 0, 1, 2)
