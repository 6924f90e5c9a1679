import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from timingloop.channel import DelayModel, transmit
from timingloop.codec import (Codebook, DecodeFailure, DecodeSchedule, ResourceError,
                              build_codebook, count_decode_errors, decode_initial_state,
                              decode_path, encode, has_duplicate_rows, measure_error_rate,
                              ml_decode)
from timingloop.quantizer import quantize

LN2 = math.log(2)
EXP1 = DelayModel.exponential(1.0)


def book_from(rows, mean_s=1.0):
    rows = np.asarray(rows, dtype=float)
    n = rows.shape[1]
    n_prime = rows.shape[0].bit_length() - 1
    rate = max(n_prime, 1) * LN2 / (n * math.e * mean_s)
    return Codebook(rows, mean_s, rate, math.e * mean_s, 0, nested=False)


class TestSchedule:
    def test_bits(self):
        sched = DecodeSchedule(0.8 / math.e, math.e)
        assert sched.bits_per_symbol == pytest.approx(0.8 / LN2)
        assert [sched.bits_at(n) for n in range(0, 5)] == [0, 2, 3, 4, 5]

    @given(st.floats(0.01, 2.0), st.integers(1, 200))
    def test_round_trip(self, rate, n_prime):
        sched = DecodeSchedule(rate, math.e)
        n = sched.symbols_for(n_prime)
        assert sched.bits_at(n) >= n_prime
        assert sched.bits_at(n - 1) < n_prime
        k = sched.symbols_within(n_prime)
        assert sched.bits_at(k) <= n_prime < sched.bits_at(k + 1)

    def test_nondecreasing(self):
        pairs = DecodeSchedule(0.3, 2.0).pairs(50)
        assert all(b >= a for (_, a), (_, b) in zip(pairs, pairs[1:]))

    def test_invalid(self):
        with pytest.raises(ValueError):
            DecodeSchedule(0.0, 1.0)


class TestBuild:
    def test_mixture_law(self):
        entries = np.concatenate([build_codebook(1, 1, 1.0, s, redraws=0).entries.ravel()
                                  for s in range(2000)])
        big = build_codebook(20, 15, 1.0, 1, nested=False, redraws=0).entries.ravel()
        sample = np.concatenate([entries, big])
        assert sample.size > 6 * 10**5
        assert np.mean(sample == 0) == pytest.approx(math.exp(-1), rel=0.01)
        assert sample.mean() == pytest.approx(math.e - 1, rel=0.02)

    def test_shape_and_determinism(self):
        a = build_codebook(5, 4, 1.0, 11)
        b = build_codebook(5, 4, 1.0, 11)
        assert a.entries.shape == (16, 5)
        assert a.entries.tobytes() == b.entries.tobytes()
        assert np.all(a.entries >= 0)

    def test_resource_cap(self):
        with pytest.raises(ResourceError):
            build_codebook(20, 17, 1.0, 0)
        with pytest.raises(ResourceError):
            build_codebook(4000, 14, 1.0, 0, max_entries=1 << 20)

    def test_invalid(self):
        with pytest.raises(ValueError):
            build_codebook(0, 1, 1.0, 0)
        with pytest.raises(ValueError):
            build_codebook(1, 1, 0.0, 0)

    def test_redraw_avoids_duplicates_when_cheap(self):
        # flat 2x1 codebooks collide with probability about e^-2; redraws remove that
        dup = sum(has_duplicate_rows(build_codebook(1, 1, 1.0, s, nested=False).entries)
                  for s in range(300))
        dup0 = sum(has_duplicate_rows(build_codebook(1, 1, 1.0, s, nested=False, redraws=0).entries)
                   for s in range(300))
        assert dup0 > 10 and dup < dup0 / 10

    def test_nested_prefix_structure(self):
        book = build_codebook(6, 8, 1.0, 3)
        sched = book.schedule
        for i in range(1, 7):
            depth = sched.bits_at(i)
            col = book.entries[:, i - 1]
            groups = col.reshape(1 << depth, -1)
            assert np.all(groups == groups[:, :1])  # rows sharing a depth-n' prefix agree

    def test_truncate(self):
        book = build_codebook(6, 8, 1.0, 3)
        t = book.truncate(3)
        depth = book.schedule.bits_at(3)
        assert t.entries.shape == (1 << depth, 3)
        np.testing.assert_array_equal(t.entries, book.entries[:: 1 << (8 - depth), :3])
        with pytest.raises(ValueError):
            book.truncate(7)
        with pytest.raises(ValueError):
            build_codebook(6, 8, 1.0, 3, nested=False).truncate(3)


class TestEncode:
    def test_leftmost_cell_is_row_zero(self):
        book = build_codebook(3, 3, 1.0, 0)
        np.testing.assert_array_equal(encode(-0.99, 1.0, book.schedule, book), book.entries[0])

    def test_hand_example_row(self):
        book = build_codebook(3, 3, 1.0, 0)
        np.testing.assert_array_equal(encode(0.3, 1.0, book.schedule, book), book.entries[5])

    def test_same_cell_same_prefix(self):
        book = build_codebook(8, 10, 1.0, 2)
        sched = book.schedule
        n = sched.symbols_within(4)
        assert n >= 1 and sched.bits_at(n + 1) > 4
        # 0.30 and 0.32 share a depth-4 cell ([0.25, 0.375))
        a = encode(0.30, 1.0, sched, book)
        b = encode(0.32, 1.0, sched, book)
        np.testing.assert_array_equal(a[:n], b[:n])

    def test_out_of_range(self):
        book = build_codebook(3, 3, 1.0, 0)
        with pytest.raises(ValueError):
            encode(1.0, 1.0, book.schedule, book)

    def test_schedule_mismatch(self):
        book = build_codebook(3, 3, 1.0, 0)
        with pytest.raises(ValueError):
            encode(0.1, 1.0, DecodeSchedule(1.0, 1.0), book)


class TestDecode:
    def test_single_row(self):
        assert ml_decode(book_from([[0.5, 1.0]]), [1.0, 2.0], EXP1) == 0

    def test_likelihood_comparison(self):
        assert ml_decode(book_from([[0, 2], [1, 0]]), [1.5, 2.5], EXP1) == 0

    def test_feasibility_filter(self):
        assert ml_decode(book_from([[3, 0], [0, 0]]), [1.5, 2.5], EXP1) == 1

    def test_tie_lowest_index(self):
        assert ml_decode(book_from([[1, 1], [2, 0]]), [3.0, 3.0], EXP1) == 0

    def test_no_feasible_row(self):
        with pytest.raises(DecodeFailure):
            ml_decode(book_from([[3, 3], [4, 4]]), [1.0, 1.0], EXP1)

    def test_non_exponential_rejected(self):
        with pytest.raises(ValueError):
            ml_decode(book_from([[0.0]]), [1.0], DelayModel.geometric(2.0))

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            ml_decode(book_from([[0.0, 1.0]]), [1.0], EXP1)

    def test_matches_brute_force_likelihood(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            book = build_codebook(4, 3, 1.0, int(rng.integers(1000)), nested=False, redraws=0)
            d = transmit(book.entries[int(rng.integers(8))], EXP1, rng).inter_reception
            feasible = np.all(book.entries <= d, axis=1)
            loglik = np.where(feasible, -(d - book.entries).sum(axis=1), -np.inf)
            assert ml_decode(book, d, EXP1) == int(np.argmax(loglik))

    @settings(max_examples=50)
    @given(st.integers(0, 10**6), st.integers(1, 6), st.integers(1, 8))
    def test_transmitted_row_always_feasible(self, seed, n, n_prime):
        book = build_codebook(n, n_prime, 1.0, seed, nested=False, redraws=0)
        rng = np.random.default_rng(seed)
        sent = int(rng.integers(book.rows))
        d = transmit(book.entries[sent], EXP1, rng).inter_reception
        ml_decode(book, d, EXP1)  # never raises

    def test_noiseless_decode_is_exact(self):
        zero = DelayModel.degenerate(0.0)
        book = build_codebook(6, 6, 1.0, 9, nested=False)
        assert not has_duplicate_rows(book.entries)
        for x0 in np.linspace(-0.95, 0.95, 25):
            d = transmit(encode(x0, 1.0, book.schedule, book), zero, delays=np.zeros(6)).inter_reception
            assert decode_path(book, d, zero) == quantize(x0, 1.0, 6)
            assert abs(decode_initial_state(book, d, zero, 1.0, book.schedule) - x0) <= 1.0 / 2**6

    def test_hand_example_reconstruction(self):
        rows = np.array([[float(r), 0.0, 0.0] for r in range(8)])
        book = Codebook(rows, 1.0, 3 * LN2 / (3 * math.e), math.e, 0, nested=False)
        d = rows[5] + 0.2
        assert decode_initial_state(book, d, EXP1, 1.0) == 0.375

    def test_anytime_prefix_consistency(self):
        rng = np.random.default_rng(11)
        book = build_codebook(8, 12, 1.0, 4)
        sched = book.schedule
        x0 = 0.123
        d = transmit(encode(x0, 1.0, sched, book), EXP1, rng).inter_reception
        truth = quantize(x0, 1.0, 12)
        correct = [decode_path(book, d[:n], EXP1) for n in range(1, 9)]
        correct = [p for p in correct if p.is_prefix_of(truth)]
        for a, b in zip(correct, correct[1:]):
            assert a.is_prefix_of(b)

    def test_decode_with_no_symbols(self):
        book = build_codebook(3, 3, 1.0, 0)
        assert decode_path(book, [], EXP1).depth == 0


class TestErrorRate:
    def test_far_below_capacity(self):
        assert measure_error_rate(12, 2, 1.0, 2000, 0) < 0.1

    def test_above_capacity(self):
        assert measure_error_rate(4, 12, 1.0, 2000, 0) > 0.5

    def test_zero_delay(self):
        # with S = 0 only duplicate rows can cause errors, and redraws remove them here
        r = count_decode_errors(6, 4, 1.0, 200, 0, delay=DelayModel.degenerate(0.0),
                                fixed_codebook=True)
        assert r.error_rate == 0.0

    def test_deterministic(self):
        a = count_decode_errors(6, 4, 1.0, 300, 7)
        b = count_decode_errors(6, 4, 1.0, 300, 7)
        assert a == b

    def test_fixed_codebook_mode(self):
        r = count_decode_errors(6, 3, 1.0, 300, 7, fixed_codebook=True)
        assert 0 <= r.errors <= 300 and r.rate_nats < r.capacity_nats

    def test_std_error(self):
        r = count_decode_errors(4, 2, 1.0, 100, 1)
        assert r.std_error == pytest.approx(math.sqrt(r.error_rate * (1 - r.error_rate) / 100))
