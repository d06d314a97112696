import pytest
from hypothesis import given, strategies as st

from entsync.metrics import (
    NS_PER_MS,
    RequestTimeline,
    busy_time_ns,
    jitter_ns,
    latency_ns,
    linear_fit,
    queueing_time_ns,
    scaled_latency_ns,
    throughput_per_edge,
)


def tl(nl_start=0, pl_start=2, pl_finish=5, nl_finish=None, pairs=1):
    return RequestTimeline(0, "complete:2", "esp", 0.75, ("A", "B"), pairs,
                           nl_start, pl_start, pl_finish,
                           pl_finish if nl_finish is None else nl_finish)


def test_latency():
    assert latency_ns(tl(nl_start=0, nl_finish=10 * NS_PER_MS)) == 10 * NS_PER_MS
    assert latency_ns(tl(nl_start=5, pl_start=5, pl_finish=5, nl_finish=5)) == 0


def test_busy_and_queueing():
    t = tl(nl_start=0, pl_start=2, pl_finish=5)
    assert busy_time_ns(t) == 3
    assert queueing_time_ns(t) == 2


def test_incomplete_timeline_rejected():
    t = RequestTimeline(0, "complete:2", "esp", 0.75, ("A", "B"), 1, 0)
    with pytest.raises(ValueError):
        latency_ns(t)


def test_scaled_latency():
    t = tl(nl_start=0, pl_start=0, pl_finish=12 * NS_PER_MS, pairs=6)
    assert scaled_latency_ns(t) == pytest.approx(2 * NS_PER_MS)
    t1 = tl(nl_start=0, pl_start=0, pl_finish=12 * NS_PER_MS, pairs=1)
    assert scaled_latency_ns(t1) == latency_ns(t1)


def test_jitter_examples():
    assert jitter_ns([10, 10, 10]) == 0
    assert jitter_ns([0, 20]) == 10
    assert jitter_ns([42]) == 0
    with pytest.raises(ValueError):
        jitter_ns([])


def test_throughput():
    tls = [tl(nl_start=0, pl_start=0, pl_finish=1_000_000_000, pairs=120)]
    assert throughput_per_edge(tls, 1, 120_000_000_000) == pytest.approx(1.0)
    assert throughput_per_edge([], 1, 1) == 0
    assert throughput_per_edge(tls, 2, 120_000_000_000) == pytest.approx(0.5)


def test_throughput_excludes_late_finishers():
    late = tl(nl_start=0, pl_start=0, pl_finish=10, nl_finish=200, pairs=5)
    assert throughput_per_edge([late], 1, 100) == 0


class TestLinearFit:
    def test_exact_line(self):
        m, c, r2 = linear_fit([(x, 2 * x + 1) for x in range(5)])
        assert (m, c, r2) == pytest.approx((2, 1, 1))

    def test_two_points_perfect(self):
        _, _, r2 = linear_fit([(0, 3), (1, 9)])
        assert r2 == pytest.approx(1)

    def test_hand_computed_ols(self):
        m, c, _ = linear_fit([(0, 0), (1, 1), (2, 0)])
        assert m == pytest.approx(0)
        assert c == pytest.approx(1 / 3)

    def test_degenerate_x_rejected(self):
        with pytest.raises(ValueError):
            linear_fit([(1, 2), (1, 3)])
        with pytest.raises(ValueError):
            linear_fit([(1, 2)])


@st.composite
def timelines(draw):
    nl_start = draw(st.integers(0, 10**9))
    w = draw(st.integers(0, 10**8))
    b = draw(st.integers(0, 10**8))
    tail = draw(st.integers(0, 10**6))
    pairs = draw(st.integers(1, 6))
    return RequestTimeline(0, "t", "esp", 0.75, ("A", "B"), pairs,
                           nl_start, nl_start + w, nl_start + w + b,
                           nl_start + w + b + tail)


@given(timelines())
def test_decomposition_w_plus_b_le_l(t):
    assert queueing_time_ns(t) + busy_time_ns(t) <= latency_ns(t)


@given(st.lists(st.floats(0, 1e12), min_size=1, max_size=50),
       st.floats(-1e12, 1e12))
def test_jitter_translation_invariant(lats, shift):
    assert jitter_ns([x + shift for x in lats]) == pytest.approx(
        jitter_ns(lats), abs=1e-3)


@given(st.lists(timelines(), max_size=30), st.integers(1, 20))
def test_throughput_conservation(tls, n_edges):
    horizon = 10**10
    expected = sum(t.pairs for t in tls if t.nl_finish <= horizon)
    got = throughput_per_edge(tls, n_edges, horizon)
    assert got * n_edges * (horizon / 1e9) == pytest.approx(expected)
