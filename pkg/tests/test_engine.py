import pytest

from entsync.engine import Engine, SchedulingError


def test_equal_time_fifo_tiebreak():
    eng = Engine(seed=0)
    order = []
    eng.schedule(100, lambda: order.append("X"))
    eng.schedule(100, lambda: order.append("Y"))
    eng.schedule(50, lambda: order.append("early"))
    eng.run_until(200)
    assert order == ["early", "X", "Y"]


def test_scheduling_in_past_is_fatal():
    eng = Engine(seed=0)
    eng.schedule(60, lambda: None)
    eng.run_until(60)
    with pytest.raises(SchedulingError):
        eng.schedule(50, lambda: None)


def test_schedule_at_now_zero():
    eng = Engine(seed=0)
    fired = []
    eng.schedule(0, lambda: fired.append(eng.now()))
    eng.run_until(0)
    assert fired == [0]
    assert eng.now() == 0


def test_run_until_dispatches_only_due_events():
    eng = Engine(seed=0)
    fired = []
    for t in (10, 20, 30):
        eng.schedule(t, lambda t=t: fired.append(t))
    assert eng.run_until(25) == 25
    assert fired == [10, 20]
    assert eng.pending() == 1


def test_run_until_empty_queue_returns_t_end():
    eng = Engine(seed=0)
    assert eng.run_until(120_000_000_000) == 120_000_000_000


def test_run_until_idempotent():
    eng = Engine(seed=0)
    eng.schedule(5, lambda: None)
    assert eng.run_until(10) == 10
    assert eng.run_until(10) == 10


def test_now_during_dispatch():
    eng = Engine(seed=0)
    seen = []
    eng.schedule(500, lambda: seen.append(eng.now()))
    eng.run_until(1000)
    assert seen == [500]


def test_clock_monotone_across_dispatches():
    eng = Engine(seed=7)
    times = []
    for t in (5, 1, 9, 3, 3, 7):
        eng.schedule(t, lambda: times.append(eng.now()))
    eng.run_until(100)
    assert times == sorted(times)


class TestRngStreams:
    def test_same_seed_same_label_identical(self):
        a = Engine(seed=1).rng_stream("edge:A-B")
        b = Engine(seed=1).rng_stream("edge:A-B")
        assert [a.random() for _ in range(20)] == [b.random() for _ in range(20)]

    def test_different_seed_differs(self):
        a = Engine(seed=1).rng_stream("x")
        b = Engine(seed=2).rng_stream("x")
        assert [a.random() for _ in range(5)] != [b.random() for _ in range(5)]

    def test_different_label_differs(self):
        eng = Engine(seed=1)
        assert ([eng.rng_stream("x").random() for _ in range(5)]
                != [eng.rng_stream("y").random() for _ in range(5)])

    def test_stream_is_cached(self):
        eng = Engine(seed=1)
        assert eng.rng_stream("x") is eng.rng_stream("x")


def test_trace_hook_lines():
    lines = []
    eng = Engine(seed=0, trace_hook=lines.append)
    eng.schedule(10, lambda: None, kind="message", detail="SYN A->B")
    eng.run_until(20)
    assert lines == ["10,0,message,SYN A->B"]
