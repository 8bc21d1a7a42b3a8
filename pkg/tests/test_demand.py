from datetime import datetime, timedelta

import numpy as np
import pytest
from hypothesis import given, strategies as st

from edgefed.demand import (DemandSet, MovingAverage, SeasonalNaive, TraceParseError, edge_local_demand,
                            generate_demand, ingest_trace, ingest_traces, normalize_profile, parse_predictor,
                            predict_demand)
from edgefed.model import (CloudNode, EdgeNode, InputError, PriceBook, Scenario, Service, TimeGrid, UserArea)
from edgefed.synthetic import toronto_scenario


def two_area(q=0.5, pops=(60.0, 40.0), k_s=0.5, k_c=2.0, total=100.0, edges=None):
    areas = (UserArea("u0", (0.0, 0.0), pops[0]), UserArea("u1", (10.0, 0.0), pops[1]))
    if edges is None:
        edges = (EdgeNode("e0", "A", (1.0, 0.0), 1, 1, 1, 1, 1), EdgeNode("e1", "A", (9.0, 0.0), 1, 1, 1, 1, 1))
    return Scenario("t", TimeGrid(1), areas, (Service("s", "s", k_s, k_c, 1.0, 10.0, (q,)),), edges,
                    (CloudNode("c", (50.0, 0.0), 1e3, 1e3),), PriceBook(1, 1, 1), total)


def test_hand_evaluated_triples():
    d = generate_demand(two_area())
    assert d.triple(0, 0, 0).__dict__ == {"s": 30.0, "s_post": 15.0, "c": 60.0}
    assert d.triple(1, 0, 0).__dict__ == {"s": 20.0, "s_post": 10.0, "c": 40.0}


def test_zero_profile_gives_zero_demand():
    d = generate_demand(two_area(q=0.0))
    assert not d.s.any() and not d.c.any()


def test_zero_population_is_rejected():
    with pytest.raises(InputError):
        generate_demand(two_area(total=0.0))


def test_generated_demand_conserves_and_keeps_identities():
    scen = toronto_scenario(30)
    d = generate_demand(scen)
    q = np.array([s.profile for s in scen.services])
    assert np.allclose(d.s.sum(axis=0), scen.total_population * q, rtol=0, atol=1e-9)
    k_s = np.array([s.k_s for s in scen.services])[None, :, None]
    k_c = np.array([s.k_c for s in scen.services])[None, :, None]
    assert np.array_equal(d.s_post, d.s * k_s) and np.array_equal(d.c, d.s * k_c)


def test_edge_local_demand():
    scen = two_area()
    d = generate_demand(scen)
    assert edge_local_demand(d, scen, "e0", "s", 0) == 30.0
    assert edge_local_demand(d, scen, "e1", "s", 0) == 20.0
    lonely = two_area(edges=(EdgeNode("e0", "A", (1.0, 0.0), 1, 1, 1, 1, 1),
                             EdgeNode("far", "A", (500.0, 0.0), 1, 1, 1, 1, 1)))
    d = generate_demand(lonely)
    assert edge_local_demand(d, lonely, "far", "s", 0) == 0.0
    assert edge_local_demand(d, lonely, "e0", "s", 0) == 50.0
    with pytest.raises(InputError):
        edge_local_demand(d, lonely, "nope", "s", 0)


HEADER = "timestamp,service,value\n"


def test_ingest_empty_and_hourly():
    assert len(ingest_trace(HEADER)) == 0
    start = datetime(2024, 1, 1)
    body = "".join(f"{(start + timedelta(hours=h)).isoformat()},web,{h}\n" for h in range(24))
    assert len(ingest_trace(HEADER + body)) == 24


@given(st.permutations(list(range(12))))
def test_ingest_sorts_rows(order):
    start = datetime(2024, 1, 1)
    body = "".join(f"{(start + timedelta(minutes=5 * k)).isoformat()},web,{k}\n" for k in order)
    prof = ingest_trace(HEADER + body)
    expected = sorted((start + timedelta(minutes=5 * k), float(k)) for k in order)
    assert list(zip(prof.timestamps, prof.values)) == expected


def test_ingest_errors_carry_line_numbers():
    with pytest.raises(TraceParseError) as err:
        ingest_trace(HEADER + "2024-01-01T00:00,web,1\nnot-a-date,web,2\n")
    assert err.value.line == 3
    with pytest.raises(TraceParseError):
        ingest_trace("time,value\n")
    with pytest.raises(TraceParseError) as err:
        ingest_trace(HEADER + "2024-01-01T00:00,web\n")
    assert err.value.line == 2
    with pytest.raises(InputError, match="negative"):
        ingest_trace(HEADER + "2024-01-01T00:00,web,-1\n")
    with pytest.raises(InputError, match="duplicate"):
        ingest_trace(HEADER + "2024-01-01T00:00,web,1\n2024-01-01T00:00,web,2\n")


def test_mixed_trace_needs_a_service():
    text = HEADER + "2024-01-01T00:00,a,1\n2024-01-01T00:00,b,2\n"
    assert set(ingest_traces(text)) == {"a", "b"}
    assert ingest_trace(text, "b").values == (2.0,)
    with pytest.raises(InputError):
        ingest_trace(text)


def _profile(values, minutes=60):
    start = datetime(2024, 1, 1)
    body = "".join(f"{(start + timedelta(minutes=minutes * k)).isoformat()},x,{v}\n" for k, v in enumerate(values))
    return ingest_trace(HEADER + body)


def test_normalize_examples():
    assert normalize_profile(_profile([2, 4, 8, 6]), TimeGrid(4)) == [0.25, 0.5, 1.0, 0.75]
    assert normalize_profile(_profile([3] * 5), TimeGrid(5)) == [1.0] * 5
    assert normalize_profile(_profile([0] * 5), TimeGrid(5)) == [0.0] * 5
    # Two observations per slot are averaged; a gap takes the previous slot.
    assert normalize_profile(_profile([1, 3, 4, 4], minutes=30), TimeGrid(3)) == [0.5, 1.0, 1.0]


@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=48))
def test_normalized_profile_range(values):
    out = normalize_profile(_profile(values), TimeGrid(len(values)))
    assert all(0.0 <= q <= 1.0 for q in out)
    assert max(out) == (1.0 if max(values) > 0 else 0.0)


def test_predictor_examples():
    assert predict_demand([1, 2, 3, 4], 1, MovingAverage(2)).values[0] == 3.5
    for strategy in (SeasonalNaive(4), MovingAverage(3)):
        assert np.all(predict_demand([5.0] * 8, 3, strategy).values == 5.0)
    short = predict_demand([1.0, 2.0], 3, SeasonalNaive(24))
    assert short.fallback and np.all(short.values == 2.0)
    with pytest.raises(InputError):
        predict_demand([], 1)


@given(st.lists(st.floats(0, 100), min_size=1, max_size=10), st.integers(1, 4), st.integers(1, 20))
def test_seasonal_naive_exact_on_periodic_data(cycle, repeats, horizon):
    period = len(cycle)
    history = np.array(cycle * repeats)
    pred = SeasonalNaive(period).predict(history, horizon)
    assert not pred.fallback
    assert np.array_equal(pred.values, np.array([cycle[h % period] for h in range(horizon)]))


def test_parse_predictor():
    assert parse_predictor("oracle") is None
    assert parse_predictor("seasonal") == SeasonalNaive(24)
    assert parse_predictor("seasonal:12") == SeasonalNaive(12)
    assert parse_predictor("moving:5") == MovingAverage(5)
    for bad in ("arima", "moving:x", "moving:0"):
        with pytest.raises(InputError):
            parse_predictor(bad)


def test_demand_set_slots_round_trip():
    d = generate_demand(toronto_scenario(30))
    again = DemandSet.from_slots([d.slot(t) for t in range(d.slot_count)])
    assert np.array_equal(again.s, d.s) and np.array_equal(again.c, d.c)
