import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from edgefed.demand import DemandSet, SeasonalNaive, generate_demand, parse_predictor
from edgefed.latency import latency_breakdown
from edgefed.lp import HighsSolver, RevisedSimplex, assemble_slot_lp
from edgefed.model import (CloudNode, Contracts, EdgeNode, InputError, PriceBook, Scenario, Service, TimeGrid,
                           UserArea)
from edgefed.scheduler import (CAPACITY, FEDERATION, FIXED_CONTRACT, MULTIHOMING, ContractPolicy, DemandSource,
                               InfeasibleSlot, compare_models, plan_slot, run_fixed_contract, run_model,
                               run_multihoming, run_see)
from edgefed.cost import slot_cost
from edgefed.synthetic import unit_scenario
from instances import random_scenario


@pytest.fixture(scope="module")
def unit():
    scen = unit_scenario()
    return scen, generate_demand(scen)


def _replace(scen, **kw):
    return Scenario(**{**{k: getattr(scen, k) for k in Scenario.__dataclass_fields__}, **kw})


def test_oracle_see_realizes_its_plan(unit):
    scen, d = unit
    tl = run_see(scen, DemandSource(d))
    assert tl.feasible and tl.slot_count == 24
    np.testing.assert_allclose(tl.slot_costs(), tl.slot_costs(planned=True), rtol=0, atol=1e-9)
    assert tl.max_violation() <= 1e-7
    assert tl.satisfaction(scen) == {"web": 1.0, "video": 1.0}


def test_see_total_is_the_sum_of_slot_optima(unit):
    scen, d = unit
    tl = run_see(scen, DemandSource(d))
    optima = [HighsSolver()(assemble_slot_lp(scen, d, t)).objective_value for t in range(24)]
    np.testing.assert_allclose(tl.slot_costs(), optima, rtol=1e-9, atol=1e-9)


def test_zero_demand_horizon_costs_nothing(unit):
    scen, _ = unit
    zero = DemandSet(np.zeros((4, 2, 24)), np.zeros((4, 2, 24)), np.zeros((4, 2, 24)))
    for model in (FEDERATION, MULTIHOMING, FIXED_CONTRACT):
        tl = run_model(model, scen, DemandSource(zero))
        assert tl.feasible and tl.total_cost == 0.0


def test_seasonal_naive_on_periodic_demand_matches_oracle(unit):
    scen, d = unit
    oracle = run_see(scen, DemandSource(d))
    seasonal = run_see(scen, DemandSource.periodic(d), SeasonalNaive(24))
    assert seasonal.fallback_slots == ()
    np.testing.assert_array_equal(seasonal.slot_costs(), oracle.slot_costs())
    for a, b in zip(seasonal.allocations, oracle.allocations):
        np.testing.assert_array_equal(a.alpha, b.alpha)


def test_see_without_history_falls_back_to_actual(unit):
    scen, d = unit
    tl = run_see(scen, DemandSource(d), SeasonalNaive(24))
    assert 0 in tl.fallback_slots
    np.testing.assert_array_equal(tl.predicted.s[:, :, 0], d.s[:, :, 0])


def test_prediction_errors_show_up_in_the_audit(unit):
    scen, d = unit
    pred = parse_predictor("moving:3", 24)
    tl = run_see(scen, DemandSource(d), pred)
    assert tl.feasible
    assert all(a is not None for a in tl.audits)
    assert tl.max_violation() > 1e-3
    assert not np.allclose(tl.slot_costs(), tl.slot_costs(planned=True))

    fixed = run_see(scen, DemandSource(d), pred, resolve_on_violation=True)
    assert fixed.resolved_slots
    assert fixed.max_violation() <= 1e-7


def test_single_eip_fixed_contract_equals_federation(unit):
    scen, d = unit
    one = _replace(scen, edge_nodes=tuple(EdgeNode(e.id, "A", e.location, e.storage_capacity, e.compute_capacity,
                                                   e.price_storage, e.price_compute, e.price_comm)
                                          for e in scen.edge_nodes),
                   contracts=Contracts({"web": ("A",), "video": ("A",)}, {"web": ("A",), "video": ("A",)}))
    fed = run_see(one, DemandSource(d))
    for model in (FIXED_CONTRACT, MULTIHOMING):
        other = run_model(model, one, DemandSource(d))
        np.testing.assert_allclose(other.slot_costs(), fed.slot_costs(), rtol=1e-9, atol=1e-9)


def test_multihoming_with_identical_eips_equals_federation():
    # Two EIPs with identical node sets (co-located, same prices); equal split.
    areas = (UserArea("u0", (0.0, 0.0), 60.0), UserArea("u1", (2.0, 0.0), 40.0))
    svc = (Service("s", "s", 0.5, 1.0, 1.0, 80.0, (0.5, 1.0)),)
    edges = tuple(EdgeNode(f"{eip}{k}", eip, loc, 30.0, 60.0, 1.0, 0.5, 0.3)
                  for eip in ("A", "B") for k, loc in enumerate(((0.5, 0.0), (1.5, 0.0))))
    cloud = (CloudNode("c", (50.0, 0.0), 200.0, 1000.0),)
    scen = Scenario("twin", TimeGrid(2), areas, svc, edges, cloud, PriceBook(3.0, 1.0, 1.0), 100.0,
                    contracts=Contracts({"s": ("A",)}, {"s": ("A", "B")}))
    d = generate_demand(scen)
    fed = run_see(scen, DemandSource(d))
    mh = run_multihoming(scen, DemandSource(d))
    np.testing.assert_allclose(mh.slot_costs(), fed.slot_costs(), rtol=1e-9)
    assert mh.max_violation() <= 1e-7


def test_multihoming_far_eip_raises_delivery_latency():
    area = (UserArea("u", (0.0, 0.0), 10.0),)
    svc = (Service("s", "s", 0.5, 1.0, 1.0, 200.0, (1.0,)),)
    near = EdgeNode("near", "A", (1.0, 0.0), 100.0, 100.0, 1.0, 0.5, 0.3)
    far = EdgeNode("far", "B", (8.0, 0.0), 100.0, 100.0, 1.0, 0.5, 0.31)
    cloud = (CloudNode("c", (40.0, 0.0), 100.0, 100.0),)
    scen = Scenario("far", TimeGrid(1), area, svc, (near, far), cloud, PriceBook(5.0, 5.0, 5.0), 10.0,
                    contracts=Contracts({"s": ("A",)}, {"s": ("A", "B")}))
    d = generate_demand(scen).slot(0)
    solver = RevisedSimplex()
    fed, _ = plan_slot(FEDERATION, scen, d, 0, solver)
    mh, _ = plan_slot(MULTIHOMING, scen, d, 0, solver)
    lf = latency_breakdown(fed, d, scen, 0, 0)
    lm = latency_breakdown(mh, d, scen, 0, 0)
    assert fed.alpha[0, 0, 0] == pytest.approx(1.0)
    assert mh.alpha[0, 0, 1] == pytest.approx(0.5)
    assert lm.edge_up + lm.edge_down > lf.edge_up + lf.edge_down + 1.0


def test_capacity_split_follows_node_capacity(unit):
    scen, _ = unit
    big_b = _replace(scen, edge_nodes=tuple(
        EdgeNode(e.id, e.owner_eip, e.location, 300.0 if e.owner_eip == "B" else 100.0, e.compute_capacity,
                 e.price_storage, e.price_compute, e.price_comm) for e in scen.edge_nodes))
    shares = ContractPolicy.for_model(big_b, MULTIHOMING, CAPACITY).shares(big_b)
    np.testing.assert_allclose(shares["A"], 0.25)
    np.testing.assert_allclose(shares["B"], 0.75)
    equal = ContractPolicy.for_model(big_b, MULTIHOMING).shares(big_b)
    np.testing.assert_allclose(equal["A"], 0.5)


@settings(max_examples=25)
@given(st.integers(0, 10_000))
def test_federation_is_never_dearer_than_a_baseline(seed):
    rng = np.random.default_rng(seed)
    scen, d = random_scenario(rng, n_areas=2, n_services=2, n_edges=4, latency=(1.0, 4.0))
    solver = RevisedSimplex()
    fed, _ = plan_slot(FEDERATION, scen, d, 0, solver)
    for model in (FIXED_CONTRACT, MULTIHOMING):
        other, _ = plan_slot(model, scen, d, 0, solver)
        if other is None:
            continue
        assert fed is not None
        assert slot_cost(fed, d, scen).total <= slot_cost(other, d, scen).total + 2e-7 * max(
            1.0, slot_cost(other, d, scen).total)


def test_infeasible_slot_is_recorded_or_aborts(unit):
    scen, d = unit
    tight = scen.with_latency_requirements({"web": 0.01, "video": 0.01})
    tl = run_see(tight, DemandSource(d))
    assert len(tl.infeasible) == 24 and "infeasible" in tl.infeasible[0]
    assert tl.allocations[0] is None and np.isnan(tl.slot_costs()[0])
    with pytest.raises(InfeasibleSlot) as err:
        run_see(tight, DemandSource(d), abort_on_infeasible=True)
    assert err.value.slot == 0


def test_compare_models_reports_partial_results(unit):
    scen, d = unit
    tight = scen.with_latency_requirements({"web": 0.01, "video": 0.01})
    rep = compare_models(tight, DemandSource(d), models=(FEDERATION, FIXED_CONTRACT))
    assert rep.flags


@pytest.mark.parametrize("contracts, message", [
    (Contracts({"web": ("A",)}, {"web": ("A",), "video": ("A",)}), "video"),
    (Contracts({"web": ("A", "B"), "video": ("A",)}, {"web": ("A",), "video": ("A",)}), "exactly one"),
    (Contracts({"web": ("Z",), "video": ("A",)}, {"web": ("A",), "video": ("A",)}), "unknown EIP"),
])
def test_fixed_contract_configuration_errors(unit, contracts, message):
    scen, d = unit
    with pytest.raises(InputError, match=message):
        run_fixed_contract(_replace(scen, contracts=contracts), DemandSource(d))


def test_multihoming_needs_a_contract(unit):
    scen, d = unit
    bad = _replace(scen, contracts=Contracts(scen.contracts.fixed_contract, {"web": ("A",)}))
    with pytest.raises(InputError, match="video"):
        run_multihoming(bad, DemandSource(d))


def test_demand_horizon_must_match_scenario(unit):
    scen, d = unit
    short = DemandSet(d.s[:, :, :5], d.s_post[:, :, :5], d.c[:, :, :5])
    with pytest.raises(InputError):
        run_see(scen, DemandSource(short))
    with pytest.raises(InputError):
        ContractPolicy({}, split="random")
