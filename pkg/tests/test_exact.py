import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isingbound import CapacityError, DomainError, ImpossibleEventError, IsingGraph, IsingInstance
from isingbound.exact import (
    DegenerateMixtureWarning,
    conditional_expectation,
    covariance,
    effective_field,
    exact_stats,
    log_partition,
    magnetization,
    mixture_alpha,
    reset_field,
    safe_atanh,
    tree_effective_field,
)
from isingbound.exact.dense import batch_magnetizations

from conftest import brute_instance, brute_mag

TANH1 = 0.7615941559557649


def edge(J=1.0, g=(0.0, 0.0), beta=1.0):
    return IsingInstance(IsingGraph(2, ((0, 1, J),)), beta, tuple(g))


def random_instance(rng, n, scale=3.0, p=0.5, finite=True):
    edges = tuple((u, v, float(rng.uniform(0, 2))) for u in range(n) for v in range(u + 1, n) if rng.random() < p)
    g = rng.uniform(-scale, scale, n)
    if not finite:
        pin = rng.random(n) < 0.15
        g = np.where(pin, np.sign(g) * np.inf, g)
    return IsingInstance(IsingGraph(n, edges), 1.0, tuple(float(x) for x in g))


# ---------------------------------------------------------------- stats

def test_single_vertex_zero_field():
    st_ = exact_stats(IsingInstance(IsingGraph(1), 1.0, (0.0,)))
    assert st_.log_z == pytest.approx(math.log(2), abs=1e-15)
    assert st_.magnetizations[0] == 0.0


def test_single_vertex_unit_field():
    assert magnetization(IsingInstance(IsingGraph(1), 1.0, (1.0,)), 0) == pytest.approx(TANH1, abs=1e-14)


def test_single_edge_pair_product():
    st_ = exact_stats(edge(), pairs=[(0, 1)])
    assert st_.pair_products[(0, 1)] == pytest.approx(TANH1, abs=1e-14)


def test_empty_graph_after_reduction():
    st_ = exact_stats(IsingInstance(IsingGraph(1), 1.0, (math.inf,)))
    assert st_.magnetizations[0] == 1.0
    assert st_.log_z == 0.0


def test_capacity_error_suggests_monte_carlo():
    inst = IsingInstance(IsingGraph(30), 1.0, (0.0,) * 30)
    with pytest.raises(CapacityError, match="Monte Carlo"):
        exact_stats(inst, [0])


def test_cap_is_configurable():
    inst = IsingInstance(IsingGraph.path(6), 1.0, (0.1,) * 6)
    with pytest.raises(CapacityError):
        exact_stats(inst, [0], cap=5)


@pytest.mark.parametrize("n", [1, 3, 8, 17])
def test_against_oracle(rng, n):
    inst = random_instance(rng, n, finite=False) if n < 17 else random_instance(rng, n)
    st_ = exact_stats(inst, pairs=[(0, n - 1)] if n > 1 else [])
    if n <= 12:
        Z, law = brute_instance(inst)
        for v in range(n):
            m = sum(p * c[v] for c, p in law.items())
            assert st_.magnetizations[v] == pytest.approx(m, abs=1e-12)
        assert st_.log_z == pytest.approx(math.log(Z), rel=1e-12)
    for v in range(n):
        assert st_.magnetizations[v] == pytest.approx(2 * st_.marginals[v] - 1, abs=1e-13)
        assert -1 <= st_.magnetizations[v] <= 1


def test_log_domain_handles_large_fields():
    inst = IsingInstance(IsingGraph.path(4), 3.0, (50.0, -60.0, 45.0, 55.0))
    st_ = exact_stats(inst)
    assert math.isfinite(st_.log_z)
    assert st_.log_z > 200


def test_parallel_and_serial_agree():
    rng = np.random.default_rng(5)
    inst = random_instance(rng, 21, p=0.3)
    a = exact_stats(inst, [0, 5], pairs=[(0, 5)], threads=1)
    b = exact_stats(inst, [0, 5], pairs=[(0, 5)], threads=2)
    assert a.log_z == pytest.approx(b.log_z, abs=1e-10)
    assert a.magnetizations[5] == pytest.approx(b.magnetizations[5], abs=1e-12)


def test_dense_batch_matches_engine(rng):
    inst = random_instance(rng, 5, finite=False)
    got = batch_magnetizations(inst.graph, 1.0, np.array([inst.field]))[0]
    want = exact_stats(inst).magnetizations
    assert got == pytest.approx([want[v] for v in range(5)], abs=1e-12)


# ---------------------------------------------------------------- conditionals

def test_conditional_on_edge():
    assert conditional_expectation(edge(), 0, 1, 1) == pytest.approx(TANH1, abs=1e-14)


def test_conditional_disconnected_is_zero():
    inst = IsingInstance(IsingGraph(2), 1.0, (0.0, 0.0))
    assert conditional_expectation(inst, 0, 1, 1) == 0.0


def test_conditional_on_impossible_event():
    inst = IsingInstance(IsingGraph.path(2), 1.0, (0.0, math.inf))
    with pytest.raises(ImpossibleEventError):
        conditional_expectation(inst, 0, 1, -1)
    with pytest.raises(ImpossibleEventError):
        conditional_expectation(inst, 0, 1, -1, method="restrict")


@pytest.mark.parametrize("seed", range(8))
def test_total_expectation_and_both_routes(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 6)
    o, v = 0, 3
    st_ = exact_stats(inst, [o, v])
    pv = st_.marginals[v]
    plus = conditional_expectation(inst, o, v, 1)
    minus = conditional_expectation(inst, o, v, -1)
    assert pv * plus + (1 - pv) * minus == pytest.approx(st_.magnetizations[o], abs=1e-12)
    assert conditional_expectation(inst, o, v, 1, method="restrict") == pytest.approx(plus, abs=1e-12)
    # FKG: conditioning on + never lowers a spin
    assert plus - minus >= -1e-12


# ---------------------------------------------------------------- covariance

def test_covariance_edge():
    assert covariance(edge(), 0, 1) == pytest.approx(TANH1, abs=1e-14)


def test_covariance_pinned_is_zero():
    assert covariance(edge(g=(math.inf, 0.0)), 0, 1) == 0.0


def test_covariance_path_ends():
    inst = IsingInstance(IsingGraph.path(3), 1.0, (0.0,) * 3)
    assert covariance(inst, 0, 2) == pytest.approx(0.5800256583859739, abs=1e-14)


def test_covariance_needs_distinct_vertices():
    with pytest.raises(DomainError):
        covariance(edge(), 1, 1)


@pytest.mark.parametrize("seed", range(20))
def test_covariance_identity(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(2, 9))
    inst = random_instance(rng, n)
    u, v = rng.choice(n, 2, replace=False)
    pv = exact_stats(inst, [v]).marginals[v]
    rhs = 2 * pv * (1 - pv) * (conditional_expectation(inst, u, v, 1) - conditional_expectation(inst, u, v, -1))
    assert covariance(inst, u, v) == pytest.approx(rhs, abs=1e-10)


def test_covariance_is_field_derivative():
    rng = np.random.default_rng(3)
    inst = random_instance(rng, 5)
    a = 1e-5
    up = magnetization(reset_field(inst, 2, inst.field[2] + a), 0)
    dn = magnetization(reset_field(inst, 2, inst.field[2] - a), 0)
    assert (up - dn) / (2 * a) == pytest.approx(covariance(inst, 0, 2), abs=1e-4)


def _graphs_up_to(n):
    for g in nx.graph_atlas_g()[1:]:
        if g.number_of_nodes() > n:
            break
        yield g


def test_gks_monotone_in_couplings():
    for G in _graphs_up_to(5):
        n = G.number_of_nodes()
        if n < 2 or G.number_of_edges() == 0:
            continue
        es = list(G.edges())
        for J in (0.3, 1.0):
            base = IsingInstance(IsingGraph(n, tuple((u, v, J) for u, v in es)), 1.0, (0.0,) * n)
            pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
            ref = exact_stats(base, [], pairs=pairs).pair_products
            k = 0
            stronger = IsingInstance(
                IsingGraph(n, tuple((u, v, J + (0.5 if i == k else 0.0)) for i, (u, v) in enumerate(es))), 1.0, (0.0,) * n
            )
            bumped = exact_stats(stronger, [], pairs=pairs).pair_products
            missing = [(u, v) for u, v in pairs if not G.has_edge(u, v)]
            for p in pairs:
                assert bumped[p] >= ref[p] - 1e-12
            if missing:
                u, v = missing[0]
                added = IsingInstance(IsingGraph(n, base.graph.edges + ((u, v, J),)), 1.0, (0.0,) * n)
                more = exact_stats(added, [], pairs=pairs).pair_products
                for p in pairs:
                    assert more[p] >= ref[p] - 1e-12


# ---------------------------------------------------------------- effective fields

def test_effective_field_zero_for_zero_field():
    rng = np.random.default_rng(9)
    inst = random_instance(rng, 6).with_field([0.0] * 6)
    assert effective_field(inst, 2).lam == pytest.approx(0.0, abs=1e-13)


def test_pendant_neighbor_closed_form():
    inst = edge(J=0.7, g=(0.0, 1.3))
    assert effective_field(inst, 0).lam == pytest.approx(0.5774337302898892, abs=1e-13)


def test_path_effective_field_factorizes():
    g = (-2.0, -2.0, 0.0, 1.2, 3.0)
    inst = IsingInstance(IsingGraph.path(5), 1.0, g)
    left = IsingInstance(IsingGraph.path(3), 1.0, g[:3])
    right = IsingInstance(IsingGraph.path(3), 1.0, g[2:])
    total = effective_field(inst, 2).lam
    assert total == pytest.approx(effective_field(left, 2).lam + effective_field(right, 0).lam, abs=1e-12)
    assert total == pytest.approx(tree_effective_field(inst, 2), abs=1e-12)


def test_effective_field_rejects_pinned_target():
    with pytest.raises(DomainError):
        effective_field(edge(g=(math.inf, 0.0)), 0)


@pytest.mark.parametrize("seed", range(10))
def test_effective_field_reproduces_magnetization(seed):
    rng = np.random.default_rng(200 + seed)
    inst = random_instance(rng, 7)
    o = int(rng.integers(7))
    lam = effective_field(inst, o).lam
    assert math.tanh(lam + inst.field[o]) == pytest.approx(magnetization(inst, o), abs=1e-10)


def test_safe_atanh_saturates():
    assert safe_atanh(1.0) == 40.0 and safe_atanh(-1.0) == -40.0
    assert math.tanh(40.0) == 1.0


# ---------------------------------------------------------------- mixture

def test_alpha_infinite_field():
    assert mixture_alpha(edge(g=(0.0, math.inf)), 1) == 0.0


def test_alpha_isolated_vertex():
    inst = IsingInstance(IsingGraph(1), 1.0, (0.8,))
    assert mixture_alpha(inst, 0) == pytest.approx(1 - math.tanh(0.8), abs=1e-14)


def test_alpha_two_ways_on_edge():
    inst = edge(g=(0.0, 1.0))
    m_h = brute_mag(2, inst.graph.edges, 1.0, inst.field, 1)
    m_0 = brute_mag(2, inst.graph.edges, 1.0, (0.0, 0.0), 1)
    assert mixture_alpha(inst, 1) == pytest.approx((1 - m_h) / (1 - m_0), abs=1e-13)
    assert mixture_alpha(inst, 1) == pytest.approx(0.23840584404423504, abs=1e-13)


def test_alpha_degenerate_warns():
    with pytest.warns(DegenerateMixtureWarning):
        assert mixture_alpha(edge(), 1) == 1.0


def test_alpha_negative_field_rejected():
    with pytest.raises(DomainError):
        mixture_alpha(edge(g=(-0.1, 1.0)), 1)


@pytest.mark.parametrize("seed", range(15))
def test_mixture_decomposition(seed):
    rng = np.random.default_rng(300 + seed)
    n = int(rng.integers(2, 9))
    inst = random_instance(rng, n)
    h = np.abs(np.array(inst.field))
    v, o = (int(x) for x in rng.choice(n, 2, replace=False))
    alpha = mixture_alpha(inst.with_field(h), v)
    for sign in (1, -1):
        f = sign * h
        lhs = magnetization(inst.with_field(f), o)
        zero = magnetization(reset_field(inst.with_field(f), v, 0.0), o)
        pinned = magnetization(reset_field(inst.with_field(f), v, sign * math.inf), o)
        assert lhs == pytest.approx(alpha * zero + (1 - alpha) * pinned, abs=1e-10)


@given(st.floats(-4, 4), st.floats(0.01, 4), st.floats(0.05, 2))
def test_edge_alpha_in_unit_interval(g0, hv, J):
    alpha = mixture_alpha(edge(J=J, g=(abs(g0), hv)), 1)
    assert 0.0 <= alpha <= 1.0


@given(st.integers(0, 2**31 - 1))
def test_log_z_matches_direct_sum(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, int(rng.integers(1, 9)), scale=5.0)
    Z, _ = brute_instance(inst)
    assert math.exp(log_partition(inst)) == pytest.approx(Z, rel=1e-12)
