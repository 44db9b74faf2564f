import math

import pytest

from isingbound import ConstructionError
from isingbound.inequalities import (
    counterexample_path,
    counterexample_tree,
    effective_coupling_insertion_check,
    solve_tree_field,
)
from isingbound.inequalities.counterexamples import effective_coupling, path_balance, path_gap, tree_instance

TWO_TANH1 = 1.5231883119115297


@pytest.fixture(scope="module")
def path_cert():
    return counterexample_path()


@pytest.fixture(scope="module")
def tree_cert():
    return counterexample_tree()


def test_path_root(path_cert):
    assert path_cert.g1 == pytest.approx(1.9466810978198215, abs=1e-12)
    assert path_cert.g1 < 2 < path_cert.g2 == 3.0
    assert path_balance(path_cert.g1, 3.0) == pytest.approx(0.0, abs=1e-14)


def test_path_endpoints(path_cert):
    assert path_cert.d0 == pytest.approx(TWO_TANH1, abs=1e-12)
    assert path_cert.d1 == pytest.approx(TWO_TANH1, abs=1e-9)


def test_path_interior_dip(path_cert):
    assert path_gap(path_cert.instance, 0.5) == pytest.approx(1.5226664663827412, abs=1e-10)
    assert path_cert.d1 - path_gap(path_cert.instance, 0.5) > 1e-4
    lam, val = path_cert.best_interior
    assert 0 < lam < 1 and path_cert.drop > 1e-4
    assert path_cert.certified
    assert len(path_cert.to_dict()["table"]) == 101


def test_path_needs_g2_above_two():
    with pytest.raises(ConstructionError):
        counterexample_path(g2=1.5)


def test_tree_field(tree_cert):
    assert tree_cert.g_a == pytest.approx(-1.1263165196371971, abs=1e-12)
    assert tree_cert.g_a < -1


def test_tree_certificate(tree_cert):
    assert tree_cert.covariances[0] == pytest.approx(math.tanh(1), abs=1e-13)
    assert abs(tree_cert.margin_at_one) <= 1e-9
    lam, margin = tree_cert.best_interior
    assert margin > 1e-5 and 0 < lam < 1
    assert tree_cert.non_monotone and tree_cert.certified


@pytest.mark.parametrize("j", [0.0, 1.0, 1.5])
def test_tree_rejects_out_of_range(j):
    with pytest.raises(ConstructionError):
        solve_tree_field(j)


def test_tree_too_weak_coupling():
    with pytest.raises(ConstructionError, match="too weak"):
        solve_tree_field(0.3)


def test_tree_instance_layout():
    inst = tree_instance(0.9, -1.5)
    assert inst.field == (0.0, 0.0, -1.5, 1.0)
    assert tree_instance(0.9, -1.5, inserted=True).n == 5


def test_insertion_joint_law():
    chk = effective_coupling_insertion_check(with_tree=False)
    assert chk.coupling == pytest.approx(0.5 * math.log(math.cosh(2)), abs=1e-15)
    assert 0 < chk.coupling < 1
    assert chk.max_abs_diff <= 1e-12
    assert chk.joint_chain["+1+1"] == pytest.approx(chk.joint_chain["-1-1"], abs=1e-15)
    assert chk.joint_chain["+1+1"] == pytest.approx(0.3950064145964934, abs=1e-13)
    assert chk.ok


def test_inserted_tree_balances_with_pinned_leaf():
    # tanh of the effective coupling equals tanh(1)**2, so only g_a = -inf balances
    assert math.tanh(effective_coupling()) == pytest.approx(math.tanh(1) ** 2, abs=1e-15)
    cert = counterexample_tree(inserted=True)
    assert cert.g_a == -math.inf
    assert abs(cert.margin_at_one) <= 1e-9
    assert cert.certified
