import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from entgames.games import AdviceEnsemble
from entgames.random_states import haar_state, rng_for
from entgames.sic import (
    SuperposedState,
    build_decoupling,
    check_bound_at_delta_zero,
    check_supercos,
    rel_ent_game_shift_check,
    sic_lower_bound,
    sic_objective,
    sic_terms,
    special_case_report,
)

UNIFORM2 = np.full((2, 2), 0.25)


def constant_advice(k: int = 2, da: int = 2, db: int = 2) -> np.ndarray:
    bell = np.zeros((da, db), dtype=complex)
    m = min(da, db)
    bell[np.arange(m), np.arange(m)] = 1 / math.sqrt(m)
    return np.broadcast_to(bell, (k, k, da, db)).copy()


def revealing_advice(k: int = 2) -> np.ndarray:
    states = np.zeros((k, k, k, k), dtype=complex)
    for x in range(k):
        for y in range(k):
            states[x, y, y, x] = 1.0     # A learns y, B learns x
    return states


def random_product_instance(rng, k: int = 2, da: int = 2, db: int = 2) -> SuperposedState:
    px = rng.dirichlet(np.ones(k))
    py = rng.dirichlet(np.ones(k))
    states = np.zeros((k, k, da, db), dtype=complex)
    for x in range(k):
        for y in range(k):
            states[x, y] = haar_state(rng, da * db).reshape(da, db)
    return SuperposedState.build(np.outer(px, py), states)


class TestSuperposedState:
    def test_build_layout(self):
        om = SuperposedState.build(UNIFORM2, constant_advice())
        assert om.k == 2 and om.dims() == (2, 2)
        assert om.state.layout.labels == ("X", "A", "B", "Y")

    def test_rejects_bad_distribution(self):
        with pytest.raises(ValueError):
            SuperposedState.build(np.full((2, 2), 0.3), constant_advice())

    def test_rejects_arity_mismatch(self):
        with pytest.raises(ValueError):
            SuperposedState.build(np.full((3, 3), 1 / 9), constant_advice(k=2))

    def test_rejects_foreign_ensemble(self):
        skew = np.array([[0.4, 0.1], [0.1, 0.4]])
        adv = AdviceEnsemble(constant_advice(), skew)
        with pytest.raises(ValueError):
            SuperposedState.build(UNIFORM2, adv)


class TestObjective:
    def test_constant_advice_is_free(self):
        om = SuperposedState.build(UNIFORM2, constant_advice())
        tx, ty = sic_terms(om)
        assert abs(tx) <= 1e-9 and abs(ty) <= 1e-9
        assert abs(sic_objective(om)) <= 1e-9

    def test_revealing_advice_costs_two_bits(self):
        om = SuperposedState.build(UNIFORM2, revealing_advice())
        tx, ty = sic_terms(om)
        assert_allclose((tx, ty), (1.0, 1.0), atol=1e-9)

    def test_one_sided_advice(self):
        # A carries y, B carries nothing: only the second term pays
        states = np.zeros((2, 2, 2, 1), dtype=complex)
        for x in range(2):
            for y in range(2):
                states[x, y, y, 0] = 1.0
        om = SuperposedState.build(UNIFORM2, states)
        tx, ty = sic_terms(om)
        assert abs(tx) <= 1e-9
        assert_allclose(ty, 1.0, atol=1e-9)

    def test_objective_is_sum(self):
        om = random_product_instance(rng_for(4))
        tx, ty = sic_terms(om)
        assert_allclose(sic_objective(om), tx + ty, atol=1e-12)


class TestDecoupling:
    def test_requires_product_distribution(self):
        corr = np.array([[0.5, 0.0], [0.0, 0.5]])
        states = constant_advice()
        adv = AdviceEnsemble(states, corr)
        om = SuperposedState.build(corr, adv)
        with pytest.raises(ValueError, match="product"):
            build_decoupling(om)

    def test_constant_advice_decouples_exactly(self):
        om = SuperposedState.build(UNIFORM2, constant_advice())
        res = build_decoupling(om)
        assert res.delta_in <= 1e-9
        assert res.fbar_alice <= 1e-9
        assert res.fbar_out <= 1e-9

    def test_isometries_are_isometries(self):
        om = random_product_instance(rng_for(8))
        res = build_decoupling(om)
        for u in res.isometries_alice:
            assert_allclose(u.conj().T @ u, np.eye(u.shape[1]), atol=1e-10)
        for v in res.isometries_bob:
            assert_allclose(v.conj().T @ v, np.eye(v.shape[1]), atol=1e-10)

    def test_isometry_shapes(self):
        om = random_product_instance(rng_for(9), k=2, da=3, db=2)
        res = build_decoupling(om)
        assert res.isometries_alice.shape == (2, 6, 3)
        assert res.isometries_bob.shape == (2, 4, 2)

    def test_defect_bounds_on_random_instances(self):
        rng = rng_for(21)
        for _ in range(10):
            om = random_product_instance(rng)
            res = build_decoupling(om)
            assert res.delta_in == max(res.delta_x, res.delta_y)
            assert res.fbar_alice <= 9.0 * res.delta_x + 1e-6
            assert res.fbar_out <= 81.0 * res.delta_in + 1e-6

    def test_output_states_normalized(self):
        om = random_product_instance(rng_for(33))
        res = build_decoupling(om)
        assert_allclose(np.linalg.norm(res.state_alice.amplitudes), 1.0, atol=1e-9)
        assert_allclose(np.linalg.norm(res.state_out.amplitudes), 1.0, atol=1e-9)


class TestScalarBound:
    def test_range_errors(self):
        with pytest.raises(ValueError):
            sic_lower_bound(-0.1, 0.0)
        with pytest.raises(ValueError):
            sic_lower_bound(0.5, 1.2)

    def test_endpoints(self):
        assert sic_lower_bound(0.0, 0.0) == 0.0
        assert_allclose(sic_lower_bound(1.0, 0.0), 1.0 / 81.0, atol=1e-15)

    def test_delta_zero_formula(self):
        for eps in (0.1, 0.37, 0.9):
            assert_allclose(sic_lower_bound(eps, 0.0),
                            (1.0 - math.sqrt(1.0 - eps)) / 81.0, atol=1e-15)


class TestGrids:
    def test_delta_zero_bound_holds(self):
        rep = check_bound_at_delta_zero(grid_size=2000)
        assert rep.holds_everywhere and rep.n_failures == 0
        assert rep.worst_margin >= 0.0

    def test_special_case_fails(self):
        rep = special_case_report(grid_size=2000)
        assert not rep.holds_everywhere
        assert rep.n_failures > 0
        assert -1e-4 < rep.worst_margin < 0.0
        assert 0.10 < rep.worst_point < 0.25
        assert "FAILS" in rep.summary()

    def test_weaker_divisor_holds(self):
        # doubling the divisor restores the inequality everywhere
        rep = special_case_report(grid_size=2000, divisor=648.0)
        assert rep.holds_everywhere

    def test_supercos_holds(self):
        rep = check_supercos(grid_size=2000)
        assert rep.holds_everywhere
        assert rep.worst_margin >= -1e-12


class TestShiftCheck:
    def test_holds_across_epsilons(self):
        for eps in (0.05, 0.1, 0.5, 1.0):
            rep = rel_ent_game_shift_check(eps)
            assert rep.holds
            assert rep.min_slack > 0.0
            assert rep.max_premise_omega <= 1.0 - eps / 4.0 + 1e-9

    def test_epsilon_range(self):
        with pytest.raises(ValueError):
            rel_ent_game_shift_check(0.0)
        with pytest.raises(ValueError):
            rel_ent_game_shift_check(1.5)
