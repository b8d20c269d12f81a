"""Tests for the branch-and-bound driver and its adaptive components."""

import itertools
import time

import numpy as np
import pytest

from mobb.bounds import Kind, LowerBoundSet
from mobb.instances import GeneratorSpec, generate
from mobb.model import Instance, ModelError, enumerate_nondominated
from mobb.solver import (SolverConfig, Solver, add_level_cut,
                         choose_branch_variable, prune_redundant_cuts,
                         slb_weight, solve, sum_of_ratios_variable)


def tiny_kp():
    return Instance(C=[[-3, -1], [-1, -3]], A=[[1, 1]], b=[1], senses=("le",),
                    name="tiny_kp")


def oracle_front(inst):
    return sorted(s.image for s in enumerate_nondominated(inst))


ALL_STRATEGIES = ("depth", "breadth", "lhg", "hsz")


class TestSolveAgainstOracle:
    @pytest.mark.parametrize("strategy", ALL_STRATEGIES)
    def test_tiny_kp_every_strategy(self, strategy):
        points, entries, stats = solve(tiny_kp(),
                                       SolverConfig(node_selection=strategy))
        assert points == [(-3, -1), (-1, -3)]
        assert stats.solved

    def test_infeasible_instance_empty_and_solved(self):
        inst = Instance(C=[[1, 0], [0, 1]], A=[[1, 1]], b=[-1], senses=("le",))
        points, entries, stats = solve(inst, SolverConfig())
        assert points == [] and stats.solved

    def test_all_config_combinations_agree_with_oracle(self):
        inst = generate(GeneratorSpec(family="KP", p=3, seed=7, items=12))
        expected = oracle_front(inst)
        combos = itertools.product(ALL_STRATEGIES[:3], (False, True),
                                   (False, True))
        n_checked = 0
        for strategy, warmstart, ec in combos:
            cfg = SolverConfig(node_selection=strategy, warmstart=warmstart,
                               ec_enabled=ec, refine_max=5)
            points, _, stats = solve(inst, cfg)
            assert sorted(points) == expected, (strategy, warmstart, ec)
            assert stats.solved
            n_checked += 1
        assert n_checked == 12

    def test_entries_are_feasible_representatives(self):
        inst = generate(GeneratorSpec(family="GAP", p=2, seed=3, agents=2,
                                      jobs=4))
        points, entries, _ = solve(inst, SolverConfig())
        from mobb.model import evaluate, is_feasible
        for s in entries:
            assert is_feasible(inst, s.x)
            assert tuple(evaluate(inst, s.x)) == s.image
        assert [s.image for s in entries] == points

    def test_fathom_counters_cover_all_leaves(self):
        inst = generate(GeneratorSpec(family="KP", p=2, seed=11, items=10))
        _, _, stats = solve(inst, SolverConfig())
        assert sum(stats.fathomed.values()) + stats.branched == stats.nodes_explored


class TestLevelCut:
    def test_rounding_both_sides(self):
        # lam.C = (1.2, -0.4), rhs 2.7 rounds to 2x1 + 0x2 >= 2
        coeffs, rhs = add_level_cut(np.array([[1.2, -0.4]]), np.array([1.0]), 2.7)
        assert list(coeffs) == [2, 0]
        assert rhs == 2

    def test_integer_data_unchanged(self):
        coeffs, rhs = add_level_cut(np.array([[3.0, -2.0]]), np.array([1.0]), 4.0)
        assert list(coeffs) == [3, -2]
        assert rhs == 4

    def test_trivially_redundant_dropped(self):
        assert add_level_cut(np.array([[-0.1]]), np.array([1.0]), -0.9) is None

    def test_cut_valid_for_binary_points(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(1, 7))
            C = rng.integers(-9, 10, (2, n))
            lam = rng.random(2)
            a_bar = lam @ C
            # the rounded cut must hold whenever the fractional one does
            coeffs_rhs = add_level_cut(C, lam, float(rng.uniform(-20, 5)))
            if coeffs_rhs is None:
                continue
            coeffs, rhs = coeffs_rhs
            for bits in range(1 << n):
                x = np.array([(bits >> k) & 1 for k in range(n)])
                if float(a_bar @ x) >= rhs:
                    assert int(coeffs @ x) >= rhs


class TestPruneRedundantCuts:
    def _bound_with_solutions(self, sols):
        return LowerBoundSet(kind=Kind.FULL, hyperplanes=[],
                             extreme_points=[np.zeros(2) for _ in sols],
                             extreme_solutions=[np.asarray(s, dtype=float)
                                                for s in sols])

    def test_slack_cut_removed(self):
        L = self._bound_with_solutions([(1.0, 1.0)])
        cuts = [(np.array([1, 1]), 0)]  # slack 2 at the only extreme solution
        assert prune_redundant_cuts(cuts, L) == []

    def test_tight_cut_kept(self):
        L = self._bound_with_solutions([(1.0, 0.0)])
        cuts = [(np.array([1, 1]), 1)]
        assert prune_redundant_cuts(cuts, L) == cuts

    def test_empty_pool_noop(self):
        L = self._bound_with_solutions([(1.0, 0.0)])
        assert prune_redundant_cuts([], L) == []


class TestBranchingRules:
    def test_most_often_fractional(self):
        inst = Instance(C=[[1, 1, 1], [1, 1, 1]], A=[[1, 1, 1]], b=[3],
                        senses=("le",))
        L = LowerBoundSet(kind=Kind.FULL, hyperplanes=[],
                          extreme_solutions=[np.array([0.5, 1.0, 0.0]),
                                             np.array([0.5, 0.2, 0.0])])
        j = choose_branch_variable(inst, L, [0, 1, 2], SolverConfig())
        assert j == 0  # fractional in both solutions

    def test_sum_of_ratios_formula(self):
        inst = Instance(C=[[3, 1], [1, 3]], A=[[1, 2]], b=[3], senses=("le",))
        # summed |objective| per variable (4, 4), weights (1, 2) -> ratios (4, 2)
        assert sum_of_ratios_variable(inst, [0, 1]) == 0

    def test_integral_solutions_fall_back_to_ratio_rule(self):
        inst = Instance(C=[[3, 1], [1, 3]], A=[[1, 2]], b=[3], senses=("le",))
        L = LowerBoundSet(kind=Kind.FULL, hyperplanes=[],
                          extreme_solutions=[np.array([1.0, 0.0])])
        assert choose_branch_variable(inst, L, [0, 1], SolverConfig()) == 0

    def test_ratio_ties_take_lowest_index(self):
        inst = Instance(C=[[2, 2], [2, 2]], A=[[1, 1]], b=[2], senses=("le",))
        assert sum_of_ratios_variable(inst, [0, 1]) == 0


class TestSlbWeight:
    def test_two_point_normal(self):
        lubs = np.array([[6, 9], [9, 7], [10, 5]])
        lam = slb_weight(lubs, 2)
        # per-objective minimizers (6,9) and (10,5); the line through them
        # has normal proportional to (1, 1)
        assert lam == pytest.approx([0.5, 0.5])

    def test_negative_normal_falls_back_to_equal_weights(self):
        # minimizers (0,10,10) / (10,0,0) / (10,0,0)... degenerate rank
        lubs = np.array([[0, 10, 10], [10, 0, 0]])
        lam = slb_weight(lubs, 3)
        assert lam == pytest.approx([1 / 3] * 3)

    def test_empty_parent_set_gives_equal_weights(self):
        assert slb_weight(None, 2) == pytest.approx([0.5, 0.5])
        assert slb_weight(np.empty((0, 2)), 2) == pytest.approx([0.5, 0.5])


class TestWarmstart:
    def test_tiny_kp_incumbents_found_before_search(self):
        solver = Solver(tiny_kp(), SolverConfig(warmstart=True))
        solver._deadline = time.monotonic() + 60
        assert solver.warmstart()
        assert sorted(solver.U.images()) == [(-3, -1), (-1, -3)]

    def test_infeasible_root_detected(self):
        inst = Instance(C=[[1, 0], [0, 1]], A=[[1, 1]], b=[-1], senses=("le",))
        points, _, stats = solve(inst, SolverConfig(warmstart=True))
        assert points == [] and stats.solved


class TestSchedules:
    def test_ec_iterations_are_multiples_of_n(self):
        inst = generate(GeneratorSpec(family="KP", p=2, seed=5, items=10))
        _, _, stats = solve(inst, SolverConfig(warmstart=True, ec_enabled=True,
                                               node_selection="lhg"))
        n = inst.n
        assert stats.ec_iterations
        for it in stats.ec_iterations:
            assert it % n == 0 and it <= inst.p * n * n

    def test_slb_triggers_only_at_multiples_of_level(self):
        inst = generate(GeneratorSpec(family="KP", p=2, seed=6, items=12))
        _, _, stats = solve(inst, SolverConfig(slb_enabled=True, slb_level=3,
                                               refine_max=5))
        assert stats.slb_depths
        for _, depth in stats.slb_depths:
            assert depth >= 3 and depth % 3 == 0

    def test_te_triggers_exactly_at_threshold(self):
        inst = generate(GeneratorSpec(family="KP", p=2, seed=8, items=14))
        cfg = SolverConfig(te_enabled=True, te_threshold=10, trace=True)
        _, _, stats = solve(inst, cfg)
        assert stats.te_iterations
        for _, free in stats.te_iterations:
            assert free <= 10
        # every traced node with few enough free variables was enumerated
        for rec in stats.trace:
            if rec["free"] <= 10 and rec["free"] > 0:
                assert rec["outcome"] == "enumeration"

    def test_te_threshold_boundary_not_triggered(self):
        inst = generate(GeneratorSpec(family="KP", p=2, seed=8, items=11))
        cfg = SolverConfig(te_enabled=True, te_threshold=10, trace=True)
        _, _, stats = solve(inst, cfg)
        roots = [r for r in stats.trace if r["free"] == 11]
        assert roots and all(r["outcome"] != "enumeration" for r in roots)

    def test_te_results_match_oracle(self):
        inst = generate(GeneratorSpec(family="KP", p=3, seed=9, items=12))
        points, _, _ = solve(inst, SolverConfig(te_enabled=True, refine_max=5))
        assert sorted(points) == oracle_front(inst)


class TestConfigValidation:
    def test_te_threshold_above_cap_rejected(self):
        with pytest.raises(ModelError):
            SolverConfig(te_threshold=30, enum_cap=25)

    def test_bad_strategy_rejected(self):
        with pytest.raises(ModelError):
            SolverConfig(node_selection="best-first")

    def test_bad_slb_level_rejected(self):
        with pytest.raises(ModelError):
            SolverConfig(slb_level=0)


class TestNoFalsePruning:
    def test_dominance_fathomed_subtrees_add_nothing(self):
        for seed in (1, 2, 3):
            inst = generate(GeneratorSpec(family="KP", p=2, seed=seed, items=10))
            cfg = SolverConfig(collect_fathomed=True, refine_max=5)
            points, _, stats = solve(inst, cfg)
            front = set(points)
            from mobb.model import weakly_dominates
            for fixings, cause in stats.fathom_log:
                if cause != "dominance":
                    continue
                for s in enumerate_nondominated(inst, fixings):
                    assert any(weakly_dominates(f, s.image) for f in front)


class TestDeterminism:
    def test_repeated_runs_identical(self):
        inst = generate(GeneratorSpec(family="UFLP", p=2, seed=4, facilities=2,
                                      customers=3))
        cfg = SolverConfig(node_selection="lhg", warmstart=True, ec_enabled=True)
        first = solve(inst, cfg)
        second = solve(inst, cfg)
        assert first[0] == second[0]
        assert first[2].nodes_explored == second[2].nodes_explored
        assert first[2].ips == second[2].ips
