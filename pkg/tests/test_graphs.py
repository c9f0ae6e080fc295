import itertools

import numpy as np
import pytest

from rewardcalc import (
    Diamond,
    EnumerationCapError,
    GraphInvariantError,
    LassoTrajectory,
    Trajectory,
    Transition,
    TransitionGraph,
    enumerate_deterministic_dynamics,
    enumerate_diamonds,
    enumerate_trajectories,
    topology_report,
    validate,
)
from util import random_graph


def simple_graph(gamma=0.9):
    return TransitionGraph(
        ["s0", "s1"],
        ["a"],
        [("s0", "a", "s0"), ("s0", "a", "s1"), ("s1", "a", "s0"), ("s1", "a", "s1")],
        gamma,
    )


class TestValidate:
    def test_dead_end_reported(self):
        g = TransitionGraph(["s0", "s1"], ["a"], [("s0", "a", "s0")], 0.9)
        assert "dead end: s1" in validate(g)

    def test_single_selfloop_ok(self):
        g = TransitionGraph(["s0"], ["a"], [("s0", "a", "s0")], 0.9)
        assert validate(g) == []

    def test_gamma_out_of_range(self):
        g = TransitionGraph(["s0"], ["a"], [("s0", "a", "s0")], 1.2)
        assert any(v.startswith("gamma out of range") for v in validate(g))

    def test_bad_weights_and_unknown_endpoints(self):
        g = TransitionGraph(
            {"s0": -1.0},
            ["a"],
            [("s0", "a", "s0", 0.0), ("s0", "b", "sX")],
            0.9,
        )
        v = validate(g)
        assert any("non-positive state weight" in msg for msg in v)
        assert any("non-positive transition weight" in msg for msg in v)
        assert any("unknown destination state" in msg for msg in v)
        assert any("unknown action" in msg for msg in v)

    def test_duplicate_transition(self):
        g = TransitionGraph(
            ["s0"], ["a"], [("s0", "a", "s0", 1.0), ("s0", "a", "s0", 2.0)], 0.9
        )
        assert any("duplicate transition" in msg for msg in validate(g))

    def test_operations_reject_invalid(self):
        g = TransitionGraph(["s0", "s1"], ["a"], [("s0", "a", "s0")], 0.9)
        with pytest.raises(GraphInvariantError):
            topology_report(g)


class TestTrajectoryTypes:
    def test_chain_mismatch_rejected(self):
        with pytest.raises(ValueError):
            Trajectory("s0", (("s0", "a", "s1"), ("s2", "a", "s0")))

    def test_from_pairs(self):
        t = Trajectory.from_pairs("s0", [("a", "s1"), ("a", "s0")])
        assert t.steps == (("s0", "a", "s1"), ("s1", "a", "s0"))
        assert t.end == "s0" and t.length == 2

    def test_empty_trajectory(self):
        t = Trajectory("s0")
        assert t.end == "s0" and t.length == 0

    def test_lasso_invariants(self):
        loop = Trajectory("s1", (("s1", "a", "s1"),))
        prefix = Trajectory("s0", (("s0", "a", "s1"),))
        lasso = LassoTrajectory(prefix, loop)
        assert lasso.start == "s0"
        assert lasso.unroll(3).steps == (
            ("s0", "a", "s1"),
            ("s1", "a", "s1"),
            ("s1", "a", "s1"),
        )
        with pytest.raises(ValueError):
            LassoTrajectory(prefix, Trajectory("s1"))  # empty cycle
        with pytest.raises(ValueError):
            LassoTrajectory(Trajectory("s0"), loop)  # prefix does not reach cycle
        with pytest.raises(ValueError):
            LassoTrajectory(prefix, Trajectory("s1", (("s1", "a", "s2"),)))  # open cycle

    def test_diamond_invariants(self):
        leg = Trajectory("s0", (("s0", "a", "s1"), ("s1", "a", "s0")))
        other = Trajectory("s0", (("s0", "a", "s0"), ("s0", "a", "s0")))
        Diamond(leg, other)
        with pytest.raises(ValueError):
            Diamond(leg, Trajectory("s0", (("s0", "a", "s1"),)))


class TestTopology:
    def test_complete_two_by_two(self):
        g = TransitionGraph(
            ["s0", "s1"],
            ["a", "b"],
            [
                (s, a, d)
                for s in ("s0", "s1")
                for a in ("a", "b")
                for d in ("s0", "s1")
            ],
            0.9,
        )
        rep = topology_report(g)
        assert rep.is_complete
        assert rep.has_distinguishing_actions
        assert rep.is_diamond_complete
        assert rep.every_state_in_loop
        assert rep.reachable_from["s0"] == frozenset({"s0", "s1"})

    def test_single_action_fork_lacks_distinguishing_actions(self):
        g = TransitionGraph(
            ["s0", "s1", "s2"],
            ["a"],
            [
                ("s0", "a", "s1"),
                ("s0", "a", "s2"),
                ("s1", "a", "s1"),
                ("s2", "a", "s2"),
            ],
            0.9,
        )
        assert not topology_report(g).has_distinguishing_actions

    def test_single_selfloop_flags(self):
        g = TransitionGraph(["s0"], ["a"], [("s0", "a", "s0")], 0.9)
        rep = topology_report(g)
        assert rep.every_state_in_loop
        assert rep.is_diamond_complete

    def test_is_complete_iff_transition_count(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            g = random_graph(rng, max_states=4, max_actions=2, density=0.5)
            rep = topology_report(g)
            assert rep.is_complete == (
                g.n_transitions == g.n_states ** 2 * len(g.actions)
            )

    def test_complete_implies_distinguishing(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            n = int(rng.integers(2, 4))
            m = int(rng.integers(2, 4))
            states = [f"s{i}" for i in range(n)]
            actions = [f"a{i}" for i in range(m)]
            g = TransitionGraph(
                states,
                actions,
                [(s, a, d) for s in states for a in actions for d in states],
                0.9,
            )
            rep = topology_report(g)
            assert rep.is_complete and rep.has_distinguishing_actions


class TestEnumerateTrajectories:
    def test_length_zero(self):
        g = simple_graph()
        assert enumerate_trajectories(g, "s0", 0) == [Trajectory("s0")]

    def test_selfloop_single_path(self):
        g = TransitionGraph(["s0"], ["a"], [("s0", "a", "s0")], 0.9)
        assert len(enumerate_trajectories(g, "s0", 3)) == 1

    def test_complete_two_states(self):
        assert len(enumerate_trajectories(simple_graph(), "s0", 2)) == 4

    def test_count_matches_matrix_power(self):
        from util import oracle_trajectory_count

        rng = np.random.default_rng(11)
        for _ in range(25):
            g = random_graph(rng, max_states=5, max_actions=2, density=0.3)
            start = g.states[int(rng.integers(g.n_states))]
            length = int(rng.integers(0, 6))
            assert len(enumerate_trajectories(g, start, length)) == (
                oracle_trajectory_count(g, start, length)
            )

    def test_cap_guard(self):
        g = simple_graph()
        with pytest.raises(EnumerationCapError):
            enumerate_trajectories(g, "s0", 10, cap=100)

    def test_lexicographic_order(self):
        g = simple_graph()
        trajs = enumerate_trajectories(g, "s0", 2)
        keys = [t.steps for t in trajs]
        assert keys == sorted(keys)


class TestEnumerateDiamonds:
    def test_single_selfloop(self):
        g = TransitionGraph(["s0"], ["a"], [("s0", "a", "s0")], 0.9)
        ds = enumerate_diamonds(g)
        assert len(ds) == 1
        assert ds[0].first == ds[0].second

    def test_three_cycle(self):
        g = TransitionGraph(
            ["s0", "s1", "s2"],
            ["a"],
            [("s0", "a", "s1"), ("s1", "a", "s2"), ("s2", "a", "s0")],
            0.9,
        )
        ds = enumerate_diamonds(g)
        assert len(ds) == 3
        assert all(d.first == d.second for d in ds)

    def test_complete_two_states_single_action(self):
        assert len(enumerate_diamonds(simple_graph())) == 16

    def test_matches_bruteforce_pairing(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            g = random_graph(rng, max_states=4, max_actions=2, density=0.3)
            expected = set()
            for s in g.states:
                legs = enumerate_trajectories(g, s, 2)
                for t1, t2 in itertools.product(legs, legs):
                    if t1.end == t2.end:
                        expected.add((t1.steps, t2.steps))
            got = {(d.first.steps, d.second.steps) for d in enumerate_diamonds(g)}
            assert got == expected

    def test_legs_are_valid(self):
        rng = np.random.default_rng(4)
        g = random_graph(rng, max_states=5, max_actions=2, density=0.4)
        for d in enumerate_diamonds(g):
            assert d.first.start == d.second.start and d.first.end == d.second.end
            for step in d.first.steps + d.second.steps:
                assert g.has_transition(step)


class TestEnumerateDynamics:
    def fork_graph(self):
        return TransitionGraph(
            ["s0", "s1"],
            ["a"],
            [
                ("s0", "a", "s0"),
                ("s0", "a", "s1"),
                ("s1", "a", "s0"),
                ("s1", "a", "s1"),
            ],
            0.9,
        )

    def test_product_count(self):
        enum = enumerate_deterministic_dynamics(self.fork_graph())
        assert enum.total_count == 4
        assert len(list(enum)) == 4

    def test_deterministic_graph_single_dynamics(self):
        g = TransitionGraph(
            ["s0", "s1"], ["a"], [("s0", "a", "s1"), ("s1", "a", "s0")], 0.9
        )
        enum = enumerate_deterministic_dynamics(g)
        assert enum.total_count == 1 and not enum.truncated
        assert len(list(enum)) == 1

    def test_budget_truncation(self):
        enum = enumerate_deterministic_dynamics(self.fork_graph(), budget=3)
        assert enum.total_count == 4
        assert enum.truncated
        assert len(list(enum)) == 3

    def test_all_yielded_compatible(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            g = random_graph(rng, max_states=3, max_actions=2, density=0.4)
            for dyn in enumerate_deterministic_dynamics(g, budget=50):
                assert dyn.compatibility_violations(g) == []

    def test_full_support_default(self):
        enum = enumerate_deterministic_dynamics(self.fork_graph())
        dyn = next(iter(enum))
        assert dyn.initial_support == frozenset({"s0", "s1"})


def test_transition_key():
    t = Transition("s0", "a", "s1", 2.0)
    assert t.key == ("s0", "a", "s1")
