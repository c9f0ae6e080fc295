"""Finite weighted transition graphs and their combinatorial machinery.

A transition graph is the tuple (states, actions, transitions, gamma) plus
strictly positive weights on states and transitions.  States and actions are
text labels ordered lexicographically; every enumeration in this module is
deterministic with respect to that order.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import EnumerationCapError, GraphInvariantError

TransitionKey = tuple[str, str, str]

TRAJECTORY_CAP = 10 ** 6
DYNAMICS_BUDGET = 10 ** 4


class Transition(NamedTuple):
    src: str
    action: str
    dst: str
    weight: float = 1.0

    @property
    def key(self) -> TransitionKey:
        return (self.src, self.action, self.dst)


def _as_transition(t) -> Transition:
    if isinstance(t, Transition):
        return t
    if len(t) == 3:
        return Transition(t[0], t[1], t[2], 1.0)
    return Transition(t[0], t[1], t[2], float(t[3]))


class TransitionGraph:
    """Immutable transition graph with canonical (lexicographic) ordering.

    Construction is permissive: structural problems (dead ends, bad weights,
    duplicate entries, unknown endpoints) are recorded and reported by
    :func:`validate` rather than raised, so that files can be loaded and
    diagnosed.  Operations that need a well-formed graph call
    :meth:`require_valid` first.

    ``states`` may be a mapping ``id -> weight`` or an iterable of ids
    (weight 1.0) or ``(id, weight)`` pairs.
    """

    def __init__(self, states, actions: Iterable[str], transitions, gamma: float):
        pairs, dup_states = _normalize_states(states)
        self.states: tuple[str, ...] = tuple(s for s, _ in pairs)
        self.state_weights: dict[str, float] = dict(pairs)

        actions = [str(a) for a in actions]
        self.actions: tuple[str, ...] = tuple(sorted(set(actions)))
        dup_actions = sorted({a for a in actions if actions.count(a) > 1})

        self.transitions: tuple[Transition, ...] = tuple(
            sorted((_as_transition(t) for t in transitions), key=lambda t: t.key)
        )
        self.gamma = float(gamma)

        self._state_index = {s: i for i, s in enumerate(self.states)}
        self._action_set = set(self.actions)
        self._transition_index: dict[TransitionKey, int] = {}
        dup_transitions = []
        for i, t in enumerate(self.transitions):
            if t.key in self._transition_index:
                dup_transitions.append(t.key)
            else:
                self._transition_index[t.key] = i

        self._construction_violations = (
            [f"duplicate state id: {s}" for s in dup_states]
            + [f"duplicate action id: {a}" for a in dup_actions]
            + [f"duplicate transition: {k}" for k in dup_transitions]
        )
        self._validation: list[str] | None = None
        self._arrays = None
        self._laplacian_cache = None

    # -- basic accessors ---------------------------------------------------

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_transitions(self) -> int:
        return len(self.transitions)

    def state_index(self, s: str) -> int:
        return self._state_index[s]

    def has_transition(self, key: TransitionKey) -> bool:
        return key in self._transition_index

    def transition_index(self, key: TransitionKey) -> int:
        return self._transition_index[key]

    def transition_keys(self) -> list[TransitionKey]:
        return [t.key for t in self.transitions]

    def out_transitions(self, s: str) -> tuple[Transition, ...]:
        self.require_valid()
        return self._out[s]

    def in_transitions(self, s: str) -> tuple[Transition, ...]:
        self.require_valid()
        return self._in[s]

    def successors(self, s: str) -> tuple[str, ...]:
        """Distinct successor states of s under any action, sorted."""
        return tuple(sorted({t.dst for t in self.out_transitions(s)}))

    def sa_successors(self, s: str, a: str) -> tuple[str, ...]:
        self.require_valid()
        return self._sa.get((s, a), ())

    # -- validation ---------------------------------------------------------

    def validate(self) -> list[str]:
        """All invariant violations, empty when the graph is well-formed."""
        if self._validation is not None:
            return list(self._validation)
        v = list(self._construction_violations)
        for s in self.states:
            if not s:
                v.append("empty state id")
            w = self.state_weights[s]
            if not (np.isfinite(w) and w > 0):
                v.append(f"non-positive state weight: {s} -> {w}")
        for a in self.actions:
            if not a:
                v.append("empty action id")
        outgoing = {s: 0 for s in self.states}
        for t in self.transitions:
            if t.src not in self._state_index:
                v.append(f"unknown source state: {t.key}")
            if t.dst not in self._state_index:
                v.append(f"unknown destination state: {t.key}")
            if t.action not in self._action_set:
                v.append(f"unknown action: {t.key}")
            if not (np.isfinite(t.weight) and t.weight > 0):
                v.append(f"non-positive transition weight: {t.key} -> {t.weight}")
            if t.src in outgoing:
                outgoing[t.src] += 1
        if not (np.isfinite(self.gamma) and 0.0 <= self.gamma <= 1.0):
            v.append(f"gamma out of range: {self.gamma}")
        for s in self.states:
            if outgoing[s] == 0:
                v.append(f"dead end: {s}")
        self._validation = v
        return list(v)

    def require_valid(self) -> None:
        violations = self.validate()
        if violations:
            raise GraphInvariantError(violations)
        if self._arrays is None:
            self._build_tables()

    def _build_tables(self) -> None:
        out: dict[str, list[Transition]] = {s: [] for s in self.states}
        inc: dict[str, list[Transition]] = {s: [] for s in self.states}
        sa: dict[tuple[str, str], list[str]] = {}
        for t in self.transitions:
            out[t.src].append(t)
            inc[t.dst].append(t)
            sa.setdefault((t.src, t.action), []).append(t.dst)
        self._out = {s: tuple(ts) for s, ts in out.items()}
        self._in = {s: tuple(sorted(ts, key=lambda t: t.key)) for s, ts in inc.items()}
        self._sa = {k: tuple(ds) for k, ds in sa.items()}
        self._arrays = (
            np.array([self._state_index[t.src] for t in self.transitions], dtype=np.intp),
            np.array([self._state_index[t.dst] for t in self.transitions], dtype=np.intp),
            np.array([t.weight for t in self.transitions], dtype=np.float64),
            np.array([self.state_weights[s] for s in self.states], dtype=np.float64),
        )

    @property
    def index_arrays(self):
        """(src_index, dst_index, transition_weights, state_weights) arrays."""
        self.require_valid()
        return self._arrays


def _normalize_states(states) -> tuple[list[tuple[str, float]], list[str]]:
    if isinstance(states, Mapping):
        items = [(str(s), float(w)) for s, w in states.items()]
    else:
        items = []
        for entry in states:
            if isinstance(entry, str):
                items.append((entry, 1.0))
            else:
                items.append((str(entry[0]), float(entry[1])))
    seen: dict[str, float] = {}
    duplicates = []
    for s, w in items:
        if s in seen:
            duplicates.append(s)
        else:
            seen[s] = w
    return sorted(seen.items()), sorted(set(duplicates))


def validate(graph: TransitionGraph) -> list[str]:
    """Report every graph-invariant violation; empty list means ok."""
    return graph.validate()


@dataclass(frozen=True)
class Trajectory:
    """Finite alternating state-action path; steps are (src, action, dst)."""

    start: str
    steps: tuple[TransitionKey, ...] = ()

    def __post_init__(self):
        steps = tuple((s[0], s[1], s[2]) for s in self.steps)
        object.__setattr__(self, "steps", steps)
        prev = self.start
        for s in steps:
            if s[0] != prev:
                raise ValueError(f"broken trajectory chain at {s}, expected source {prev}")
            prev = s[2]

    @classmethod
    def from_pairs(cls, start: str, pairs: Sequence[tuple[str, str]]) -> "Trajectory":
        steps = []
        here = start
        for action, nxt in pairs:
            steps.append((here, action, nxt))
            here = nxt
        return cls(start, tuple(steps))

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def end(self) -> str:
        return self.steps[-1][2] if self.steps else self.start

    def concat(self, other: "Trajectory") -> "Trajectory":
        if other.start != self.end:
            raise ValueError("trajectories do not chain")
        return Trajectory(self.start, self.steps + other.steps)


@dataclass(frozen=True)
class LassoTrajectory:
    """Eventually-periodic infinite trajectory: prefix followed by a repeated cycle."""

    prefix: Trajectory
    cycle: Trajectory

    def __post_init__(self):
        if self.cycle.length < 1:
            raise ValueError("lasso cycle must have at least one step")
        if self.cycle.end != self.cycle.start:
            raise ValueError("lasso cycle must return to its start state")
        if self.prefix.end != self.cycle.start:
            raise ValueError("lasso prefix must end where the cycle starts")

    @property
    def start(self) -> str:
        return self.prefix.start

    def unroll(self, n_steps: int) -> Trajectory:
        """First n_steps of the denoted infinite trajectory."""
        steps = list(self.prefix.steps)
        while len(steps) < n_steps:
            steps.extend(self.cycle.steps)
        return Trajectory(self.prefix.start, tuple(steps[:n_steps]))


@dataclass(frozen=True)
class Diamond:
    """Ordered pair of length-two trajectories sharing start and end."""

    first: Trajectory
    second: Trajectory

    def __post_init__(self):
        if self.first.length != 2 or self.second.length != 2:
            raise ValueError("diamond legs must have length exactly 2")
        if self.first.start != self.second.start or self.first.end != self.second.end:
            raise ValueError("diamond legs must share start and end states")

    @property
    def swapped(self) -> "Diamond":
        return Diamond(self.second, self.first)


@dataclass(frozen=True)
class TopologyReport:
    is_complete: bool
    has_distinguishing_actions: bool
    is_diamond_complete: bool
    every_state_in_loop: bool
    reachable_from: dict[str, frozenset[str]]


@dataclass(frozen=True)
class DeterministicDynamics:
    """One deterministic compatible choice of successor per (state, action).

    ``choice`` is total over the (s, a) pairs that have outgoing transitions;
    ``initial_support`` is the set of possible start states (defaults to all
    states, which makes every state reachable).
    """

    choice: dict[tuple[str, str], str]
    initial_support: frozenset[str]

    def successor(self, s: str, a: str) -> str:
        return self.choice[(s, a)]

    def compatibility_violations(self, graph: TransitionGraph) -> list[str]:
        graph.require_valid()
        v = []
        expected = {(t.src, t.action) for t in graph.transitions}
        for (s, a), dst in sorted(self.choice.items()):
            if not graph.has_transition((s, a, dst)):
                v.append(f"chosen transition not in graph: {(s, a, dst)}")
        for pair in sorted(expected - set(self.choice)):
            v.append(f"missing choice for pair: {pair}")
        for pair in sorted(set(self.choice) - expected):
            v.append(f"choice for pair without transitions: {pair}")
        if not self.initial_support:
            v.append("empty initial support")
        for s in sorted(self.initial_support):
            if s not in graph.state_weights:
                v.append(f"unknown state in initial support: {s}")
        return v


def topology_report(graph: TransitionGraph) -> TopologyReport:
    """Compute the topology predicates used by the main theorems.

    ``reachable_from[s]`` contains every state reachable from s in zero or
    more steps (so always contains s itself).
    """
    graph.require_valid()
    succ = {s: graph.successors(s) for s in graph.states}

    reachable: dict[str, frozenset[str]] = {}
    for s in graph.states:
        seen = {s}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in succ[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        reachable[s] = frozenset(seen)

    is_complete = graph.n_transitions == graph.n_states ** 2 * len(graph.actions)

    actions_to: dict[tuple[str, str], set[str]] = {}
    for t in graph.transitions:
        actions_to.setdefault((t.src, t.dst), set()).add(t.action)
    distinguishing = True
    for s in graph.states:
        for u, v in itertools.combinations(succ[s], 2):
            au, av = actions_to[(s, u)], actions_to[(s, v)]
            if len(au) == 1 and au == av:
                distinguishing = False

    diamond_complete = True
    for s in graph.states:
        for u, v in itertools.combinations_with_replacement(succ[s], 2):
            if not set(succ[u]) & set(succ[v]):
                diamond_complete = False

    in_loop = all(
        any(s in reachable[t.dst] for t in graph.out_transitions(s)) for s in graph.states
    )

    return TopologyReport(
        is_complete=is_complete,
        has_distinguishing_actions=distinguishing,
        is_diamond_complete=diamond_complete,
        every_state_in_loop=in_loop,
        reachable_from=reachable,
    )


def count_trajectories(graph: TransitionGraph, start: str, length: int) -> int:
    """Exact number of trajectories of the given length from start."""
    graph.require_valid()
    if start not in graph.state_weights:
        raise ValueError(f"unknown start state: {start}")
    if length < 0:
        raise ValueError("length must be non-negative")
    counts = {start: 1}
    for _ in range(length):
        nxt: dict[str, int] = {}
        for s, c in counts.items():
            for t in graph.out_transitions(s):
                nxt[t.dst] = nxt.get(t.dst, 0) + c
        counts = nxt
    return sum(counts.values())


def enumerate_trajectories(
    graph: TransitionGraph, start: str, length: int, cap: int = TRAJECTORY_CAP
) -> list[Trajectory]:
    """All trajectories of exactly the given length from start, lexicographic.

    Refuses with :class:`EnumerationCapError` when the exact count (computed
    first, cheaply) exceeds ``cap``.
    """
    total = count_trajectories(graph, start, length)
    if total > cap:
        raise EnumerationCapError(
            f"{total} trajectories of length {length} from {start} exceed cap {cap}"
        )
    results: list[Trajectory] = []

    def extend(here: str, steps: list[TransitionKey]):
        if len(steps) == length:
            results.append(Trajectory(start, tuple(steps)))
            return
        for t in graph.out_transitions(here):
            steps.append(t.key)
            extend(t.dst, steps)
            steps.pop()

    extend(start, [])
    return results


def count_diamonds(graph: TransitionGraph) -> int:
    graph.require_valid()
    total = 0
    for s in graph.states:
        sizes: dict[str, int] = {}
        for t in graph.out_transitions(s):
            for u in graph.out_transitions(t.dst):
                sizes[u.dst] = sizes.get(u.dst, 0) + 1
        total += sum(n * n for n in sizes.values())
    return total


def enumerate_diamonds(graph: TransitionGraph) -> list[Diamond]:
    """All ordered pairs of length-two trajectories with shared endpoints.

    The pair of a trajectory with itself is included.  Output order is
    lexicographic by the two legs' transition keys.
    """
    graph.require_valid()
    diamonds: list[Diamond] = []
    for s in graph.states:
        by_end: dict[str, list[Trajectory]] = {}
        for legs in enumerate_trajectories(graph, s, 2):
            by_end.setdefault(legs.end, []).append(legs)
        for group in by_end.values():
            for first, second in itertools.product(group, group):
                diamonds.append(Diamond(first, second))
    diamonds.sort(key=lambda d: (d.first.steps, d.second.steps))
    return diamonds


def successor_table(
    graph: TransitionGraph,
) -> tuple[tuple[tuple[str, str], ...], tuple[tuple[str, ...], ...]]:
    """Canonically ordered (state, action) pairs with their successor lists."""
    graph.require_valid()
    pairs = sorted({(t.src, t.action) for t in graph.transitions})
    return tuple(pairs), tuple(graph.sa_successors(s, a) for s, a in pairs)


@dataclass(frozen=True)
class DynamicsEnumeration:
    """Lazily iterable Cartesian product of per-(state, action) successor choices."""

    graph: TransitionGraph
    pairs: tuple[tuple[str, str], ...]
    successor_lists: tuple[tuple[str, ...], ...]
    total_count: int
    budget: int
    initial_support: frozenset[str] = field(repr=False, default=frozenset())

    @property
    def truncated(self) -> bool:
        return self.total_count > self.budget

    def __iter__(self) -> Iterator[DeterministicDynamics]:
        combos = itertools.product(*self.successor_lists)
        for combo in itertools.islice(combos, self.budget):
            yield DeterministicDynamics(
                choice=dict(zip(self.pairs, combo)),
                initial_support=self.initial_support,
            )


def enumerate_deterministic_dynamics(
    graph: TransitionGraph, budget: int = DYNAMICS_BUDGET
) -> DynamicsEnumeration:
    """Enumerate compatible deterministic dynamics in canonical order.

    The full-state initial support makes every state reachable, which is what
    the optimality checks quantify over.  Iteration stops after ``budget``
    dynamics; ``total_count`` always reports the exact product of out-degrees.
    """
    pairs, succ_lists = successor_table(graph)
    total = 1
    for lst in succ_lists:
        total *= len(lst)
    return DynamicsEnumeration(
        graph=graph,
        pairs=pairs,
        successor_lists=succ_lists,
        total_count=total,
        budget=budget,
        initial_support=frozenset(graph.states),
    )
