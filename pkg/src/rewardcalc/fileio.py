"""JSON file formats for graphs, fields, trajectories, dynamics, and results.

Loading is strict: unknown keys are rejected, values must be finite, and
field files must cover their domain exactly.  Dumping is canonical: keys are
emitted in a fixed order and floats keep full 64-bit precision, so identical
inputs always serialize to identical bytes and every artifact round-trips.
"""
from __future__ import annotations

import json
import math
from typing import Any

from .analysis import (
    ActionDependenceWitness,
    ConservativenessVerdict,
    ConstructedPotential,
    OptimalityVerdict,
)
from .decompose import Decomposition
from .errors import InputError
from .fields import Potential, Reward
from .graphs import (
    DeterministicDynamics,
    LassoTrajectory,
    TopologyReport,
    Trajectory,
    Transition,
    TransitionGraph,
)
from .operators import CurlField, LaplacianMatrix


def _check_keys(obj: Any, required: tuple[str, ...], optional: tuple[str, ...], where: str) -> None:
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected a JSON object, got {type(obj).__name__}")
    missing = [k for k in required if k not in obj]
    unknown = [k for k in obj if k not in required and k not in optional]
    if missing:
        raise InputError(f"{where}: missing keys {missing}")
    if unknown:
        raise InputError(f"{where}: unknown keys {unknown}")


def _finite(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"{where}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise InputError(f"{where}: non-finite value {value}")
    return value


def _text(value: Any, where: str) -> str:
    if not isinstance(value, str) or not value:
        raise InputError(f"{where}: expected a non-empty string, got {value!r}")
    return value


# -- graphs ------------------------------------------------------------------


def parse_graph(obj: Any) -> TransitionGraph:
    _check_keys(obj, ("gamma", "states", "actions", "transitions"), (), "graph")
    states = []
    for i, entry in enumerate(obj["states"]):
        _check_keys(entry, ("id",), ("weight",), f"graph states[{i}]")
        weight = _finite(entry.get("weight", 1.0), f"graph states[{i}].weight")
        states.append((_text(entry["id"], f"graph states[{i}].id"), weight))
    actions = [_text(a, f"graph actions[{i}]") for i, a in enumerate(obj["actions"])]
    transitions = []
    for i, entry in enumerate(obj["transitions"]):
        where = f"graph transitions[{i}]"
        _check_keys(entry, ("from", "action", "to"), ("weight",), where)
        transitions.append(
            Transition(
                _text(entry["from"], f"{where}.from"),
                _text(entry["action"], f"{where}.action"),
                _text(entry["to"], f"{where}.to"),
                _finite(entry.get("weight", 1.0), f"{where}.weight"),
            )
        )
    gamma = _finite(obj["gamma"], "graph.gamma")
    return TransitionGraph(states, actions, transitions, gamma)


def graph_to_obj(graph: TransitionGraph) -> dict:
    return {
        "gamma": graph.gamma,
        "states": [{"id": s, "weight": graph.state_weights[s]} for s in graph.states],
        "actions": list(graph.actions),
        "transitions": [
            {"from": t.src, "action": t.action, "to": t.dst, "weight": t.weight}
            for t in graph.transitions
        ],
    }


# -- fields ------------------------------------------------------------------


def parse_potential(obj: Any, graph: TransitionGraph) -> Potential:
    _check_keys(obj, ("values",), (), "potential")
    if not isinstance(obj["values"], dict):
        raise InputError("potential.values: expected an object")
    values = {
        _text(s, "potential state"): _finite(v, f"potential.values[{s}]")
        for s, v in obj["values"].items()
    }
    missing = sorted(set(graph.states) - set(values))
    extra = sorted(set(values) - set(graph.states))
    if missing or extra:
        raise InputError(
            f"potential does not match graph states: missing {missing}, unknown {extra}"
        )
    return Potential(values)


def potential_to_obj(potential: Potential) -> dict:
    return {"values": {s: potential.values[s] for s in sorted(potential.values)}}


def parse_reward(obj: Any, graph: TransitionGraph) -> Reward:
    _check_keys(obj, ("rewards",), (), "reward")
    values: dict[tuple[str, str, str], float] = {}
    for i, entry in enumerate(obj["rewards"]):
        where = f"reward rewards[{i}]"
        _check_keys(entry, ("from", "action", "to", "value"), (), where)
        key = (
            _text(entry["from"], f"{where}.from"),
            _text(entry["action"], f"{where}.action"),
            _text(entry["to"], f"{where}.to"),
        )
        if key in values:
            raise InputError(f"{where}: duplicate transition {key}")
        values[key] = _finite(entry["value"], f"{where}.value")
    allowed = {t.key for t in graph.transitions}
    missing = sorted(allowed - set(values))
    extra = sorted(set(values) - allowed)
    if missing or extra:
        raise InputError(
            f"reward does not cover the transition set exactly: "
            f"missing {missing}, unknown {extra}"
        )
    return Reward(values)


def reward_to_obj(reward: Reward) -> dict:
    return {
        "rewards": [
            {"from": k[0], "action": k[1], "to": k[2], "value": reward.values[k]}
            for k in sorted(reward.values)
        ]
    }


# -- trajectories and dynamics -------------------------------------------------


def _parse_steps(entries: Any, where: str) -> list[tuple[str, str, str]]:
    steps = []
    for i, entry in enumerate(entries):
        _check_keys(entry, ("order", "from", "action", "to"), (), f"{where}[{i}]")
        if entry["order"] != i:
            raise InputError(f"{where}[{i}]: expected order {i}, got {entry['order']}")
        steps.append(
            (
                _text(entry["from"], f"{where}[{i}].from"),
                _text(entry["action"], f"{where}[{i}].action"),
                _text(entry["to"], f"{where}[{i}].to"),
            )
        )
    return steps


def _steps_to_obj(steps) -> list[dict]:
    return [
        {"order": i, "from": s[0], "action": s[1], "to": s[2]}
        for i, s in enumerate(steps)
    ]


def parse_trajectory(obj: Any, graph: TransitionGraph) -> Trajectory:
    _check_keys(obj, ("start", "steps"), (), "trajectory")
    start = _text(obj["start"], "trajectory.start")
    if start not in graph.state_weights:
        raise InputError(f"trajectory.start: unknown state {start}")
    steps = _parse_steps(obj["steps"], "trajectory.steps")
    for step in steps:
        if not graph.has_transition(step):
            raise InputError(f"trajectory step not in transition set: {step}")
    try:
        return Trajectory(start, tuple(steps))
    except ValueError as exc:
        raise InputError(f"trajectory: {exc}") from exc


def trajectory_to_obj(t: Trajectory) -> dict:
    return {"start": t.start, "steps": _steps_to_obj(t.steps)}


def parse_lasso(obj: Any, graph: TransitionGraph) -> LassoTrajectory:
    _check_keys(obj, ("start", "prefix", "cycle"), (), "lasso")
    start = _text(obj["start"], "lasso.start")
    prefix_steps = _parse_steps(obj["prefix"], "lasso.prefix")
    cycle_steps = _parse_steps(obj["cycle"], "lasso.cycle")
    for step in prefix_steps + cycle_steps:
        if not graph.has_transition(step):
            raise InputError(f"lasso step not in transition set: {step}")
    try:
        prefix = Trajectory(start, tuple(prefix_steps))
        cycle = Trajectory(prefix.end, tuple(cycle_steps))
        return LassoTrajectory(prefix, cycle)
    except ValueError as exc:
        raise InputError(f"lasso: {exc}") from exc


def lasso_to_obj(t: LassoTrajectory) -> dict:
    return {
        "start": t.start,
        "prefix": _steps_to_obj(t.prefix.steps),
        "cycle": _steps_to_obj(t.cycle.steps),
    }


def parse_dynamics(obj: Any, graph: TransitionGraph) -> DeterministicDynamics:
    _check_keys(obj, ("choices",), ("initial_support",), "dynamics")
    choice: dict[tuple[str, str], str] = {}
    for i, entry in enumerate(obj["choices"]):
        where = f"dynamics choices[{i}]"
        _check_keys(entry, ("from", "action", "to"), (), where)
        pair = (
            _text(entry["from"], f"{where}.from"),
            _text(entry["action"], f"{where}.action"),
        )
        if pair in choice:
            raise InputError(f"{where}: duplicate pair {pair}")
        choice[pair] = _text(entry["to"], f"{where}.to")
    support = obj.get("initial_support")
    if support is None:
        initial = frozenset(graph.states)
    else:
        initial = frozenset(
            _text(s, f"dynamics initial_support[{i}]") for i, s in enumerate(support)
        )
    dyn = DeterministicDynamics(choice=choice, initial_support=initial)
    violations = dyn.compatibility_violations(graph)
    if violations:
        raise InputError("dynamics not compatible with graph: " + "; ".join(violations))
    return dyn


def dynamics_to_obj(dyn: DeterministicDynamics) -> dict:
    return {
        "choices": [
            {"from": s, "action": a, "to": dst}
            for (s, a), dst in sorted(dyn.choice.items())
        ],
        "initial_support": sorted(dyn.initial_support),
    }


# -- results -------------------------------------------------------------------


def topology_to_obj(report: TopologyReport) -> dict:
    return {
        "is_complete": report.is_complete,
        "has_distinguishing_actions": report.has_distinguishing_actions,
        "is_diamond_complete": report.is_diamond_complete,
        "every_state_in_loop": report.every_state_in_loop,
        "reachable_from": {s: sorted(v) for s, v in sorted(report.reachable_from.items())},
    }


def curl_to_obj(field: CurlField) -> list[dict]:
    out = []
    for diamond, value in field.values.items():
        out.append(
            {
                "delta1": [
                    {"from": s[0], "action": s[1], "to": s[2]} for s in diamond.first.steps
                ],
                "delta2": [
                    {"from": s[0], "action": s[1], "to": s[2]} for s in diamond.second.steps
                ],
                "value": value,
            }
        )
    return out


def laplacian_to_obj(lap: LaplacianMatrix) -> dict:
    return {
        "states": list(lap.states),
        "matrix": [[float(x) for x in row] for row in lap.entries],
        "rank": lap.rank,
        "smallest_singular_value": lap.smallest_singular_value,
        "largest_singular_value": lap.largest_singular_value,
        "invertible": lap.is_invertible(),
    }


def decomposition_to_obj(d: Decomposition) -> dict:
    return {
        "divergence_free": reward_to_obj(d.divergence_free),
        "potential": potential_to_obj(d.potential),
        "residuals": {
            "reconstruction": d.reconstruction_residual,
            "divergence": d.divergence_residual,
        },
        "laplacian_invertible": d.laplacian_invertible,
    }


def _witness_to_obj(witness, integrals) -> dict | None:
    if witness is None:
        return None
    first, second = witness
    if isinstance(first, LassoTrajectory):
        payload = {"type": "lasso", "first": lasso_to_obj(first), "second": lasso_to_obj(second)}
    else:
        payload = {
            "type": "finite",
            "first": trajectory_to_obj(first),
            "second": trajectory_to_obj(second),
        }
    if integrals is not None:
        payload["integrals"] = list(integrals)
    return payload


def conservativeness_to_obj(v: ConservativenessVerdict) -> dict:
    return {
        "kind": v.kind,
        "residual": v.residual,
        "horizon": v.horizon,
        "coverage_complete": v.coverage_complete,
        "witness": _witness_to_obj(v.witness, v.witness_integrals),
        "potential": potential_to_obj(v.potential) if v.potential is not None else None,
    }


def action_witness_to_obj(w: ActionDependenceWitness | None) -> dict | None:
    if w is None:
        return None
    return {
        "first": {"from": w.first[0], "action": w.first[1], "to": w.first[2]},
        "second": {"from": w.second[0], "action": w.second[1], "to": w.second[2]},
        "values": [w.first_value, w.second_value],
    }


def optimality_to_obj(v: OptimalityVerdict) -> dict:
    counterexample = None
    if v.counterexample is not None:
        c = v.counterexample
        counterexample = {
            "index": c.index,
            "state": c.state,
            "action_high": c.action_high,
            "action_low": c.action_low,
            "q_gap": c.q_gap,
            "dynamics": dynamics_to_obj(c.dynamics),
        }
    return {
        "verdict": v.verdict,
        "dynamics_checked": v.dynamics_checked,
        "total_dynamics": v.total_dynamics,
        "max_gap_seen": v.max_gap_seen,
        "counterexample": counterexample,
    }


def constructed_potential_to_obj(c: ConstructedPotential) -> dict:
    return {
        "potential": potential_to_obj(c.potential),
        "gradient_residual": c.gradient_residual,
        "matches_input": c.matches_input,
    }


# -- I/O helpers ---------------------------------------------------------------


def dumps(obj: Any) -> str:
    """Canonical JSON text: fixed key order, full float precision."""
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def load_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _parse_file(path: str, parse, *args):
    # error messages must name the offending file
    try:
        return parse(load_json(path), *args)
    except InputError as exc:
        if str(exc).startswith(path):
            raise
        raise InputError(f"{path}: {exc}") from exc


def load_graph(path: str) -> TransitionGraph:
    return _parse_file(path, parse_graph)


def load_potential(path: str, graph: TransitionGraph) -> Potential:
    return _parse_file(path, parse_potential, graph)


def load_reward(path: str, graph: TransitionGraph) -> Reward:
    return _parse_file(path, parse_reward, graph)


def load_trajectory(path: str, graph: TransitionGraph) -> Trajectory:
    return _parse_file(path, parse_trajectory, graph)


def load_lasso(path: str, graph: TransitionGraph) -> LassoTrajectory:
    return _parse_file(path, parse_lasso, graph)


def load_dynamics(path: str, graph: TransitionGraph) -> DeterministicDynamics:
    return _parse_file(path, parse_dynamics, graph)


def save(path: str, obj: Any) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))
