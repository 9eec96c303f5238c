"""JSON problem description files.

Grammar (every object rejects keys not listed here)::

    problem    := {"nodes": [node...], "edges": [edge...]?,
                   "node_constraints": [nodecon...]?, "z0": [float...]?,
                   "meta": {...}?}
    node       := {"id": int, "dim": int, "objective": objective,
                   "dummy_of": int?}
    objective  := {"kind": "quadratic", "Q": matrix, "q": [float...]}
                | {"kind": "linear", "g": [float...]}
    edge       := {"i": int, "j": int, "A_ij": matrix, "A_ji": matrix,
                   "b": [float...], "kinds": ["eq" | "ineq", ...]}
    nodecon    := {"i": int, "A": matrix, "b": [float...],
                   "kinds": ["eq" | "ineq", ...]}
    matrix     := {"rows": int, "cols": int, "data": [float...]}   (row-major)

Node ids must be exactly ``0 .. N-1``.  ``meta`` is free-form and ignored by
the solver.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, ProblemError
from .problem import (
    EdgeConstraintBlock,
    Linear,
    Node,
    NodeConstraintBlock,
    ProblemGraph,
    Quadratic,
)

_TOP = {"nodes", "edges", "node_constraints", "z0", "meta"}
_NODE = {"id", "dim", "objective", "dummy_of"}
_QUAD = {"kind", "Q", "q"}
_LIN = {"kind", "g"}
_EDGE = {"i", "j", "A_ij", "A_ji", "b", "kinds"}
_NODECON = {"i", "A", "b", "kinds"}
_MATRIX = {"rows", "cols", "data"}


def _check_keys(obj, allowed, where, required=()):
    if not isinstance(obj, dict):
        raise ProblemError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ProblemError(f"{where}: unknown keys {sorted(unknown)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ProblemError(f"{where}: missing keys {missing}")


def _read_matrix(obj, where):
    _check_keys(obj, _MATRIX, where, required=_MATRIX)
    rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    if len(data) != rows * cols:
        raise DimensionMismatch(f"{where}: {len(data)} entries for a {rows}x{cols} matrix")
    return np.array(data, dtype=float).reshape(rows, cols)


def _write_matrix(a):
    a = np.asarray(a, dtype=float)
    return {"rows": a.shape[0], "cols": a.shape[1], "data": [float(v) for v in a.reshape(-1)]}


def _floats(v):
    return [float(t) for t in np.asarray(v).reshape(-1)]


def problem_from_dict(d: dict) -> ProblemGraph:
    _check_keys(d, _TOP, "problem", required=("nodes",))
    raw_nodes = d["nodes"]
    ids = sorted(int(n["id"]) for n in raw_nodes)
    if ids != list(range(len(raw_nodes))):
        raise ProblemError(f"node ids must be 0..{len(raw_nodes) - 1}, got {ids}")
    nodes = [None] * len(raw_nodes)
    for k, n in enumerate(raw_nodes):
        where = f"nodes[{k}]"
        _check_keys(n, _NODE, where, required=("id", "dim", "objective"))
        obj = n["objective"]
        kind = obj.get("kind") if isinstance(obj, dict) else None
        if kind == "quadratic":
            _check_keys(obj, _QUAD, where + ".objective", required=_QUAD)
            objective = Quadratic(_read_matrix(obj["Q"], where + ".Q"), obj["q"])
        elif kind == "linear":
            _check_keys(obj, _LIN, where + ".objective", required=_LIN)
            objective = Linear(obj["g"])
        else:
            raise ProblemError(f"{where}: unknown objective kind {kind!r}")
        dummy_of = n.get("dummy_of")
        nodes[int(n["id"])] = Node(int(n["dim"]), objective, None if dummy_of is None else int(dummy_of))
    edges = []
    for k, e in enumerate(d.get("edges", [])):
        where = f"edges[{k}]"
        _check_keys(e, _EDGE, where, required=_EDGE)
        edges.append(
            EdgeConstraintBlock(
                int(e["i"]), int(e["j"]),
                _read_matrix(e["A_ij"], where + ".A_ij"),
                _read_matrix(e["A_ji"], where + ".A_ji"),
                e["b"], e["kinds"],
            )
        )
    node_constraints = []
    for k, c in enumerate(d.get("node_constraints", [])):
        where = f"node_constraints[{k}]"
        _check_keys(c, _NODECON, where, required=_NODECON)
        node_constraints.append(NodeConstraintBlock(int(c["i"]), _read_matrix(c["A"], where + ".A"), c["b"], c["kinds"]))
    return ProblemGraph(nodes, edges, node_constraints, z0=d.get("z0"))


def problem_to_dict(g: ProblemGraph, meta: dict | None = None) -> dict:
    nodes = []
    for i, node in enumerate(g.nodes):
        obj = node.objective
        if isinstance(obj, Quadratic):
            objective = {"kind": "quadratic", "Q": _write_matrix(obj.Q), "q": _floats(obj.q)}
        else:
            objective = {"kind": "linear", "g": _floats(obj.g)}
        entry = {"id": i, "dim": node.dim, "objective": objective}
        if node.dummy_of is not None:
            entry["dummy_of"] = node.dummy_of
        nodes.append(entry)
    out = {
        "nodes": nodes,
        "edges": [
            {
                "i": e.i, "j": e.j,
                "A_ij": _write_matrix(e.A_ij), "A_ji": _write_matrix(e.A_ji),
                "b": _floats(e.b), "kinds": [k.value for k in e.kinds],
            }
            for e in g.edges
        ],
        "node_constraints": [
            {"i": c.i, "A": _write_matrix(c.A), "b": _floats(c.b), "kinds": [k.value for k in c.kinds]}
            for c in g.node_constraints
        ],
    }
    if g.z0 is not None:
        out["z0"] = _floats(g.z0)
    if meta:
        out["meta"] = meta
    return out


def load_problem(path) -> ProblemGraph:
    with open(path) as fh:
        return problem_from_dict(json.load(fh))


def load_meta(path) -> dict:
    with open(path) as fh:
        return json.load(fh).get("meta", {})


def save_problem(g: ProblemGraph, path, meta: dict | None = None) -> Path:
    path = Path(path)
    path.write_text(json.dumps(problem_to_dict(g, meta), indent=1) + "\n")
    return path
