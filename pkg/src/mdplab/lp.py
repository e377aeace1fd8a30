"""Linear-programming formulations of a discounted MDP.

The primal has one free variable ``v_i`` per state and one ``<=`` row per
state-action pair; the dual has one nonnegative flow ``x_i_k`` per pair and
one flow-conservation equality per state. Dual variables are ordered
state-major, so flat index ``i * M + k`` holds ``x_i_k``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .mdp import Mdp, as_policy
from .simplex import EQ, GE, LE, MAXIMIZE, MINIMIZE, LpSolution, solve_lp

__all__ = [
    "LpProgram",
    "LpSolution",
    "LpParseError",
    "build_primal",
    "build_dual",
    "solve_lp",
    "dual_to_stochastic_policy",
    "stochastic_to_deterministic",
    "policy_basis_solution",
    "export_lp",
    "parse_lp",
]

Bound = tuple[Optional[float], Optional[float]]


@dataclass(frozen=True)
class LpProgram:
    sense: str
    objective: tuple[float, ...]
    constraints: tuple[tuple[tuple[float, ...], str, float], ...]
    bounds: tuple[Bound, ...]
    variable_labels: tuple[str, ...]
    constraint_labels: tuple[str, ...]

    def __post_init__(self):
        n = len(self.objective)
        if self.sense not in (MAXIMIZE, MINIMIZE):
            raise ValueError(f"bad sense {self.sense!r}")
        if len(self.bounds) != n or len(self.variable_labels) != n:
            raise ValueError("bounds and labels must match the objective width")
        if len(self.constraint_labels) != len(self.constraints):
            raise ValueError("one label per constraint")
        for row, rel, rhs in self.constraints:
            if len(row) != n:
                raise ValueError("constraint row width differs from objective")
            if rel not in (LE, EQ, GE):
                raise ValueError(f"bad relation {rel!r}")
            if not (all(map(math.isfinite, row)) and math.isfinite(rhs)):
                raise ValueError("non-finite coefficient")
        if not all(map(math.isfinite, self.objective)):
            raise ValueError("non-finite objective coefficient")

    @property
    def n_variables(self) -> int:
        return len(self.objective)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    def matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """Constraint matrix and right-hand side as arrays."""
        A = np.array([row for row, _, _ in self.constraints], dtype=float)
        b = np.array([rhs for _, _, rhs in self.constraints], dtype=float)
        return A.reshape(self.n_constraints, self.n_variables), b


def _floats(a):
    return tuple(float(x) for x in a)


def build_primal(mdp: Mdp) -> LpProgram:
    """maximize sum v  s.t.  (e_i - gamma p[i,k]) . v <= c[i,k] for all (i, k)."""
    N, M = mdp.n_states, mdp.n_actions
    rows, labels = [], []
    for i in range(N):
        for k in range(M):
            row = -mdp.discount * mdp.transitions[i, k]
            row[i] += 1.0
            rows.append((_floats(row), LE, float(mdp.costs[i, k])))
            labels.append(f"bellman_{i}_{k}")
    return LpProgram(
        sense=MAXIMIZE,
        objective=(1.0,) * N,
        constraints=tuple(rows),
        bounds=((None, None),) * N,
        variable_labels=tuple(f"v_{i}" for i in range(N)),
        constraint_labels=tuple(labels),
    )


def build_dual(mdp: Mdp) -> LpProgram:
    """minimize sum c.x  s.t.  sum_k x[j,k] - gamma sum_{i,k} p[i,k,j] x[i,k] = 1."""
    N, M = mdp.n_states, mdp.n_actions
    # Column (i, k) of the flow matrix: outflow at i minus discounted inflow.
    A = -mdp.discount * mdp.transitions.reshape(N * M, N).T
    for i in range(N):
        A[i, i * M:(i + 1) * M] += 1.0
    return LpProgram(
        sense=MINIMIZE,
        objective=_floats(mdp.costs.reshape(-1)),
        constraints=tuple((_floats(A[j]), EQ, 1.0) for j in range(N)),
        bounds=((0.0, None),) * (N * M),
        variable_labels=tuple(f"x_{i}_{k}" for i in range(N) for k in range(M)),
        constraint_labels=tuple(f"flow_{j}" for j in range(N)),
    )


def _flows(mdp, dual_values):
    x = np.asarray(dual_values, dtype=float)
    return x.reshape(mdp.n_states, mdp.n_actions)


def dual_to_stochastic_policy(mdp: Mdp, dual_values) -> np.ndarray:
    """Normalise each state's flows into action probabilities."""
    x = _flows(mdp, dual_values)
    if (x < -1e-9).any():
        raise ValueError("dual values must be nonnegative")
    x = np.clip(x, 0.0, None)
    totals = x.sum(axis=1)
    bad = np.flatnonzero(totals <= 1e-12)
    if bad.size:
        raise ValueError(f"no flow through state(s) {bad.tolist()}")
    return x / totals[:, None]


def stochastic_to_deterministic(dual_values, n_actions: Optional[int] = None) -> np.ndarray:
    """Per state, the action carrying the most flow (smallest index on ties).

    ``dual_values`` is either an ``(N, M)`` array or a flat state-major array
    together with ``n_actions``.
    """
    x = np.asarray(dual_values, dtype=float)
    if x.ndim == 1:
        if n_actions is None:
            raise ValueError("flat dual values need n_actions")
        x = x.reshape(-1, n_actions)
    return np.argmax(x, axis=1)


def policy_basis_solution(mdp: Mdp, policy) -> np.ndarray:
    """Vertex of the primal LP where the rows ``(i, policy[i])`` are tight."""
    policy = as_policy(mdp, policy)
    A, b = build_primal(mdp).matrix()
    rows = np.arange(mdp.n_states) * mdp.n_actions + policy
    return kernels.gauss_solve(A[rows], b[rows])


# -- LP text format ---------------------------------------------------------

class LpParseError(ValueError):
    pass


def _num(x: float) -> str:
    return format(x, ".17g")


def _expression(coeffs, labels, keep_zeros=False):
    parts = []
    for c, name in zip(coeffs, labels):
        if c == 0.0 and not keep_zeros:
            continue
        sign = "-" if math.copysign(1.0, c) < 0 else "+"
        mag = _num(abs(c))
        if not parts:
            parts.append(f"{'-' if sign == '-' else ''}{mag} {name}")
        else:
            parts.append(f"{sign} {mag} {name}")
    if not parts:
        parts.append(f"0 {labels[0]}")
    return " ".join(parts)


def export_lp(lp: LpProgram, name: str = "mdp") -> str:
    """Render ``lp`` in CPLEX LP text format.

    Every variable appears in the objective line (zeros included) so that the
    column order survives a round trip through :func:`parse_lp`.
    """
    out = [f"\\ Problem: {name}"]
    out.append("Maximize" if lp.sense == MAXIMIZE else "Minimize")
    out.append(" obj: " + _expression(lp.objective, lp.variable_labels, keep_zeros=True))
    out.append("Subject To")
    for label, (row, rel, rhs) in zip(lp.constraint_labels, lp.constraints):
        out.append(f" {label}: {_expression(row, lp.variable_labels)} {rel} {_num(rhs)}")
    out.append("Bounds")
    for label, (lo, hi) in zip(lp.variable_labels, lp.bounds):
        if lo is None and hi is None:
            out.append(f" {label} free")
        elif hi is None:
            out.append(f" {label} >= {_num(lo)}")
        elif lo is None:
            out.append(f" -inf <= {label} <= {_num(hi)}")
        else:
            out.append(f" {_num(lo)} <= {label} <= {_num(hi)}")
    out.append("End")
    return "\n".join(out) + "\n"


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|inf(?:inity)?\b)"
    r"|(?P<name>[A-Za-z_][\w.\[\]]*)|(?P<op><=|>=|=<|=>|=|<|>|[+-]))",
    re.IGNORECASE,
)
_SECTIONS = {
    "maximize": "max", "maximise": "max", "maximum": "max", "max": "max",
    "minimize": "min", "minimise": "min", "minimum": "min", "min": "min",
    "subject to": "st", "such that": "st", "st": "st", "s.t.": "st",
    "bounds": "bounds", "bound": "bounds", "end": "end",
}
_REL = {"<=": LE, "=<": LE, "<": LE, ">=": GE, "=>": GE, ">": GE, "=": EQ}


def _tokens(text):
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise LpParseError(f"cannot parse near {text[pos:pos + 20]!r}")
        kind = m.lastgroup
        value = m.group(kind)
        if kind == "num":
            value = float("inf") if value.lower().startswith("inf") else float(value)
        out.append((kind, value))
        pos = m.end()
    return out


def _linear(tokens):
    """Parse ``[sign] [coef] name ...``; returns ``[(coef, name)]``."""
    terms, sign, coef = [], 1.0, None
    for kind, value in tokens:
        if kind == "op" and value in "+-":
            sign = -sign if value == "-" else sign
        elif kind == "num":
            coef = value
        elif kind == "name":
            terms.append((sign * (1.0 if coef is None else coef), value))
            sign, coef = 1.0, None
        else:
            raise LpParseError(f"unexpected {value!r} in expression")
    return terms


def _split_label(line):
    if ":" in line:
        label, rest = line.split(":", 1)
        return label.strip(), rest
    return None, line


def _signed_number(tokens):
    sign = 1.0
    for kind, value in tokens[:-1]:
        if kind != "op" or value not in "+-":
            raise LpParseError("malformed number")
        sign = -sign if value == "-" else sign
    kind, value = tokens[-1]
    if kind != "num":
        raise LpParseError("expected a number")
    return sign * value


def parse_lp(text: str) -> LpProgram:
    """Parse the subset of CPLEX LP format written by :func:`export_lp`."""
    section, sense = None, None
    objective_lines, constraint_lines, bound_lines = [], [], []
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = _SECTIONS.get(" ".join(line.lower().split()))
        if key in ("max", "min"):
            section, sense = "obj", MAXIMIZE if key == "max" else MINIMIZE
        elif key in ("st", "bounds"):
            section = key
        elif key == "end":
            break
        elif section == "obj":
            objective_lines.append(line)
        elif section == "st":
            # A constraint may continue over several lines until its relation.
            if constraint_lines and not re.search(r"[<>=]", constraint_lines[-1]):
                constraint_lines[-1] += " " + line
            else:
                constraint_lines.append(line)
        elif section == "bounds":
            bound_lines.append(line)
        else:
            raise LpParseError(f"text outside any section: {line!r}")
    if sense is None:
        raise LpParseError("missing objective section")

    _, obj_text = _split_label(" ".join(objective_lines))
    obj_terms = _linear(_tokens(obj_text))
    labels = [name for _, name in obj_terms]
    index = {name: j for j, name in enumerate(labels)}
    if len(index) != len(labels):
        raise LpParseError("duplicate variable in objective")
    objective = [c for c, _ in obj_terms]

    def register(name):
        if name not in index:
            index[name] = len(labels)
            labels.append(name)
            objective.append(0.0)
        return index[name]

    rows, names = [], []
    for n, line in enumerate(constraint_lines):
        label, body = _split_label(line)
        toks = _tokens(body)
        rel_at = [p for p, (kind, v) in enumerate(toks) if kind == "op" and v in _REL]
        if len(rel_at) != 1:
            raise LpParseError(f"constraint needs exactly one relation: {line!r}")
        p = rel_at[0]
        terms = _linear(toks[:p])
        rows.append(([(c, register(v)) for c, v in terms], _REL[toks[p][1]], _signed_number(toks[p + 1:])))
        names.append(label or f"c{n}")

    bounds: dict[int, list] = {}
    for line in bound_lines:
        toks = _tokens(line)
        if len(toks) == 2 and toks[1][0] == "name" and toks[1][1].lower() == "free":
            bounds[register(toks[0][1])] = [None, None]
            continue
        rel_at = [p for p, (kind, v) in enumerate(toks) if kind == "op" and v in _REL]
        name_at = [p for p, (kind, _) in enumerate(toks) if kind == "name"]
        if len(name_at) != 1 or not rel_at:
            raise LpParseError(f"bad bound line {line!r}")
        j = register(toks[name_at[0]][1])
        b = bounds.setdefault(j, [0.0, None])
        q = name_at[0]
        if q == 0:
            rel, value = _REL[toks[1][1]], _signed_number(toks[2:])
            _apply_bound(b, rel, value)
        else:
            lower = _signed_number(toks[: q - 1])
            _apply_bound(b, {LE: GE, GE: LE, EQ: EQ}[_REL[toks[q - 1][1]]], lower)
            if q + 1 < len(toks):
                _apply_bound(b, _REL[toks[q + 1][1]], _signed_number(toks[q + 2:]))

    width = len(labels)
    constraints = []
    for terms, rel, rhs in rows:
        dense = [0.0] * width
        for c, j in terms:
            dense[j] += c
        constraints.append((tuple(dense), rel, rhs))
    return LpProgram(
        sense=sense,
        objective=tuple(objective),
        constraints=tuple(constraints),
        bounds=tuple(tuple(bounds.get(j, (0.0, None))) for j in range(width)),
        variable_labels=tuple(labels),
        constraint_labels=tuple(names),
    )


def _apply_bound(b, rel, value):
    value = None if math.isinf(value) else value
    if rel == GE:
        b[0] = value
    elif rel == LE:
        b[1] = value
    else:
        b[0] = b[1] = value
