"""MDP documents (JSON) and inline generator specs.

Document schema::

    {
      "n_states": N, "n_actions": M, "discount": gamma,
      "costs": [[c_00, ...], ...],                       # N x M
      "transitions": [[[p_000, ...], ...], ...],         # N x M x N, or
      "transitions": [[i, k, j, p], ...],                # sparse quadruples
      "rational_bits": B                                 # optional
    }

Floats are written with Python's shortest round-trip repr, so save then load
reproduces every value exactly.
"""
from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .families import (
    mc90_family,
    random_mdp,
    random_rational_mdp,
    vi_lower_bound_family,
)
from .mdp import InvalidMdpError, Mdp, validate


class MdpFormatError(ValueError):
    """Malformed MDP document; ``field`` names the offending entry."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


def _require(doc, key):
    if key not in doc:
        raise MdpFormatError(key, "missing")
    return doc[key]


def _positive_int(doc, key):
    value = _require(doc, key)
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise MdpFormatError(key, f"expected a positive integer, got {value!r}")
    return value


def mdp_from_dict(doc) -> Mdp:
    """Build and validate an MDP from a parsed document.

    Raises :class:`MdpFormatError` for schema problems and
    :class:`~mdplab.mdp.InvalidMdpError` for violated invariants.
    """
    if not isinstance(doc, dict):
        raise MdpFormatError("document", "expected a JSON object")
    n = _positive_int(doc, "n_states")
    m = _positive_int(doc, "n_actions")
    discount = _require(doc, "discount")
    if isinstance(discount, bool) or not isinstance(discount, (int, float)):
        raise MdpFormatError("discount", f"expected a number, got {discount!r}")

    try:
        costs = np.array(_require(doc, "costs"), dtype=float)
    except (TypeError, ValueError) as exc:
        raise MdpFormatError("costs", str(exc)) from None
    if costs.shape != (n, m):
        raise MdpFormatError("costs", f"expected shape ({n}, {m}), got {costs.shape}")

    raw = _require(doc, "transitions")
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MdpFormatError("transitions", str(exc)) from None
    if arr.shape == (n, m, n):
        P = arr
    elif arr.ndim == 2 and arr.shape[1] == 4 or (arr.size == 0 and isinstance(raw, list)):
        P = np.zeros((n, m, n))
        for row, (i, k, j, p) in enumerate(arr.reshape(-1, 4)):
            if not (i == int(i) and k == int(k) and j == int(j)):
                raise MdpFormatError(f"transitions[{row}]", "indices must be integers")
            i, k, j = int(i), int(k), int(j)
            if not (0 <= i < n and 0 <= k < m and 0 <= j < n):
                raise MdpFormatError(f"transitions[{row}]", "index out of range")
            P[i, k, j] += p
    else:
        raise MdpFormatError(
            "transitions", f"expected shape ({n}, {m}, {n}) or a list of [i, k, j, p]"
        )

    bits = doc.get("rational_bits")
    if bits is not None:
        bits = _positive_int(doc, "rational_bits")

    mdp = Mdp(P, costs, float(discount), rational_bits=bits)
    problems = validate(mdp)
    if problems:
        raise InvalidMdpError(problems)
    return mdp


def mdp_to_dict(mdp: Mdp) -> dict:
    doc = {
        "n_states": mdp.n_states,
        "n_actions": mdp.n_actions,
        "discount": mdp.discount,
        "costs": mdp.costs.tolist(),
        "transitions": mdp.transitions.tolist(),
    }
    if mdp.rational_bits is not None:
        doc["rational_bits"] = mdp.rational_bits
    return doc


def load_mdp(path) -> Mdp:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MdpFormatError("document", f"invalid JSON ({exc})") from None
    return mdp_from_dict(doc)


def save_mdp(mdp: Mdp, path) -> None:
    Path(path).write_text(json.dumps(mdp_to_dict(mdp)) + "\n")


# -- generator specs ----------------------------------------------------------

_GENERATORS = {
    "mc90": ("n", "gamma"),
    "vi-lower-bound": ("gamma",),
    "random": ("n", "m", "gamma", "seed"),
    "rational": ("n", "m", "gamma", "seed", "bits"),
}
_ALIASES = {"vilb": "vi-lower-bound"}
_DEFAULTS = {"gamma": 0.95, "seed": 0, "m": 2, "bits": 3}


def parse_generator(spec: str) -> dict:
    """Parse ``name:key=value,...`` into ``{"family": name, key: value}``."""
    name, _, rest = spec.partition(":")
    family = _ALIASES.get(name.strip().lower(), name.strip().lower())
    if family not in _GENERATORS:
        raise ValueError(f"unknown generator {name!r}; choose from {sorted(_GENERATORS)}")
    params = {}
    for item in filter(None, (s.strip() for s in re.split(r"[,;]", rest))):
        key, sep, value = item.partition("=")
        key = key.strip().lower()
        if not sep or key not in _GENERATORS[family]:
            raise ValueError(f"bad parameter {item!r} for generator {family!r}")
        params[key] = float(value) if key == "gamma" else int(value)
    for key in _GENERATORS[family]:
        if key not in params:
            if key not in _DEFAULTS:
                raise ValueError(f"generator {family!r} needs {key}=")
            params[key] = _DEFAULTS[key]
    return {"family": family, **params}


def generate(spec: str | dict) -> Mdp:
    p = parse_generator(spec) if isinstance(spec, str) else spec
    family = p["family"]
    if family == "mc90":
        return mc90_family(p["n"], p["gamma"]).mdp
    if family == "vi-lower-bound":
        return vi_lower_bound_family(p["gamma"]).mdp
    if family == "random":
        return random_mdp(p["n"], p["m"], p["gamma"], p["seed"])
    return random_rational_mdp(p["n"], p["m"], p["gamma"], p["seed"], p["bits"])
