"""JSON scenario files: algebroid data, Finsler function and named objects.

Indices in scenario files are 1-based; everything is converted to the
0-based API on load.

    {
      "id": "fixture_b",
      "n": 1, "m": 1,
      "anchor": [["z1"]],
      "structure": [{"gamma": 1, "alpha": 1, "beta": 2, "expr": "1"}],
      "finsler": "exp(z1*conj(z1))*u1*conj(u1)",
      "named_functions": {"f": "z1*conj(z1)"},
      "named_sections": {"Z": {"Zh": ["exp(-z1*conj(z1))"]}},
      "named_forms": {"phi": {"p": 0, "q": 1, "coeffs": {"|1": "z1*conj(z1)"}}},
      "integration": {"box": [-3, 3], "grid": 96, "budget": 100000000,
                      "sections": ["Z"]}
    }
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import expr as ex
from .algebroid import AlgebroidSpec
from .calculus import SectionField
from .forms import HorizontalForm
from .parsing import ExprSyntaxError, parse_expr

__all__ = ["Scenario", "ScenarioError", "load_scenario", "parse_scenario", "parse_point",
           "form_key", "format_form_key"]

_BLOCKS = ("Zh", "Zv", "Zhbar", "Zvbar")


class ScenarioError(ValueError):
    """Unreadable or inconsistent scenario; the message carries the location."""


@dataclass(eq=False)
class Scenario:
    id: str
    spec: AlgebroidSpec
    F: ex.Expr
    functions: dict[str, ex.Expr] = field(default_factory=dict)
    sections: dict[str, SectionField] = field(default_factory=dict)
    forms: dict[str, HorizontalForm] = field(default_factory=dict)
    integration: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def m(self) -> int:
        return self.spec.m


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read: {exc.strerror}") from exc
    return parse_scenario(text, default_id=path.stem, source=str(path))


def _expr(text, n, m, where):
    if not isinstance(text, str):
        raise ScenarioError(f"{where}: expected an expression string")
    try:
        return parse_expr(text, n, m)
    except ExprSyntaxError as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def _int(obj, key, where):
    val = obj.get(key)
    if not isinstance(val, int) or isinstance(val, bool):
        raise ScenarioError(f"{where}: '{key}' must be an integer")
    return val


def form_key(key: str, m: int, where: str):
    """'a1,a2|b1,b2' (1-based, increasing) -> 0-based (A, B)."""
    if key.count("|") != 1:
        raise ScenarioError(f"{where}: form key {key!r} needs exactly one '|'")
    out = []
    for part in key.split("|"):
        part = part.strip()
        try:
            idx = tuple(int(t) - 1 for t in part.split(",")) if part else ()
        except ValueError:
            raise ScenarioError(f"{where}: form key {key!r} has a non-integer index") from None
        if any(not 0 <= i < m for i in idx) or list(idx) != sorted(set(idx)):
            raise ScenarioError(f"{where}: form key {key!r} must be increasing indices in 1..{m}")
        out.append(idx)
    return tuple(out)


def format_form_key(A, B) -> str:
    return ",".join(str(a + 1) for a in A) + "|" + ",".join(str(b + 1) for b in B)


def parse_scenario(text: str, default_id: str = "scenario", source: str = "<string>") -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ScenarioError(f"{source}: top level must be an object")
    n = _int(data, "n", source)
    m = _int(data, "m", source)
    if n < 1 or m < 1:
        raise ScenarioError(f"{source}: n and m must be positive")

    anchor = data.get("anchor")
    if not isinstance(anchor, list) or len(anchor) != m \
            or any(not isinstance(r, list) or len(r) != n for r in anchor):
        raise ScenarioError(f"{source}: 'anchor' must be an {m}x{n} array of strings")
    rows = tuple(tuple(_expr(s, n, m, f"{source}: anchor[{a + 1}][{k + 1}]")
                       for k, s in enumerate(r)) for a, r in enumerate(anchor))

    structure = {}
    for i, entry in enumerate(data.get("structure", [])):
        where = f"{source}: structure[{i}]"
        if not isinstance(entry, dict):
            raise ScenarioError(f"{where}: expected an object")
        c, a, b = (_int(entry, k, where) - 1 for k in ("gamma", "alpha", "beta"))
        if not all(0 <= x < m for x in (c, a, b)):
            raise ScenarioError(f"{where}: indices must lie in 1..{m}")
        if not a < b:
            raise ScenarioError(f"{where}: need alpha < beta")
        if (c, a, b) in structure:
            raise ScenarioError(f"{where}: duplicate entry")
        structure[(c, a, b)] = _expr(entry.get("expr"), n, m, where)
    try:
        spec = AlgebroidSpec(n, m, rows, structure)
    except ValueError as exc:
        raise ScenarioError(f"{source}: {exc}") from exc

    F = _expr(data.get("finsler"), n, m, f"{source}: finsler")

    functions = {name: _expr(s, n, m, f"{source}: named_functions.{name}")
                 for name, s in data.get("named_functions", {}).items()}

    sections = {}
    for name, body in data.get("named_sections", {}).items():
        where = f"{source}: named_sections.{name}"
        if not isinstance(body, dict) or set(body) - set(_BLOCKS):
            raise ScenarioError(f"{where}: expected an object with keys among {_BLOCKS}")
        blocks = {}
        for blk in _BLOCKS:
            vals = body.get(blk, ["0"] * m)
            if not isinstance(vals, list) or len(vals) != m:
                raise ScenarioError(f"{where}.{blk}: need {m} expressions")
            blocks[blk] = tuple(_expr(s, n, m, f"{where}.{blk}[{i + 1}]") for i, s in enumerate(vals))
        sections[name] = SectionField(**blocks)

    forms = {}
    for name, body in data.get("named_forms", {}).items():
        where = f"{source}: named_forms.{name}"
        if not isinstance(body, dict):
            raise ScenarioError(f"{where}: expected an object")
        p, q = _int(body, "p", where), _int(body, "q", where)
        if not (0 <= p <= m and 0 <= q <= m):
            raise ScenarioError(f"{where}: degree ({p}, {q}) impossible for m={m}")
        coeffs = {}
        for key, s in body.get("coeffs", {}).items():
            A, B = form_key(key, m, where)
            if (len(A), len(B)) != (p, q):
                raise ScenarioError(f"{where}: key {key!r} does not match degree ({p}, {q})")
            coeffs[(A, B)] = _expr(s, n, m, f"{where}.coeffs[{key!r}]")
        forms[name] = HorizontalForm(m, p, q, coeffs)

    integration = data.get("integration", {})
    if not isinstance(integration, dict):
        raise ScenarioError(f"{source}: 'integration' must be an object")
    for name in integration.get("sections", []):
        if name not in sections:
            raise ScenarioError(f"{source}: integration.sections names unknown section {name!r}")
    return Scenario(str(data.get("id", default_id)), spec, F, functions, sections, forms,
                    integration)


def parse_point(text: str, n: int, m: int) -> ex.EvalPoint:
    """'z1=1+2i,u1=0.5' -> EvalPoint; every coordinate must be given once."""
    vals = {}
    for item in filter(None, (t.strip() for t in text.split(","))):
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep:
            raise ValueError(f"point entry {item!r} is not name=value")
        if name in vals:
            raise ValueError(f"coordinate {name} given twice")
        try:
            vals[name] = complex(value.strip().replace(" ", "").replace("i", "j"))
        except ValueError:
            raise ValueError(f"bad complex number {value!r} for {name}") from None
    wanted = [f"z{k + 1}" for k in range(n)] + [f"u{a + 1}" for a in range(m)]
    missing = [w for w in wanted if w not in vals]
    extra = sorted(set(vals) - set(wanted))
    if missing or extra:
        raise ValueError(f"point needs exactly {', '.join(wanted)}"
                         + (f"; missing {', '.join(missing)}" if missing else "")
                         + (f"; unknown {', '.join(extra)}" if extra else ""))
    return ex.EvalPoint(tuple(vals[f"z{k + 1}"] for k in range(n)),
                        tuple(vals[f"u{a + 1}"] for a in range(m)))
