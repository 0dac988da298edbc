"""Deterministic serialization of analysis reports."""

import json
import math
from fractions import Fraction

import jsonschema
import numpy as np

SCHEMA_VERSION = 1

_num = {"type": ["number", "null"]}
_str_or_null = {"type": ["string", "null"]}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "system", "config", "diagram", "monodromy", "weights", "flow", "eta",
                 "integrals", "beta", "verdict", "warnings", "errors"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "system": {
            "type": "object",
            "required": ["name", "P", "Q", "params"],
            "properties": {
                "name": {"type": "string"},
                "P": {"type": "array", "items": {"type": "array", "minItems": 3, "maxItems": 3}},
                "Q": {"type": "array", "items": {"type": "array", "minItems": 3, "maxItems": 3}},
                "params": {"type": "object", "additionalProperties": {"type": "string"}},
            },
        },
        "config": {"type": "object"},
        "diagram": {
            "type": ["object", "null"],
            "required": ["vertices", "edges", "warnings"],
            "properties": {
                "vertices": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
                "edges": {"type": "array", "items": {
                    "type": "object", "required": ["start", "end", "weights", "r"]}},
                "warnings": {"type": "array", "items": {"type": "string"}},
            },
        },
        "monodromy": {
            "type": ["object", "null"],
            "required": ["violated", "reasons"],
            "properties": {"violated": {"type": "boolean"},
                           "reasons": {"type": "array", "items": {"type": "string"}}},
        },
        "weights": {"type": "array", "items": {
            "type": "object",
            "required": ["weights", "r", "omega", "orientation", "mo_class", "q_polynomial", "branches",
                         "curve", "sign_test", "xi"],
            "properties": {
                "weights": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
                "r": {"type": ["integer", "null"]},
                "omega": {"type": "array", "items": {
                    "type": "object", "required": ["angle", "multiplicity"],
                    "properties": {"angle": _num, "multiplicity": {"type": "integer"}}}},
                "orientation": _str_or_null,
                "mo_class": {"type": ["boolean", "null"]},
                "branches": {"type": "array", "items": {
                    "type": "object", "required": ["alpha0", "fuchs_index", "residual"]}},
                "curve": {"type": ["object", "null"], "required": ["F", "s", "exact", "K", "r_bar"]},
                "sign_test": {"type": ["object", "null"], "required": ["verdict", "note"]},
                "xi": {"type": ["object", "null"]},
            },
        }},
        "flow": {
            "type": ["object", "null"],
            "required": ["weights", "orientation", "poincare"],
            "properties": {"poincare": {"type": "array", "items": {
                "type": "object", "required": ["rho0", "rho1", "status", "difference"],
                "properties": {"rho0": _num, "rho1": _num, "difference": _num,
                               "status": {"enum": ["completed", "escaped", "collapsed", "stalled"]}}}}},
        },
        "eta": {
            "type": ["object", "null"],
            "required": ["values", "method"],
            "properties": {"values": {"type": "array", "items": _num}, "method": _str_or_null},
        },
        "integrals": {
            "type": ["object", "null"],
            "required": ["curve_weights", "samples"],
            "properties": {"samples": {"type": "array", "items": {
                "type": "object", "required": ["rho0", "value", "status", "method", "oracle", "discrepancy"],
                "properties": {"rho0": _num, "value": _num, "oracle": _num, "discrepancy": _num}}}},
        },
        "beta": {"type": ["object", "null"]},
        "verdict": {
            "type": "object",
            "required": ["kind", "stability", "rule", "evidence", "notes"],
            "properties": {
                "kind": {"enum": ["center", "focus", "inconclusive", "not-monodromic", "degenerate"]},
                "stability": {"enum": ["stable", "unstable", None]},
                "rule": _str_or_null,
                "evidence": {"type": "array", "items": {"type": "string"}},
                "notes": {"type": "array", "items": {"type": "string"}},
            },
            "allOf": [
                {"if": {"properties": {"kind": {"const": "center"}}},
                 "then": {"properties": {"evidence": {"minItems": 2}}}},
                {"if": {"properties": {"kind": {"const": "focus"}}},
                 "then": {"properties": {"evidence": {"minItems": 1}}}},
            ],
        },
        "warnings": {"type": "array", "items": {"type": "string"}},
        "errors": {"type": "array", "items": {"type": "string"}},
    },
}


def _plain(obj):
    """Reduce a report tree to JSON-compatible builtins (non-finite floats -> None)."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _dump(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_dump(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_dump(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _dump(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, float):
        text = format(obj, ".17g")
        return text if any(ch in text for ch in ".en") else text + ".0"
    return json.dumps(obj)


def report_data(report):
    data = report.to_dict() if hasattr(report, "to_dict") else report
    return _plain(data)


def validate_report(data):
    """Raise jsonschema.ValidationError if ``data`` does not match the report schema."""
    jsonschema.validate(data, REPORT_SCHEMA)


def emit_report(report, format="json"):
    data = report_data(report)
    if format == "json":
        return (_dump(data, 2, 0) + "\n").encode("utf-8")
    if format == "text":
        return render_text(data).encode("utf-8")
    raise ValueError(f"unknown format {format!r}")


def _fmt(v, spec=".6g"):
    return "-" if v is None else format(v, spec)


def render_text(data):
    lines = []
    sysd = data["system"]
    params = ", ".join(f"{k} = {v}" for k, v in sysd["params"].items())
    lines.append(f"system: {sysd['name']}" + (f" ({params})" if params else ""))
    v = data["verdict"]
    verdict = v["kind"] + (f" ({v['stability']})" if v["stability"] else "")
    lines.append(f"verdict: {verdict}" + (f"  [{v['rule']}]" if v["rule"] else ""))
    for e in v["evidence"]:
        lines.append(f"  evidence: {e}")
    for n in v["notes"]:
        lines.append(f"  note: {n}")
    if data["diagram"]:
        d = data["diagram"]
        lines.append("newton diagram: vertices " + " ".join(f"({a},{b})" for a, b in d["vertices"]))
    for rec in data["weights"]:
        p, q = rec["weights"]
        omega = ", ".join(f"{o['angle']:.6g}^{o['multiplicity']}" for o in rec["omega"]) or "none"
        lines.append(f"weights ({p},{q}): r = {rec['r']}, orientation {rec['orientation']}, "
                     f"characteristic directions {omega}")
        qp = rec["q_polynomial"]
        if qp:
            lines.append(f"  determining polynomial coefficients (eta^0..): {', '.join(qp['coeffs'])}")
        for b in rec["branches"]:
            a = b["alpha0"]
            j = b["fuchs_index"]
            jtxt = "-" if j is None else f"{j[0]:.6g}{j[1]:+.6g}i"
            lines.append(f"  branch alpha0 = {a[0]:.6g}{a[1]:+.6g}i, Fuchs index {jtxt}, residual {b['residual']:.2g}")
        c = rec["curve"]
        if c:
            kind = "exact" if c["exact"] else f"series, valid to degree {c['valid_degree']}"
            lines.append(f"  curve: weighted degree {c['s']} ({kind}); cofactor leading degree {c['r_bar']}")
        elif rec.get("curve_error"):
            lines.append(f"  curve: {rec['curve_error']}")
        if rec["sign_test"]:
            lines.append(f"  sign test: {rec['sign_test']['verdict']} ({rec['sign_test']['note']})")
        if rec["xi"] and rec["xi"].get("value") is not None:
            lines.append(f"  principal value xi = {rec['xi']['value']:.12g}")
    eta = data["eta"]
    if eta and eta["values"]:
        vals = ", ".join(_fmt(x, ".10g") for x in eta["values"])
        lines.append(f"eta: {vals}  ({eta['method']})")
    flow = data["flow"]
    if flow:
        lines.append(f"return map (weights {tuple(flow['weights'])}):")
        for p in flow["poincare"]:
            lines.append(f"  rho0 {p['rho0']:.4e}  {p['status']:9s}  Pi - rho0 = {_fmt(p['difference'], '.6e')}")
    integ = data["integrals"]
    if integ:
        lines.append(f"cofactor integral (curve weights {tuple(integ['curve_weights'])}):")
        for s in integ["samples"]:
            lines.append(f"  rho0 {s['rho0']:.4e}  I = {_fmt(s['value'], '.10g')}  "
                         f"oracle gap {_fmt(s['discrepancy'], '.2e')}  {s['status']}")
    if data["beta"]:
        b = data["beta"]
        if b.get("coeffs"):
            lines.append("beta fit: " + ", ".join(f"b{i} = {c:.8g}" for i, c in b["coeffs"].items()))
        if b.get("quadrature"):
            lines.append("beta quadrature: " + ", ".join(f"{c:.10g}" for c in b["quadrature"]))
    for w in data["warnings"]:
        lines.append(f"warning: {w}")
    for e in data["errors"]:
        lines.append(f"error: {e}")
    return "\n".join(lines) + "\n"
