"""JSON map descriptions: ``{"n": int, "expr": node}`` mirroring the MapExpr tree.

Complex numbers are written as ``[re, im]`` pairs.  Parse failures raise
:class:`MapFormatError` carrying a JSON-path style location.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import MapFormatError, PolySchwarzError
from .maps import Automorphism, Compose, Dilation, Identity, MapExpr, Moebius, Normalizer, Polynomial


def complex_to_pair(c) -> list:
    c = complex(c)
    return [c.real, c.imag]


def _pair(x, loc) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in x):
        return complex(x[0], x[1])
    raise MapFormatError(f"expected a complex number [re, im], got {x!r}", loc)


def _vector(x, loc) -> np.ndarray:
    if not isinstance(x, list):
        raise MapFormatError("expected a list of complex numbers", loc)
    return np.array([_pair(v, f"{loc}[{i}]") for i, v in enumerate(x)], complex)


def map_to_node(expr: MapExpr) -> dict:
    if isinstance(expr, Identity):
        return {"kind": "identity"}
    if isinstance(expr, Moebius):
        return {"kind": "moebius", "matrix": [[complex_to_pair(c) for c in row] for row in expr.matrix]}
    if isinstance(expr, Automorphism):
        return {"kind": "automorphism", "a": [complex_to_pair(c) for c in expr.a]}
    if isinstance(expr, Normalizer):
        return {"kind": "normalizer", "a": [complex_to_pair(c) for c in expr.a]}
    if isinstance(expr, Dilation):
        return {"kind": "dilation", "s": expr.s, "inner": map_to_node(expr.inner)}
    if isinstance(expr, Compose):
        return {"kind": "compose", "outer": map_to_node(expr.outer), "inner": map_to_node(expr.inner)}
    if isinstance(expr, Polynomial):
        return {
            "kind": "polynomial",
            "terms": [
                {"target": t.target, "exponents": list(t.exponents), "coeff": complex_to_pair(t.coeff)}
                for t in expr.terms
            ],
        }
    raise TypeError(f"no description for {type(expr).__name__}")


def map_to_dict(expr: MapExpr) -> dict:
    return {"n": expr.n, "expr": map_to_node(expr)}


def _node(node, n, loc) -> MapExpr:
    if not isinstance(node, dict):
        raise MapFormatError("expected an object", loc)
    kind = node.get("kind")
    try:
        if kind == "identity":
            return Identity(n)
        if kind == "moebius":
            rows = node.get("matrix")
            if not isinstance(rows, list):
                raise MapFormatError("moebius needs a 'matrix'", f"{loc}.matrix")
            m = np.array([_vector(r, f"{loc}.matrix[{i}]") for i, r in enumerate(rows)])
            if m.shape != (n + 1, n + 1):
                raise MapFormatError(f"matrix must be {n + 1}x{n + 1}, got {m.shape}", f"{loc}.matrix")
            return Moebius(m)
        if kind in ("automorphism", "normalizer"):
            a = _vector(node.get("a"), f"{loc}.a")
            if a.shape[0] != n:
                raise MapFormatError(f"'a' must have {n} entries", f"{loc}.a")
            return Automorphism(a) if kind == "automorphism" else Normalizer(a)
        if kind == "dilation":
            s = node.get("s")
            if not isinstance(s, (int, float)) or isinstance(s, bool):
                raise MapFormatError("dilation needs a real 's'", f"{loc}.s")
            return Dilation(float(s), _node(node.get("inner"), n, f"{loc}.inner"))
        if kind == "compose":
            return Compose(_node(node.get("outer"), n, f"{loc}.outer"), _node(node.get("inner"), n, f"{loc}.inner"))
        if kind == "polynomial":
            terms = node.get("terms")
            if not isinstance(terms, list):
                raise MapFormatError("polynomial needs a 'terms' list", f"{loc}.terms")
            parsed = []
            for i, t in enumerate(terms):
                tl = f"{loc}.terms[{i}]"
                if not isinstance(t, dict) or not isinstance(t.get("target"), int):
                    raise MapFormatError("term needs an integer 'target'", tl)
                exps = t.get("exponents")
                if not isinstance(exps, list) or not all(isinstance(e, int) for e in exps):
                    raise MapFormatError("term needs integer 'exponents'", f"{tl}.exponents")
                parsed.append((t["target"], tuple(exps), _pair(t.get("coeff"), f"{tl}.coeff")))
            return Polynomial(n, tuple(parsed))
    except MapFormatError:
        raise
    except PolySchwarzError as exc:
        raise MapFormatError(str(exc), loc) from exc
    raise MapFormatError(f"unknown node kind {kind!r}", f"{loc}.kind")


def map_from_dict(doc) -> MapExpr:
    if not isinstance(doc, dict):
        raise MapFormatError("top level must be an object", "$")
    n = doc.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise MapFormatError("'n' must be an integer >= 2", "$.n")
    expr = _node(doc.get("expr"), n, "$.expr")
    if expr.n != n:
        raise MapFormatError(f"expression has dimension {expr.n}, header says {n}", "$.expr")
    return expr


def load_map(path) -> MapExpr:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MapFormatError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} column {exc.colno}") from exc
    except OSError as exc:
        raise MapFormatError(f"cannot read map file: {exc.strerror}", str(path)) from exc
    return map_from_dict(doc)


def dump_map(expr: MapExpr, path) -> None:
    with open(path, "w") as fh:
        json.dump(map_to_dict(expr), fh, indent=1, sort_keys=True)
        fh.write("\n")
