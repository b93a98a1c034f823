"""Deterministic JSON encoding and decoding of exact and floating values.

Rationals are written as ``"num/den"`` in lowest terms, floats with 17
significant digits, quadratic-field elements as ``"a + b*sqrt(d)"``.  Keys keep
insertion order so identical inputs give byte-identical output.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np

from .model import Binomial
from .qfield import QuadraticNumber


def fraction_text(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def float_text(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def jsonable(obj):
    """Recursively convert to plain JSON types (floats are left as floats)."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return fraction_text(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, QuadraticNumber):
        return str(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, Binomial):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "as_dict"):
        return jsonable(obj.as_dict())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, float):
        return float_text(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return json.dumps(obj)


def dumps(obj, indent: int = 2) -> str:
    return _encode(jsonable(obj), indent, 0)


# -- decoding ------------------------------------------------------------------

def parse_exact(value):
    """Number from JSON: ints stay ints, ``"p/q"`` and decimal strings become Fractions.

    A mapping ``{"a": .., "b": .., "d": ..}`` gives ``a + b*sqrt(d)``.
    JSON floats are kept as floats.
    """
    if isinstance(value, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        try:
            f = Fraction(value.strip())
        except ValueError:
            raise ValueError(f"not a rational number: {value!r}") from None
        return f.numerator if f.denominator == 1 else f
    if isinstance(value, dict) and "a" in value:
        a = parse_exact(value.get("a", 0))
        b = parse_exact(value.get("b", 0))
        d = int(value.get("d", 5))
        return QuadraticNumber(a, b, d)
    raise ValueError(f"not a number: {value!r}")


def parse_binomial(obj) -> Binomial:
    """``{"plus": [var, ...], "minus": [var, ...]}``; a variable is an int or index list.

    Repeated variables give higher exponents.  A string is parsed as ``p_i`` text.
    """
    if isinstance(obj, str):
        return Binomial.parse(obj)
    if not isinstance(obj, dict) or "plus" not in obj or "minus" not in obj:
        raise ValueError("a binomial needs 'plus' and 'minus' lists")

    def var(v):
        return tuple(int(x) for x in v) if isinstance(v, (list, tuple)) else int(v)

    return Binomial.from_variables([var(v) for v in obj["plus"]], [var(v) for v in obj["minus"]])


def binomial_json(g: Binomial, name=None) -> dict:
    def expand(mono):
        out = []
        for v, e in mono:
            out.extend([list(v) if isinstance(v, tuple) else v] * e)
        return out

    return {"plus": expand(g.plus), "minus": expand(g.minus), "text": g.format(name)}


def load(path):
    """Read JSON from a file path (``-`` for standard input)."""
    import sys

    if path == "-":
        return json.load(sys.stdin)
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
