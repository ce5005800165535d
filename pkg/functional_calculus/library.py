"""
Named functions for the command line.

    id | re | immag | sq | sqrt | exp_re | exp | inv | abs2 | const:<c> | chi:<k>

const takes a Python complex literal read in C_j (e.g. const:2, const:1+2j); chi:k is the
indicator of the k-th atom, 0-based.
"""
from __future__ import annotations

import cmath
import math

from core.exceptions import InvalidSliceFunctionError

from .models import SimpleFunction, SliceFunction


def _sqrt(u: float, v: float) -> complex:
    root = cmath.sqrt(complex(u, abs(v)))
    return complex(root.real, math.copysign(root.imag, v))


def _inv_alpha(u: float, v: float) -> float:
    return u / (u * u + v * v)


def _inv_beta(u: float, v: float) -> float:
    return -v / (u * u + v * v)


IDENTITY = SliceFunction("id", lambda u, v: u, lambda u, v: v)
REAL_PART = SliceFunction("re", lambda u, v: u, lambda u, v: 0.0)
IMAGINARY_PART = SliceFunction("immag", lambda u, v: 0.0, lambda u, v: v)
SQUARE = SliceFunction("sq", lambda u, v: u * u - v * v, lambda u, v: 2.0 * u * v)
SQRT = SliceFunction("sqrt", lambda u, v: _sqrt(u, v).real, lambda u, v: _sqrt(u, v).imag)
EXP_RE = SliceFunction("exp_re", lambda u, v: math.exp(u), lambda u, v: 0.0)
EXP = SliceFunction("exp", lambda u, v: math.exp(u) * math.cos(v), lambda u, v: math.exp(u) * math.sin(v))
INVERSE = SliceFunction("inv", _inv_alpha, _inv_beta)
ABS2 = SliceFunction("abs2", lambda u, v: u * u + v * v, lambda u, v: 0.0)

NAMED = {f.name: f for f in (IDENTITY, REAL_PART, IMAGINARY_PART, SQUARE, SQRT, EXP_RE, EXP, INVERSE, ABS2)}


def constant(c: complex) -> SliceFunction:
    c = complex(c)
    return SliceFunction(f"const:{c}", lambda u, v: c, lambda u, v: 0.0, intrinsic=c.imag == 0.0)


def parse_function(text: str) -> SliceFunction | SimpleFunction:
    key = str(text).strip()
    if key in NAMED:
        return NAMED[key]
    head, _, arg = key.partition(":")
    if head == "const" and arg:
        try:
            return constant(complex(arg.replace(" ", "")))
        except ValueError as exc:
            raise InvalidSliceFunctionError(f"Cannot read constant {arg!r}.") from exc
    if head == "chi" and arg:
        try:
            k = int(arg)
        except ValueError as exc:
            raise InvalidSliceFunctionError(f"chi needs an atom index, got {arg!r}.") from exc
        if k < 0:
            raise InvalidSliceFunctionError(f"Atom index must be >= 0, got {k}.")
        return SimpleFunction.indicator([k], name=f"chi:{k}")
    names = ", ".join(sorted(NAMED) + ["const:<c>", "chi:<k>"])
    raise InvalidSliceFunctionError(f"Unknown function {text!r}; choose one of {names}.")
