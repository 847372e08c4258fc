"""Text form of pure states: ``c1|bits> + c2|bits> - ...``.

Coefficients are products/quotients of factors, each a real number,
``sqrt(x)``, or a parenthesised Python complex literal such as
``(0.5-0.25j)``. A bare term ``|01>`` has coefficient 1. ``⟩`` may be
used instead of ``>``. Whitespace is ignored. The result is normalized.
"""

from __future__ import annotations

import math
import re

import numpy as np

from .states import PureState

_NUMBER = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_FACTOR = rf"(?:{_NUMBER}|sqrt\({_NUMBER}\)|\([^()|]*\))"
_TERM = re.compile(
    rf"(?P<sign>[+-]?)(?P<coef>{_FACTOR}(?:[*/]{_FACTOR})*)?\*?\|(?P<bits>[01]+)(?:>|⟩)"
)
_FACTOR_RE = re.compile(rf"([*/]?)({_FACTOR})")


class StateSyntaxError(ValueError):
    pass


def _factor_value(tok: str) -> complex:
    if tok.startswith("sqrt("):
        return math.sqrt(float(tok[5:-1]))
    if tok.startswith("("):
        try:
            return complex(tok[1:-1])
        except ValueError:
            raise StateSyntaxError(f"bad complex coefficient {tok!r}") from None
    return float(tok)


def _coefficient(text: str | None) -> complex:
    if not text:
        return 1.0
    value: complex = 1.0
    pos = 0
    for m in _FACTOR_RE.finditer(text):
        if m.start() != pos:
            raise StateSyntaxError(f"cannot parse coefficient {text!r}")
        op, tok = m.groups()
        if pos == 0 and op:
            raise StateSyntaxError(f"coefficient {text!r} starts with an operator")
        f = _factor_value(tok)
        if op == "/":
            if f == 0:
                raise StateSyntaxError(f"division by zero in {text!r}")
            value /= f
        else:
            value *= f
        pos = m.end()
    if pos != len(text):
        raise StateSyntaxError(f"cannot parse coefficient {text!r}")
    return value


def parse_terms(text: str) -> dict[str, complex]:
    """Unnormalized ``{bitstring: coefficient}`` mapping, rejecting repeats."""
    s = re.sub(r"\s+", "", text)
    if not s:
        raise StateSyntaxError("empty state text")
    terms: dict[str, complex] = {}
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None:
            raise StateSyntaxError(f"malformed term at {s[pos:pos + 20]!r}")
        if pos > 0 and not m.group("sign"):
            raise StateSyntaxError(f"missing '+' or '-' before {s[pos:pos + 20]!r}")
        bits = m.group("bits")
        if terms and len(bits) != len(next(iter(terms))):
            raise StateSyntaxError(f"inconsistent bitstring length in |{bits}>")
        if bits in terms:
            raise StateSyntaxError(f"duplicate basis term |{bits}>")
        c = _coefficient(m.group("coef"))
        terms[bits] = -c if m.group("sign") == "-" else c
        pos = m.end()
    return terms


def parse_state(text: str) -> PureState:
    terms = parse_terms(text)
    n = len(next(iter(terms)))
    if not 1 <= n <= 4:
        raise StateSyntaxError(f"states must have 1 to 4 qubits, got {n}")
    vec = np.zeros(2**n, dtype=complex)
    for bits, c in terms.items():
        vec[int(bits, 2)] = c
    if not np.any(vec):
        raise StateSyntaxError("state text describes the zero vector")
    return PureState.from_vector(vec)


def _format_coef(c: complex, digits: int | None) -> str:
    fmt = repr if digits is None else (lambda x: f"{x:.{digits}g}")
    if c.imag == 0:
        return fmt(abs(c.real))
    return f"({fmt(c.real)}{'+' if c.imag >= 0 else '-'}{fmt(abs(c.imag))}j)"


def format_state(state: PureState, digits: int | None = None, atol: float = 0.0) -> str:
    """Inverse of :func:`parse_state`; ``digits=None`` writes exact float reprs."""
    n = state.num_qubits
    parts = []
    for idx, c in enumerate(state.amplitudes):
        if abs(c) <= atol or c == 0:
            continue
        c = complex(c)
        neg = c.imag == 0 and c.real < 0
        sign = "-" if neg else "+"
        body = f"{_format_coef(c, digits)}|{idx:0{n}b}>"
        parts.append((sign, body))
    if not parts:
        return "0"
    sign, body = parts[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out
