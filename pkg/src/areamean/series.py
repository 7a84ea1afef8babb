"""Finite power series f(z) = sum a_k z^k on the unit disk."""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np


class CoeffParseError(ValueError):
    """Bad coefficient text; ``line`` and ``col`` are 1-based."""

    def __init__(self, message, line=1, col=1):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


_NUM = r"[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?|[0-9]+\.(?:[eE][+-]?[0-9]+)?"
_ENTRY = re.compile(
    rf"^(?P<re>[+-]?(?:{_NUM}))?(?:(?P<sign>[+-])(?P<im>{_NUM})?i)?$"
    rf"|^(?P<pure>[+-]?(?:{_NUM})?)i$"
)


def _parse_entry(text: str) -> complex:
    m = _ENTRY.match(text)
    if not m or not text:
        raise ValueError(text)
    if m.group("pure") is not None:
        body = m.group("pure")
        if body in ("", "+", "-"):
            body += "1"
        return complex(0.0, float(body))
    real = float(m.group("re")) if m.group("re") is not None else 0.0
    if m.group("sign") is None:
        return complex(real, 0.0)
    imag = float(m.group("im") or "1")
    return complex(real, imag if m.group("sign") == "+" else -imag)


def parse_coeffs(text: str, line: int = 1) -> tuple:
    """Parse ``"a0, a1+bi, a2-bi, ..."`` into a tuple of complex numbers."""
    out = []
    col = 1
    for raw in text.split(","):
        stripped = raw.strip()
        start = col + (len(raw) - len(raw.lstrip()))
        if not stripped:
            raise CoeffParseError("empty coefficient", line, start)
        try:
            out.append(_parse_entry(stripped.replace(" ", "")))
        except ValueError:
            raise CoeffParseError(f"cannot parse coefficient {stripped!r}", line, start) from None
        col += len(raw) + 1
    return tuple(out)


def format_coeff(c: complex) -> str:
    if c.imag == 0:
        return repr(float(c.real))
    sign = "+" if c.imag >= 0 or np.isnan(c.imag) else "-"
    return f"{float(c.real)!r}{sign}{abs(float(c.imag))!r}i"


@dataclass(frozen=True)
class PowerSeries:
    coeffs: tuple

    def __post_init__(self):
        c = tuple(complex(a) for a in self.coeffs)
        if not c:
            raise ValueError("a power series needs at least one coefficient")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def parse(cls, text: str) -> "PowerSeries":
        return cls(parse_coeffs(text))

    @classmethod
    def monomial(cls, k: int, c: complex = 1.0) -> "PowerSeries":
        return cls((0.0,) * k + (c,))

    @property
    def degree(self) -> int:
        return len(self.normalized().coeffs) - 1

    def normalized(self) -> "PowerSeries":
        c = list(self.coeffs)
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        return PowerSeries(tuple(c))

    def is_constant(self) -> bool:
        return all(a == 0 for a in self.coeffs[1:])

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coeffs)

    def array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=np.complex128)

    def __call__(self, z):
        return eval_series(self, z)

    def derivative(self) -> "PowerSeries":
        return derivative(self)

    def roots(self) -> np.ndarray:
        c = self.normalized().array()
        if c.size < 2:
            return np.zeros(0, dtype=np.complex128)
        return np.roots(c[::-1])

    def label(self) -> str:
        c = self.normalized().coeffs
        nz = [k for k, a in enumerate(c) if a != 0]
        if len(nz) == 1 and c[nz[0]] == 1:
            k = nz[0]
            return "1" if k == 0 else ("z" if k == 1 else f"z^{k}")
        return ",".join(format_coeff(a) for a in c)

    def text(self) -> str:
        return ",".join(format_coeff(a) for a in self.coeffs)


def eval_series(f: PowerSeries, z):
    """Horner evaluation; ``z`` may be a scalar or an array."""
    z = np.asarray(z, dtype=np.complex128)
    acc = np.zeros_like(z)
    for a in reversed(f.coeffs):
        acc = acc * z + a
    return complex(acc) if acc.ndim == 0 else acc


def derivative(f: PowerSeries) -> PowerSeries:
    if len(f.coeffs) == 1:
        return PowerSeries((0.0,))
    return PowerSeries(tuple(k * a for k, a in enumerate(f.coeffs) if k > 0))


def modulus_p(f: PowerSeries, r, theta, p: float):
    """|f(r e^{i theta})|**p, with 0**p = 0."""
    val = np.abs(eval_series(f, np.asarray(r) * np.exp(1j * np.asarray(theta))))
    out = np.where(val > 0, val ** p, 0.0)
    return float(out) if out.ndim == 0 else out
