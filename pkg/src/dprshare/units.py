"""Dimension-checked scalars for time, size and rate arithmetic.

A :class:`Quantity` is a ``float`` that carries exponents for two base
dimensions, seconds and bytes.  Adding or comparing quantities of different
dimension raises :class:`UnitError`; multiplying and dividing combines the
exponents.  A result with no dimension collapses back to a plain ``float``.

Pixels, lines and clock cycles are treated as dimensionless counts, so a
clock frequency is ``1/s`` and ``pixels / Hz`` is a time.
"""

from __future__ import annotations

import math
from typing import Iterable, Union

__all__ = [
    "UnitError",
    "Quantity",
    "Seconds",
    "Bytes",
    "Hertz",
    "BytesPerSecond",
    "seconds",
    "ms",
    "us",
    "nbytes",
    "hertz",
    "mhz",
    "bytes_per_second",
    "total",
]

Number = Union[int, float]


class UnitError(TypeError):
    """Raised on arithmetic or comparison between incompatible dimensions."""


_NAMES = {
    (1, 0): "s",
    (0, 1): "B",
    (-1, 0): "Hz",
    (-1, 1): "B/s",
}


class Quantity(float):
    __slots__ = ("dim",)

    def __new__(cls, value: Number, dim: tuple[int, int]):
        if isinstance(value, Quantity):
            raise UnitError("cannot wrap a Quantity in another Quantity")
        obj = super().__new__(cls, value)
        obj.dim = dim
        return obj

    # -- helpers -------------------------------------------------------------
    @property
    def unit(self) -> str:
        return _NAMES.get(self.dim, f"s^{self.dim[0]}*B^{self.dim[1]}")

    def _check(self, other, op: str) -> None:
        if isinstance(other, Quantity):
            if other.dim != self.dim:
                raise UnitError(f"cannot {op} {other.unit} and {self.unit}")
        elif isinstance(other, (int, float)):
            # bare zero is the additive identity (lets sum() work)
            if other != 0:
                raise UnitError(f"cannot {op} bare number {other!r} and {self.unit}")
        else:
            raise UnitError(f"cannot {op} {type(other).__name__} and {self.unit}")

    @staticmethod
    def _make(value: float, dim: tuple[int, int]):
        if dim == (0, 0):
            return float(value)
        return Quantity(float(value), dim)

    def __repr__(self) -> str:
        return f"{float(self)!r} {self.unit}"

    def __reduce__(self):
        return (Quantity, (float(self), self.dim))

    # -- additive --------------------------------------------------------------
    def __add__(self, other):
        self._check(other, "add")
        return Quantity(float(self) + float(other), self.dim)

    __radd__ = __add__

    def __sub__(self, other):
        self._check(other, "subtract")
        return Quantity(float(self) - float(other), self.dim)

    def __rsub__(self, other):
        self._check(other, "subtract")
        return Quantity(float(other) - float(self), self.dim)

    def __neg__(self):
        return Quantity(-float(self), self.dim)

    def __pos__(self):
        return self

    def __abs__(self):
        return Quantity(abs(float(self)), self.dim)

    # -- multiplicative --------------------------------------------------------
    def __mul__(self, other):
        if isinstance(other, Quantity):
            dim = (self.dim[0] + other.dim[0], self.dim[1] + other.dim[1])
            return self._make(float(self) * float(other), dim)
        if isinstance(other, (int, float)):
            return Quantity(float(self) * other, self.dim)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Quantity):
            dim = (self.dim[0] - other.dim[0], self.dim[1] - other.dim[1])
            return self._make(float(self) / float(other), dim)
        if isinstance(other, (int, float)):
            return Quantity(float(self) / other, self.dim)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, float)):
            return self._make(other / float(self), (-self.dim[0], -self.dim[1]))
        return NotImplemented

    def __floordiv__(self, other):
        raise UnitError("floor division is not defined on quantities")

    __rfloordiv__ = __floordiv__
    __mod__ = __floordiv__

    def __pow__(self, other):
        raise UnitError("powers are not defined on quantities")

    # -- ordering --------------------------------------------------------------
    def __lt__(self, other):
        self._check_cmp(other)
        return float(self) < float(other)

    def __le__(self, other):
        self._check_cmp(other)
        return float(self) <= float(other)

    def __gt__(self, other):
        self._check_cmp(other)
        return float(self) > float(other)

    def __ge__(self, other):
        self._check_cmp(other)
        return float(self) >= float(other)

    def _check_cmp(self, other) -> None:
        if isinstance(other, Quantity):
            if other.dim != self.dim:
                raise UnitError(f"cannot compare {other.unit} with {self.unit}")
        elif isinstance(other, (int, float)):
            # 0 and +-inf are dimension-free sentinels
            if other != 0 and not math.isinf(other):
                raise UnitError(f"cannot compare bare number {other!r} with {self.unit}")
        else:
            raise UnitError(f"cannot compare {type(other).__name__} with {self.unit}")

    __hash__ = float.__hash__


# Annotation aliases; the runtime type is always Quantity.
Seconds = Quantity
Bytes = Quantity
Hertz = Quantity
BytesPerSecond = Quantity

_S = (1, 0)
_B = (0, 1)
_HZ = (-1, 0)
_BPS = (-1, 1)


def seconds(x: Number) -> Quantity:
    return Quantity(x, _S)


def ms(x: Number) -> Quantity:
    return Quantity(x * 1e-3, _S)


def us(x: Number) -> Quantity:
    return Quantity(x * 1e-6, _S)


def nbytes(x: Number) -> Quantity:
    return Quantity(x, _B)


def hertz(x: Number) -> Quantity:
    return Quantity(x, _HZ)


def mhz(x: Number) -> Quantity:
    return Quantity(x * 1e6, _HZ)


def bytes_per_second(x: Number) -> Quantity:
    return Quantity(x, _BPS)


def total(values: Iterable[Quantity], zero: Quantity) -> Quantity:
    """Sum quantities starting from ``zero``, which fixes the dimension."""
    acc = zero
    for v in values:
        acc = acc + v
    return acc


def is_time(q) -> bool:
    return isinstance(q, Quantity) and q.dim == _S
