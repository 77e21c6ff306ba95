"""Closed-form vorticity functions omega(psi)."""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from numpy.polynomial import polynomial as P

KINDS = ("zero", "linear", "polynomial")


@dataclass(frozen=True)
class VorticityFn:
    """Vorticity as a polynomial in the stream function value.

    Coefficients are ordered constant-first, so ``coefficients=(1, 0, 3)``
    is ``1 + 3 p**2``. Use the :func:`zero`, :func:`linear` and
    :func:`polynomial` constructors rather than building this directly.
    """

    kind: str
    coefficients: Tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown vorticity kind {self.kind!r}")
        coefs = tuple(float(c) for c in self.coefficients)
        if not all(np.isfinite(coefs)):
            raise ValueError("vorticity coefficients must be finite")
        object.__setattr__(self, "coefficients", coefs)

    def __call__(self, p):
        return self.eval(p)

    def eval(self, p):
        if not self.coefficients:
            return np.zeros_like(p, dtype=float) if np.ndim(p) else 0.0
        return P.polyval(p, self.coefficients)

    def eval_deriv(self, p):
        d = P.polyder(self.coefficients) if len(self.coefficients) > 1 else ()
        if len(d) == 0:
            return np.zeros_like(p, dtype=float) if np.ndim(p) else 0.0
        return P.polyval(p, d)

    def eval_second_deriv(self, p):
        d = P.polyder(self.coefficients, 2) if len(self.coefficients) > 2 else ()
        if len(d) == 0:
            return np.zeros_like(p, dtype=float) if np.ndim(p) else 0.0
        return P.polyval(p, d)

    def antiderivative(self, p):
        """W(p) with W' = omega and W(0) = 0."""
        if not self.coefficients:
            return np.zeros_like(p, dtype=float) if np.ndim(p) else 0.0
        return P.polyval(p, P.polyint(self.coefficients))

    @property
    def is_affine(self):
        return len(self.coefficients) <= 2

    def to_dict(self):
        if self.kind == "linear":
            b, a = (self.coefficients + (0.0, 0.0))[:2]
            return {"kind": "linear", "a": a, "b": b}
        return {"kind": self.kind, "coefficients": list(self.coefficients)}

    @classmethod
    def from_dict(cls, d):
        kind = d.get("kind")
        if kind == "zero":
            return zero()
        if kind == "linear":
            return linear(d["a"], d["b"])
        if kind == "polynomial":
            return polynomial(d["coefficients"])
        raise ValueError(f"unknown vorticity kind {kind!r}")


def zero():
    return VorticityFn("zero", ())


def linear(a, b=0.0):
    """omega(p) = a*p + b."""
    return VorticityFn("linear", (b, a))


def polynomial(coefficients):
    return VorticityFn("polynomial", tuple(coefficients))


def eval(f, p):
    return f.eval(p)


def eval_deriv(f, p):
    return f.eval_deriv(p)
