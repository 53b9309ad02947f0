"""Truncated Taylor (jet) arithmetic to order 3 in two variables.

A ``Jet3`` carries a value together with every partial derivative through
third order at a point of the 2-d parameter domain.  Arithmetic propagates
derivatives exactly (Leibniz rule for products, Faa di Bruno through order 3
for unary functions), so composite expressions evaluated on seeded jets give
machine-accurate derivatives with no finite differencing.

Storage is symmetric-compact: the Hessian keeps (11, 12, 22) and the third
order keeps (111, 112, 122, 222); accessors sort indices, which removes
transposition bugs by construction.  Coefficients may be floats or numpy
arrays of a common shape, in which case every operation broadcasts and a
single jet models a field sampled on a batch of points.

Product formulas group terms in operand-symmetric pairs, so ``a * b`` and
``b * a`` agree to the last bit.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Jet3",
    "JetDomainError",
    "seed",
    "constant",
    "sin",
    "cos",
    "exp",
    "sqrt",
    "log",
    "pow_int",
    "where",
]


class JetDomainError(ValueError):
    """Raised when jet arithmetic leaves a function's domain (1/0, sqrt(<=0), ...)."""


def _any(cond) -> bool:
    return bool(np.any(cond))


class Jet3:
    """Value plus all partial derivatives through order 3 at a point of R^2.

    Slots hold the ten independent Taylor coefficients.  ``order`` records how
    many derivative orders are trustworthy: differentiating a field (see
    :meth:`deriv_field`) yields exact coefficients one order lower and zeros
    above, and accessors refuse to read past ``order``.
    """

    __slots__ = ("v", "g1", "g2", "h11", "h12", "h22",
                 "t111", "t112", "t122", "t222", "order")

    def __init__(self, v, g1=0.0, g2=0.0, h11=0.0, h12=0.0, h22=0.0,
                 t111=0.0, t112=0.0, t122=0.0, t222=0.0, order=3):
        self.v = v
        self.g1 = g1
        self.g2 = g2
        self.h11 = h11
        self.h12 = h12
        self.h22 = h22
        self.t111 = t111
        self.t112 = t112
        self.t122 = t122
        self.t222 = t222
        self.order = order

    # -- accessors ---------------------------------------------------------

    @property
    def value(self):
        return self.v

    @property
    def grad(self):
        """Gradient (d1, d2) as an array (stacked for batch jets)."""
        if self.order < 1:
            raise ValueError("jet does not carry first derivatives")
        return np.stack([np.asarray(self.g1, float), np.asarray(self.g2, float)])

    def partial(self, i: int):
        """First derivative d_i, i in {1, 2}."""
        if self.order < 1:
            raise ValueError("jet does not carry first derivatives")
        if i == 1:
            return self.g1
        if i == 2:
            return self.g2
        raise ValueError(f"index must be 1 or 2, got {i}")

    def partial2(self, i: int, j: int):
        """Second derivative d_i d_j; index order is immaterial."""
        if self.order < 2:
            raise ValueError("jet does not carry second derivatives")
        key = tuple(sorted((i, j)))
        try:
            return {(1, 1): self.h11, (1, 2): self.h12, (2, 2): self.h22}[key]
        except KeyError:
            raise ValueError(f"indices must be in {{1,2}}, got ({i},{j})") from None

    def partial3(self, i: int, j: int, k: int):
        """Third derivative d_i d_j d_k; index order is immaterial."""
        if self.order < 3:
            raise ValueError("jet does not carry third derivatives")
        key = tuple(sorted((i, j, k)))
        table = {(1, 1, 1): self.t111, (1, 1, 2): self.t112,
                 (1, 2, 2): self.t122, (2, 2, 2): self.t222}
        try:
            return table[key]
        except KeyError:
            raise ValueError(f"indices must be in {{1,2}}, got ({i},{j},{k})") from None

    def hessian(self):
        """Full symmetric 2x2 Hessian."""
        if self.order < 2:
            raise ValueError("jet does not carry second derivatives")
        return np.array([[self.h11, self.h12], [self.h12, self.h22]], dtype=float)

    def deriv_field(self, a: int) -> "Jet3":
        """Jet of the field d_a(self), one derivative order lower.

        The returned jet's top coefficients are zero-filled, not computed;
        ``order`` drops by one so reads past the valid order raise.
        """
        if a not in (1, 2):
            raise ValueError(f"index must be 1 or 2, got {a}")
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        z = np.zeros_like(np.asarray(self.v, float)) if isinstance(self.v, np.ndarray) else 0.0
        if a == 1:
            return Jet3(self.g1, self.h11, self.h12, self.t111, self.t112, self.t122,
                        z, z, z, z, order=self.order - 1)
        return Jet3(self.g2, self.h12, self.h22, self.t112, self.t122, self.t222,
                    z, z, z, z, order=self.order - 1)

    def __repr__(self):
        return (f"Jet3(v={self.v!r}, grad=({self.g1!r}, {self.g2!r}), "
                f"order={self.order})")

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet3):
            return Jet3(self.v + other.v, self.g1 + other.g1, self.g2 + other.g2,
                        self.h11 + other.h11, self.h12 + other.h12, self.h22 + other.h22,
                        self.t111 + other.t111, self.t112 + other.t112,
                        self.t122 + other.t122, self.t222 + other.t222,
                        order=min(self.order, other.order))
        return Jet3(self.v + other, self.g1, self.g2, self.h11, self.h12, self.h22,
                    self.t111, self.t112, self.t122, self.t222, order=self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet3(-self.v, -self.g1, -self.g2, -self.h11, -self.h12, -self.h22,
                    -self.t111, -self.t112, -self.t122, -self.t222, order=self.order)

    def __sub__(self, other):
        if isinstance(other, Jet3):
            return Jet3(self.v - other.v, self.g1 - other.g1, self.g2 - other.g2,
                        self.h11 - other.h11, self.h12 - other.h12, self.h22 - other.h22,
                        self.t111 - other.t111, self.t112 - other.t112,
                        self.t122 - other.t122, self.t222 - other.t222,
                        order=min(self.order, other.order))
        return Jet3(self.v - other, self.g1, self.g2, self.h11, self.h12, self.h22,
                    self.t111, self.t112, self.t122, self.t222, order=self.order)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet3):
            c = other
            return Jet3(self.v * c, self.g1 * c, self.g2 * c,
                        self.h11 * c, self.h12 * c, self.h22 * c,
                        self.t111 * c, self.t112 * c, self.t122 * c, self.t222 * c,
                        order=self.order)
        a, b = self, other
        # Terms paired (a-slot * b-slot + mirrored) so the result is bitwise
        # symmetric under operand exchange.
        v = a.v * b.v
        g1 = a.g1 * b.v + a.v * b.g1
        g2 = a.g2 * b.v + a.v * b.g2
        h11 = (a.h11 * b.v + a.v * b.h11) + 2.0 * (a.g1 * b.g1)
        h12 = (a.h12 * b.v + a.v * b.h12) + (a.g1 * b.g2 + a.g2 * b.g1)
        h22 = (a.h22 * b.v + a.v * b.h22) + 2.0 * (a.g2 * b.g2)
        t111 = (a.t111 * b.v + a.v * b.t111) + 3.0 * (a.h11 * b.g1 + a.g1 * b.h11)
        t112 = ((a.t112 * b.v + a.v * b.t112)
                + (a.h11 * b.g2 + a.g2 * b.h11)
                + 2.0 * (a.h12 * b.g1 + a.g1 * b.h12))
        t122 = ((a.t122 * b.v + a.v * b.t122)
                + (a.h22 * b.g1 + a.g1 * b.h22)
                + 2.0 * (a.h12 * b.g2 + a.g2 * b.h12))
        t222 = (a.t222 * b.v + a.v * b.t222) + 3.0 * (a.h22 * b.g2 + a.g2 * b.h22)
        return Jet3(v, g1, g2, h11, h12, h22, t111, t112, t122, t222,
                    order=min(a.order, b.order))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet3):
            return self * _reciprocal(other)
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return _reciprocal(self) * other

    def __pow__(self, n):
        return pow_int(self, n)


def seed(point, index: int) -> Jet3:
    """Jet of the coordinate function x_index at ``point``.

    ``point`` is a 2-vector (or a pair of equal-shape arrays for a batch of
    points); ``index`` is 1 or 2.
    """
    if index not in (1, 2):
        raise ValueError(f"seed index must be 1 or 2, got {index}")
    p0, p1 = point[0], point[1]
    v = p0 if index == 1 else p1
    return Jet3(v, 1.0 if index == 1 else 0.0, 1.0 if index == 2 else 0.0)


def constant(c, like: Jet3 | None = None) -> Jet3:
    """Constant jet; with ``like`` given, broadcast to that jet's batch shape."""
    if like is not None and isinstance(like.v, np.ndarray):
        return Jet3(np.full_like(np.asarray(like.v, float), c))
    return Jet3(c)


def _compose(u: Jet3, f0, f1, f2, f3) -> Jet3:
    """Order-3 Faa di Bruno: jet of phi(u) from phi's derivatives at u.v."""
    g1, g2 = u.g1, u.g2
    h11, h12, h22 = u.h11, u.h12, u.h22
    v = f0
    c1 = f1 * g1
    c2 = f1 * g2
    ch11 = f2 * g1 * g1 + f1 * h11
    ch12 = f2 * g1 * g2 + f1 * h12
    ch22 = f2 * g2 * g2 + f1 * h22
    ct111 = f3 * g1 * g1 * g1 + 3.0 * f2 * h11 * g1 + f1 * u.t111
    ct112 = (f3 * g1 * g1 * g2 + f2 * (h11 * g2 + 2.0 * h12 * g1) + f1 * u.t112)
    ct122 = (f3 * g1 * g2 * g2 + f2 * (h22 * g1 + 2.0 * h12 * g2) + f1 * u.t122)
    ct222 = f3 * g2 * g2 * g2 + 3.0 * f2 * h22 * g2 + f1 * u.t222
    return Jet3(v, c1, c2, ch11, ch12, ch22, ct111, ct112, ct122, ct222,
                order=u.order)


def _reciprocal(u: Jet3) -> Jet3:
    if _any(u.v == 0.0):
        raise JetDomainError("division by a jet with zero value")
    r = 1.0 / u.v
    r2 = r * r
    return _compose(u, r, -r2, 2.0 * r2 * r, -6.0 * r2 * r2)


def sin(u: Jet3) -> Jet3:
    s, c = np.sin(u.v), np.cos(u.v)
    return _compose(u, s, c, -s, -c)


def cos(u: Jet3) -> Jet3:
    s, c = np.sin(u.v), np.cos(u.v)
    return _compose(u, c, -s, -c, s)


def exp(u: Jet3) -> Jet3:
    e = np.exp(u.v)
    return _compose(u, e, e, e, e)


def sqrt(u: Jet3) -> Jet3:
    if _any(u.v <= 0.0):
        raise JetDomainError("sqrt of a jet with nonpositive value")
    r = np.sqrt(u.v)
    i = 0.5 / r
    return _compose(u, r, i, -0.5 * i / u.v, 0.75 * i / (u.v * u.v))


def log(u: Jet3) -> Jet3:
    if _any(u.v <= 0.0):
        raise JetDomainError("log of a jet with nonpositive value")
    i = 1.0 / u.v
    return _compose(u, np.log(u.v), i, -i * i, 2.0 * i * i * i)


def pow_int(u: Jet3, n: int) -> Jet3:
    """Integer power by repeated multiplication (exact at zero base for n >= 0)."""
    if not isinstance(n, (int, np.integer)):
        raise TypeError(f"exponent must be an integer, got {type(n).__name__}")
    n = int(n)
    if n == 0:
        return constant(1.0, like=u)
    if n < 0:
        return _reciprocal(pow_int(u, -n))
    out = u
    for _ in range(n - 1):
        out = out * u
    return out


def where(mask, a: Jet3, b: Jet3) -> Jet3:
    """Slotwise ``np.where`` for batch jets (selects a where mask is true)."""
    return Jet3(*(np.where(mask, x, y) for x, y in (
        (a.v, b.v), (a.g1, b.g1), (a.g2, b.g2),
        (a.h11, b.h11), (a.h12, b.h12), (a.h22, b.h22),
        (a.t111, b.t111), (a.t112, b.t112), (a.t122, b.t122), (a.t222, b.t222))),
        order=min(a.order, b.order))
