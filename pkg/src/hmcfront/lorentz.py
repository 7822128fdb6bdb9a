"""Minkowski 4-space, its Hermitian-matrix model, and the Poincare ball.

A vector ``x = (x0, x1, x2, x3)`` with signature (-,+,+,+) corresponds to

    X = [[x0 + x3,      x1 + i x2],
         [x1 - i x2,    x0 - x3  ]]

so that <x, x> = -det X.  Hyperbolic space is det X = 1, tr X > 0.

All types accept numpy arrays in their fields and then act elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-9


class NotInHyperbolicSpace(ValueError):
    pass


@dataclass(frozen=True)
class Vec4:
    x0: float
    x1: float
    x2: float
    x3: float

    def as_array(self) -> np.ndarray:
        return np.stack(np.broadcast_arrays(self.x0, self.x1, self.x2, self.x3), axis=-1)


@dataclass(frozen=True)
class Herm2:
    """Hermitian matrix [[a, b], [conj(b), d]] with real a, d."""

    a: float
    b: complex
    d: float

    def det(self):
        return self.a * self.d - np.abs(self.b) ** 2

    def trace(self):
        return self.a + self.d

    def matrix(self) -> np.ndarray:
        a, b, d = np.broadcast_arrays(self.a, self.b, self.d)
        out = np.empty(a.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = a
        out[..., 0, 1] = b
        out[..., 1, 0] = np.conj(b)
        out[..., 1, 1] = d
        return out

    def __add__(self, other: "Herm2") -> "Herm2":
        return Herm2(self.a + other.a, self.b + other.b, self.d + other.d)

    def __sub__(self, other: "Herm2") -> "Herm2":
        return Herm2(self.a - other.a, self.b - other.b, self.d - other.d)

    def scale(self, s) -> "Herm2":
        return Herm2(s * self.a, s * self.b, s * self.d)

    def take(self, index) -> "Herm2":
        return Herm2(
            np.asarray(self.a)[index], np.asarray(self.b)[index], np.asarray(self.d)[index]
        )


@dataclass(frozen=True)
class Mat2C:
    """General complex 2x2 matrix [[p, q], [r, s]]."""

    p: complex
    q: complex
    r: complex
    s: complex

    @classmethod
    def identity(cls) -> "Mat2C":
        return cls(1 + 0j, 0j, 0j, 1 + 0j)

    def det(self):
        return self.p * self.s - self.q * self.r

    def inverse(self) -> "Mat2C":
        det = self.det()
        return Mat2C(self.s / det, -self.q / det, -self.r / det, self.p / det)

    def __matmul__(self, o: "Mat2C") -> "Mat2C":
        return Mat2C(
            self.p * o.p + self.q * o.r,
            self.p * o.q + self.q * o.s,
            self.r * o.p + self.s * o.r,
            self.r * o.q + self.s * o.s,
        )

    def __neg__(self) -> "Mat2C":
        return Mat2C(-self.p, -self.q, -self.r, -self.s)

    def __sub__(self, o: "Mat2C") -> "Mat2C":
        return Mat2C(self.p - o.p, self.q - o.q, self.r - o.r, self.s - o.s)

    def scale(self, c) -> "Mat2C":
        return Mat2C(c * self.p, c * self.q, c * self.r, c * self.s)

    def frobenius(self):
        return np.sqrt(abs(self.p) ** 2 + abs(self.q) ** 2 + abs(self.r) ** 2 + abs(self.s) ** 2)

    def is_sl2(self, tol: float = DEFAULT_TOL):
        return np.abs(self.det() - 1) < tol

    def matrix(self) -> np.ndarray:
        p, q, r, s = np.broadcast_arrays(self.p, self.q, self.r, self.s)
        return np.stack([np.stack([p, q], -1), np.stack([r, s], -1)], -2).astype(complex)


def herm_from_vec4(x: Vec4) -> Herm2:
    return Herm2(x.x0 + x.x3, x.x1 + 1j * x.x2, x.x0 - x.x3)


def vec4_from_herm(X: Herm2) -> Vec4:
    b = X.b
    return Vec4((X.a + X.d) / 2, np.real(b), np.imag(b), (X.a - X.d) / 2)


def lorentz_inner(x: Vec4, y: Vec4):
    return -x.x0 * y.x0 + x.x1 * y.x1 + x.x2 * y.x2 + x.x3 * y.x3


def herm_inner(X: Herm2, Y: Herm2):
    """Lorentz inner product in the matrix picture, by polarizing -det."""
    return -0.5 * ((X + Y).det() - X.det() - Y.det())


def is_in_H3(X: Herm2, tol: float = DEFAULT_TOL):
    return (np.abs(X.det() - 1) <= tol) & (X.trace() > 0)


def congruence(a: Mat2C, X: Herm2) -> Herm2:
    """The isometric action X -> a X a*."""
    # M = a X
    m11 = a.p * X.a + a.q * np.conj(X.b)
    m12 = a.p * X.b + a.q * X.d
    m21 = a.r * X.a + a.s * np.conj(X.b)
    m22 = a.r * X.b + a.s * X.d
    # M a*
    out_a = m11 * np.conj(a.p) + m12 * np.conj(a.q)
    out_b = m11 * np.conj(a.r) + m12 * np.conj(a.s)
    out_d = m21 * np.conj(a.r) + m22 * np.conj(a.s)
    return Herm2(np.real(out_a), out_b, np.real(out_d))


def ball_coordinates(X: Herm2) -> np.ndarray:
    """Poincare-ball image, without the membership check; shape (..., 3)."""
    x = vec4_from_herm(X)
    denom = 1 + x.x0
    b = np.broadcast_arrays(x.x1 / denom, x.x2 / denom, x.x3 / denom)
    return np.stack(b, axis=-1).astype(np.float64)


def ball_model(X: Herm2, tol: float = DEFAULT_TOL) -> np.ndarray:
    if not np.all(is_in_H3(X, tol)):
        raise NotInHyperbolicSpace("point is not on the hyperboloid (det X != 1 or tr X <= 0)")
    return ball_coordinates(X)
