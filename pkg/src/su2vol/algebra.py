"""Arithmetic in su(2) + R^3 and the group SU(2) x R^3.

Reference basis: the Pauli-derived triple u1, u2, u3 with [u1, u2] = u3
cyclically, followed by the Euclidean e1, e2, e3 spanning the translation
part.  Coefficient vectors are length 6, ordered (x1, x2, x3, y1, y2, y3).
In these coordinates the su(2) bracket is the cross product and the
bi-invariant reference inner product g0 = -2 tr(u u') + dot is the plain
dot product, so the reference basis is g0-orthonormal.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

U1 = 0.5 * np.array([[0.0, -1.0j], [-1.0j, 0.0]])
U2 = 0.5 * np.array([[0.0, -1.0], [1.0, 0.0]], dtype=complex)
U3 = 0.5 * np.array([[-1.0j, 0.0], [0.0, 1.0j]])
SU2_BASIS = (U1, U2, U3)

# exp(x u_i) is 4pi-periodic; SU(2) with g0 is the 3-sphere of radius 2
CIRCLE = 4.0 * np.pi
VOL0_SU2 = 16.0 * np.pi**2

_RENORM_EVERY = 64
_UNITARY_TOL = 1e-9


class AmbiguousLog(Exception):
    """Raised only on request; the default log flags -I instead."""


def _as_coeffs(c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.shape != (6,):
        raise ValueError(f"expected 6 coefficients, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("non-finite coefficients")
    return c


@dataclass(frozen=True)
class AlgebraElement:
    """Vector in su(2) + R^3 as 6 reference-basis coefficients."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_coeffs(self.coeffs))

    @staticmethod
    def zero() -> "AlgebraElement":
        return AlgebraElement(np.zeros(6))

    @staticmethod
    def from_parts(su2_part, vec_part) -> "AlgebraElement":
        return AlgebraElement(np.concatenate([np.asarray(su2_part, float),
                                              np.asarray(vec_part, float)]))

    @property
    def su2_coeffs(self) -> np.ndarray:
        return self.coeffs[:3]

    @property
    def vec(self) -> np.ndarray:
        return self.coeffs[3:]

    def su2_matrix(self) -> np.ndarray:
        x = self.coeffs
        return x[0] * U1 + x[1] * U2 + x[2] * U3

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        return AlgebraElement(self.coeffs + other.coeffs)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return AlgebraElement(self.coeffs - other.coeffs)

    def __rmul__(self, c: float) -> "AlgebraElement":
        return AlgebraElement(float(c) * self.coeffs)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(-self.coeffs)


@dataclass(frozen=True, eq=False)
class GroupElement:
    """Point of SU(2) x R^3: unit-determinant unitary plus a translation.

    prods counts group multiplications since the last unitarity refresh;
    mul() renormalizes every _RENORM_EVERY products to stop drift.
    """

    su2: np.ndarray
    vec: np.ndarray
    prods: int = field(default=0, compare=False)

    def __post_init__(self):
        m = np.asarray(self.su2, dtype=complex)
        v = np.asarray(self.vec, dtype=float)
        if m.shape != (2, 2) or v.shape != (3,):
            raise ValueError("GroupElement needs a 2x2 matrix and a 3-vector")
        object.__setattr__(self, "su2", m)
        object.__setattr__(self, "vec", v)

    def inverse(self) -> "GroupElement":
        return GroupElement(self.su2.conj().T, -self.vec, self.prods)


IDENTITY = GroupElement(np.eye(2, dtype=complex), np.zeros(3))


def su2_to_quat(m: np.ndarray) -> np.ndarray:
    """Quaternion (w, x, y, z) of an SU(2) matrix; q_i = 2 u_i."""
    return np.array([
        (0.5 * (m[0, 0] + m[1, 1])).real,
        (0.5j * (m[0, 1] + m[1, 0])).real,
        (0.5 * (m[1, 0] - m[0, 1])).real,
        (0.5j * (m[0, 0] - m[1, 1])).real,
    ])


def quat_to_su2(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array([[w - 1j * z, -y - 1j * x],
                     [y - 1j * x, w + 1j * z]])


def renormalize(g: GroupElement) -> GroupElement:
    """Nearest SU(2) via quaternion normalization; resets the product count."""
    q = su2_to_quat(g.su2)
    n = np.linalg.norm(q)
    if n < 0.5:
        raise ValueError("matrix too far from SU(2) to renormalize")
    return GroupElement(quat_to_su2(q / n), g.vec, 0)


def mul(a: GroupElement, b: GroupElement) -> GroupElement:
    out = GroupElement(a.su2 @ b.su2, a.vec + b.vec, max(a.prods, b.prods) + 1)
    if out.prods >= _RENORM_EVERY:
        out = renormalize(out)
    return out


def bracket(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    # Pauli-coordinate bracket is the cross product; R^3 is central.
    return AlgebraElement.from_parts(np.cross(a.su2_coeffs, b.su2_coeffs),
                                     np.zeros(3))


def exp_su2(x: np.ndarray) -> np.ndarray:
    """Rodrigues exponential of x1 u1 + x2 u2 + x3 u3.

    exp(A) = cos(rho) I + (sin(rho)/rho) A with rho = |x|/2.
    """
    x = np.asarray(x, dtype=float)
    rho = 0.5 * np.linalg.norm(x)
    a = x[0] * U1 + x[1] * U2 + x[2] * U3
    if rho < 1e-12:
        # sin(rho)/rho -> 1
        return np.cos(rho) * np.eye(2) + a
    return np.cos(rho) * np.eye(2) + (np.sin(rho) / rho) * a


def exp_group(a: AlgebraElement) -> GroupElement:
    return GroupElement(exp_su2(a.su2_coeffs), a.vec.copy())


def _check_near_su2(m: np.ndarray) -> None:
    err = max(np.max(np.abs(m.conj().T @ m - np.eye(2))),
              abs(np.linalg.det(m) - 1.0))
    if err > _UNITARY_TOL:
        raise ValueError(f"matrix is {err:.2e} from the SU(2) manifold")


def log_su2(g: GroupElement, with_flag: bool = False):
    """Inverse of exp_group with su(2)-part g0-norm <= 2 pi.

    At su2 = -I the direction is undefined; the canonical choice 2 pi u3
    is returned, flagged when with_flag is set.
    """
    _check_near_su2(g.su2)
    q = su2_to_quat(g.su2)
    q = q / np.linalg.norm(q)
    w, v = q[0], q[1:]
    s = np.linalg.norm(v)
    # atan2 keeps full precision near both poles, unlike arccos(w)
    rho = np.arctan2(s, w)
    ambiguous = False
    if s < 1e-12:
        if w > 0.0:
            x = 2.0 * v  # essentially zero
        else:
            x = np.array([0.0, 0.0, 2.0 * np.pi])
            ambiguous = True
    else:
        x = (2.0 * rho / s) * v
    out = AlgebraElement.from_parts(x, g.vec.copy())
    if with_flag:
        return out, ambiguous
    return out


def g0_inner(a: AlgebraElement, b: AlgebraElement) -> float:
    # -2 tr(u u') + Euclidean dot reduces to the coefficient dot product.
    return float(a.coeffs @ b.coeffs)


def g0_norm(a: AlgebraElement) -> float:
    return float(np.linalg.norm(a.coeffs))


def g0_distance_between(a: GroupElement, b: GroupElement) -> float:
    """Bi-invariant distance between two group elements."""
    return reference_distance(mul(a.inverse(), b))


def reference_distance(g: GroupElement) -> float:
    """Geodesic distance from the identity for the bi-invariant product g0.

    theta in [0, 2 pi] is the rotation part's g0-norm; the factors combine
    as a metric product.
    """
    w = su2_to_quat(g.su2)[0]
    n = np.linalg.norm(su2_to_quat(g.su2))
    theta = 2.0 * np.arccos(np.clip(w / n, -1.0, 1.0))
    return float(np.hypot(theta, np.linalg.norm(g.vec)))
