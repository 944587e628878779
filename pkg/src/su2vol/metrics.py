"""Left-invariant metrics on SU(2) x R^n and their decoupled normal form.

A metric is a symmetric positive definite Gram matrix in the reference
basis (three Pauli directions, then the Euclidean center).  Every such
metric reduces, after lifting the center, to a decoupled one determined
up to isometry by parameters (a1 <= a2 <= a3, d >= 0): an orthogonal
basis v_i = u_i + d f_i with u_i a Milnor triple, f_i orthonormal central
vectors, and a_i the length of v_i.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement

_SYM_TOL = 1e-12


class NotSPD(Exception):
    pass


class InvalidParameters(Exception):
    pass


def _check_spd(gram: np.ndarray, tol: float = _SYM_TOL) -> np.ndarray:
    g = np.asarray(gram, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise NotSPD(f"not square: shape {g.shape}")
    if np.max(np.abs(g - g.T)) > tol * max(1.0, np.max(np.abs(g))):
        raise NotSPD("not symmetric")
    w = np.linalg.eigvalsh(0.5 * (g + g.T))
    if w[0] <= 0.0:
        raise NotSPD(f"smallest eigenvalue {w[0]:.3e} <= 0")
    return 0.5 * (g + g.T)


@dataclass(frozen=True)
class MetricTensor:
    """SPD Gram matrix in the reference basis of su(2) + R^n."""

    gram: np.ndarray

    def __post_init__(self):
        g = _check_spd(self.gram)
        if g.shape[0] < 3:
            raise NotSPD("need at least the su(2) block")
        object.__setattr__(self, "gram", g)

    @property
    def center_dim(self) -> int:
        return self.gram.shape[0] - 3

    def inner(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(np.asarray(a) @ self.gram @ np.asarray(b))


@dataclass(frozen=True)
class DecoupledMetric:
    """Decoupled metric on su(2) + R^3 with its adapted basis.

    Columns of V are the v_i = u_i + d f_i, columns of F the central
    orthonormal f_i, both as reference-basis coefficient vectors; gram is
    the 6x6 Gram for which {v_i / a_i, f_i} is orthonormal.
    """

    gram: np.ndarray
    V: np.ndarray
    F: np.ndarray
    a: np.ndarray
    d: float

    def __post_init__(self):
        object.__setattr__(self, "gram", _check_spd(self.gram))
        object.__setattr__(self, "V", np.asarray(self.V, dtype=float))
        object.__setattr__(self, "F", np.asarray(self.F, dtype=float))
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))
        object.__setattr__(self, "d", float(self.d))

    @property
    def params(self) -> tuple[float, float, float, float]:
        return (float(self.a[0]), float(self.a[1]), float(self.a[2]), self.d)

    def u_columns(self) -> np.ndarray:
        return self.V - self.d * self.F

    def v_elements(self) -> list[AlgebraElement]:
        return [AlgebraElement(self.V[:, i]) for i in range(3)]

    def f_elements(self) -> list[AlgebraElement]:
        return [AlgebraElement(self.F[:, i]) for i in range(3)]

    def frame_norm(self, alpha: np.ndarray, beta: np.ndarray) -> float:
        """g-norm of sum(alpha_i v_i + beta_i f_i)."""
        return float(np.sqrt(np.sum((self.a * np.asarray(alpha)) ** 2)
                             + np.sum(np.asarray(beta) ** 2)))

    def invariant_residuals(self) -> dict:
        """Max violations of the decoupled-basis contract, for diagnostics."""
        g, V, F = self.gram, self.V, self.F
        U = self.u_columns()
        res = {}
        gv = V.T @ g @ V
        res["v_orthogonality"] = np.max(np.abs(gv - np.diag(self.a**2)))
        res["f_orthonormal"] = np.max(np.abs(F.T @ g @ F - np.eye(3)))
        res["vf_cross"] = np.max(np.abs(V.T @ g @ F))
        res["f_central"] = np.max(np.abs(F[:3, :]))
        br = 0.0
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            lhs = np.cross(U[:3, i], U[:3, j])
            br = max(br, np.max(np.abs(lhs - U[:3, k])))
        res["milnor_bracket"] = br
        gu = U.T @ g @ U
        res["u_diagonal"] = np.max(np.abs(gu - np.diag(self.a**2 + self.d**2)))
        return res


def extract_milnor_su2(g3: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Standard Milnor basis orthogonal for a metric on su(2).

    g3 is the 3x3 SPD Gram in Pauli coordinates.  Returns (U, a): columns
    of U are a g0-orthonormal eigenbasis of the comparison operator (equal
    to g3 in these coordinates), orientation-fixed to det +1 so the cross
    product closes cyclically, and a = sqrt(eigenvalues) ascending.
    """
    g3 = _check_spd(g3)
    if g3.shape != (3, 3):
        raise NotSPD("expected a 3x3 block")
    lam, vecs = np.linalg.eigh(g3)
    if np.linalg.det(vecs) < 0.0:
        vecs = vecs.copy()
        vecs[:, 2] = -vecs[:, 2]
    return vecs, np.sqrt(lam)


def skewed_basis(g: MetricTensor) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """g-orthogonal basis v_i = u_i + h_i of the center's g-complement.

    Returns (V, R, a): V has the v_i as (3+n)-coefficient columns, R the
    Pauli coordinates of the quotient Milnor triple, a the ascending
    lengths sqrt(<v_i, v_i>_g).
    """
    G = g.gram
    n = g.center_dim
    if n == 0:
        R, a = extract_milnor_su2(G)
        return R.copy(), R, a
    Z = np.zeros((3 + n, n))
    Z[3:, :] = np.eye(n)
    Gzz = Z.T @ G @ Z
    # g-orthogonal lift of the su(2) coordinate directions past the center
    lift = np.zeros((3 + n, 3))
    lift[:3, :] = np.eye(3)
    lift[3:, :] = -np.linalg.solve(Gzz, (Z.T @ G)[:, :3])
    # pulled-back metric on the quotient, in Pauli coordinates
    g_quot = lift.T @ G @ lift
    R, a = extract_milnor_su2(g_quot)
    return lift @ R, R, a


def lift_vectors(h: np.ndarray) -> tuple[np.ndarray, float]:
    """Orthonormal f_i in R^(n+3) projecting onto given h_i in R^n.

    h has the h_i as columns (n x 3).  d is the square root of the largest
    eigenvalue of their Gram matrix; the appended 3-blocks come from a
    symmetric factorization of d^2 I - Gram, eigenvalues clamped at zero
    against numerical drift.  pi(d f_i) = h_i where pi drops the last 3
    coordinates.
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[1] != 3:
        raise ValueError("h must be n x 3")
    n = h.shape[0]
    gram = h.T @ h
    lam, vecs = np.linalg.eigh(gram)
    d2 = lam[-1]
    f = np.zeros((n + 3, 3))
    if d2 < 1e-14:
        f[n:, :] = np.eye(3)
        return f, 0.0
    d = float(np.sqrt(d2))
    w = vecs @ np.diag(np.sqrt(np.clip(d2 - lam, 0.0, None))) @ vecs.T
    f[:n, :] = h / d
    f[n:, :] = w / d
    return f, d


def from_parameters(a1: float, a2: float, a3: float, d: float,
                    rotation: np.ndarray | None = None) -> DecoupledMetric:
    """Decoupled metric on su(2) + R^3 with the given canonical parameters.

    rotation, if given, is a det +1 orthogonal 3x3 matrix whose columns
    replace the Pauli triple as the u_i.
    """
    a = np.array([a1, a2, a3], dtype=float)
    d = float(d)
    if not (0.0 < a[0] <= a[1] <= a[2]):
        raise InvalidParameters(f"need 0 < a1 <= a2 <= a3, got {a}")
    if d < 0.0:
        raise InvalidParameters(f"need d >= 0, got {d}")
    R = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
    V = np.vstack([R, d * np.eye(3)])
    F = np.vstack([np.zeros((3, 3)), np.eye(3)])
    # gram makes the frame {v_i / a_i, f_i} orthonormal
    A2 = R @ np.diag(a**2) @ R.T
    gram = np.block([[A2 + d * d * np.eye(3), -d * R],
                     [-d * R.T, np.eye(3)]])
    return DecoupledMetric(gram=gram, V=V, F=F, a=a, d=d)


def reduce_to_decoupled(g: MetricTensor) -> DecoupledMetric:
    """Reduce a metric on su(2) + R^n to its decoupled su(2) + R^3 factor.

    Pipeline: skewed basis, center orthonormalization, Euclidean lift.
    The discarded complement of span{f_i} in the lifted center is flat, so
    only the decoupled factor is returned.
    """
    G = g.gram
    n = g.center_dim
    V, R, a = skewed_basis(g)
    if n == 0:
        h = np.zeros((0, 3))
    else:
        Gzz = G[3:, 3:]
        L = np.linalg.cholesky(Gzz)
        # central parts of the v_i in a g-orthonormal center frame
        h = L.T @ V[3:, :]
    _, d = lift_vectors(h)
    return from_parameters(a[0], a[1], a[2], d, rotation=R)


_CYCLE = np.array([1, 2, 0])


def canonicalize(m: DecoupledMetric) -> DecoupledMetric:
    """Sort a ascending and flip d >= 0 by relabeling the adapted basis.

    Uses only the allowed transformations: cyclic relabelings, the signed
    transposition, and central sign flips; the underlying metric is
    untouched.
    """
    order = np.argsort(m.a, kind="stable")
    sign = 1.0
    # parity of the sorting permutation
    perm = list(order)
    swaps = 0
    for i in range(3):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            swaps += 1
    if swaps % 2 == 1:
        sign = -1.0  # odd relabelings negate the whole triple
    V = sign * m.V[:, order]
    F = sign * m.F[:, order]
    d = m.d
    if d < 0.0:
        F = -F
        d = -d
    return DecoupledMetric(gram=m.gram, V=V, F=F, a=m.a[order], d=d)


# -- serialization ----------------------------------------------------------

def metric_to_json(g: MetricTensor) -> str:
    return json.dumps([float(x) for x in g.gram.ravel()])


def metric_from_flat(values, dim: int | None = None) -> MetricTensor:
    v = np.asarray(list(values), dtype=float)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise ValueError(f"{v.size} values do not form a square matrix")
    return MetricTensor(v.reshape(dim, dim))


def decoupled_to_json(m: DecoupledMetric) -> str:
    basis = np.hstack([m.V, m.F])
    return json.dumps({
        "a": [float(x) for x in m.a],
        "d": m.d,
        "basis": [[float(x) for x in row] for row in basis],
    })
