"""Two-step nilpotent tangent groups and Heisenberg coordinate machinery.

Points are pairs ``(x0, xp)`` where ``x0`` is the degree-2 coordinate and
``xp`` the vector of degree-1 coordinates.  A :class:`GroupSpec` carries the
bilinear matrix ``b`` of the group law

    (x.y)_0 = x0 + y0 + sum_{j,k} b[j, k] x_k y_j,     (x.y)' = x' + y',

whose left-invariant fields are ``X_0 = d/dx0`` and
``X_j = d/dx_j + sum_k b[j, k] x_k d/dx0``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, SingularFrame

RCOND_MIN = 1e-12


@dataclass(frozen=True, eq=False)
class Point:
    x0: float
    xp: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x0", float(self.x0))
        xp = np.array(self.xp, dtype=float).reshape(-1)
        xp.setflags(write=False)
        object.__setattr__(self, "xp", xp)

    @property
    def d(self) -> int:
        return self.xp.size

    def __eq__(self, other):
        if not isinstance(other, Point):
            return NotImplemented
        return self.x0 == other.x0 and np.array_equal(self.xp, other.xp)

    def __hash__(self):
        return hash((self.x0, self.xp.tobytes()))

    @property
    def xprime(self) -> np.ndarray:
        return self.xp

    def as_array(self) -> np.ndarray:
        return np.concatenate(([self.x0], self.xp))

    @classmethod
    def from_array(cls, v) -> "Point":
        v = np.asarray(v, dtype=float)
        return cls(v[0], v[1:])

    def to_dict(self) -> dict:
        return {"x0": self.x0, "xp": [float(v) for v in self.xp]}

    @classmethod
    def from_dict(cls, obj) -> "Point":
        return cls(obj["x0"], obj["xp"])


@dataclass(frozen=True)
class GroupSpec:
    d: int
    b: np.ndarray

    def __post_init__(self):
        b = np.array(self.b, dtype=float)
        if self.d < 1 or b.shape != (self.d, self.d):
            raise DimensionMismatch(f"b must be {self.d}x{self.d}, got {b.shape}")
        b.setflags(write=False)
        object.__setattr__(self, "b", b)

    @classmethod
    def heisenberg(cls, n: int) -> "GroupSpec":
        """The group H^{2n+1} with (x.y)_0 = x0 + y0 + sum_j (x_{n+j} y_j - x_j y_{n+j})."""
        b = np.zeros((2 * n, 2 * n))
        b[:n, n:] = np.eye(n)
        b[n:, :n] = -np.eye(n)
        return cls(2 * n, b)

    def structure_matrix(self) -> np.ndarray:
        return structure_constants(self.b)

    def identity(self) -> Point:
        return Point(0.0, np.zeros(self.d))

    def inverse(self, x: Point) -> Point:
        self._check(x)
        return Point(-x.x0 + x.xp @ self.b @ x.xp, -x.xp)

    def field(self, j: int) -> "FirstOrderField":
        return FirstOrderField(self, j)

    def to_json(self) -> str:
        return json.dumps({"d": self.d, "b": self.b.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "GroupSpec":
        obj = json.loads(text)
        return cls(int(obj["d"]), obj["b"])

    def _check(self, *points: Point) -> None:
        for p in points:
            if p.d != self.d:
                raise DimensionMismatch(f"point has {p.d} degree-1 coordinates, group has d={self.d}")


def group_mul(g: GroupSpec, x: Point, y: Point) -> Point:
    g._check(x, y)
    return Point(x.x0 + y.x0 + y.xp @ g.b @ x.xp, x.xp + y.xp)


def dilate(lam: float, x: Point) -> Point:
    return Point(lam * lam * x.x0, lam * x.xp)


def pseudo_norm(x: Point) -> float:
    """(x0^2 + |x'|^4)^(1/4), homogeneous of degree 1 under the dilations."""
    r2 = float(x.xp @ x.xp)
    return (x.x0 * x.x0 + r2 * r2) ** 0.25


@dataclass(frozen=True)
class FirstOrderField:
    """Model vector field X_j (j >= 1) or X_0 of a :class:`GroupSpec`.

    ``coefficients(x)`` returns the components along (d/dx0, d/dx1, ...).
    """

    group: GroupSpec
    j: int

    def __post_init__(self):
        if not 0 <= self.j <= self.group.d:
            raise DimensionMismatch(f"field index {self.j} outside 0..{self.group.d}")

    @property
    def degree(self) -> int:
        return -2 if self.j == 0 else -1

    def coefficients(self, x) -> np.ndarray:
        v = np.asarray(x, dtype=float)
        c = np.zeros(self.group.d + 1)
        if self.j == 0:
            c[0] = 1.0
        else:
            c[0] = self.group.b[self.j - 1] @ v[1:]
            c[self.j] = 1.0
        return c

    def apply(self, f: Callable, x, h: float = 1e-5) -> float:
        """Directional derivative of ``f`` at ``x`` (central difference)."""
        v = np.asarray(x, dtype=float)
        c = self.coefficients(v)
        return (f(v + h * c) - f(v - h * c)) / (2.0 * h)


def structure_constants(b) -> np.ndarray:
    """L with [X_j, X_k] = L[j, k] X_0, namely L = b^T - b."""
    b = np.asarray(b, dtype=float)
    return b.T - b


@dataclass(frozen=True)
class AffineChange:
    """psi_u(x) = A (x - u)."""

    A: np.ndarray
    center: Point

    def __call__(self, x: Point) -> Point:
        return Point.from_array(self.A @ (x.as_array() - self.center.as_array()))

    def inverse(self, y: Point) -> Point:
        return Point.from_array(np.linalg.solve(self.A, y.as_array()) + self.center.as_array())


def privileged_change(B, u: Point) -> AffineChange:
    """Privileged coordinates at ``u`` for an H-frame.

    ``B[j, k]`` is the d/dx_k component of X_j at ``u`` (row j is the field
    X_j, j = 0..d).  The returned map sends ``u`` to 0 and each X_j(u) to the
    j-th coordinate vector, with A = (B^T)^{-1}.
    """
    B = np.asarray(B, dtype=float)
    m = u.d + 1
    if B.shape != (m, m):
        raise DimensionMismatch(f"frame matrix must be {m}x{m}, got {B.shape}")
    if not np.all(np.isfinite(B)):
        raise SingularFrame("frame matrix has non-finite entries")
    rcond = 1.0 / np.linalg.cond(B)
    if not rcond >= RCOND_MIN:
        raise SingularFrame(f"frame reciprocal condition number {rcond:.3g} below {RCOND_MIN:g}",
                            rcond=float(rcond))
    return AffineChange(np.linalg.inv(B.T), u)


def heisenberg_correction(b) -> Callable[[Point], Point]:
    """The quadratic map phi(x) = (x0 - 1/4 sum (b_jk + b_kj) x_j x_k, x').

    The inverse is available as ``phi.inverse`` and equals y -> -phi(-y).
    """
    s = np.asarray(b, dtype=float)
    s = s + s.T

    def phi(x: Point) -> Point:
        return Point(x.x0 - 0.25 * (x.xp @ s @ x.xp), x.xp)

    def inverse(y: Point) -> Point:
        return Point(y.x0 + 0.25 * (y.xp @ s @ y.xp), y.xp)

    phi.inverse = inverse
    return phi


def jacobian_det(fn: Callable[[Point], Point], x: Point, h: float = 1e-6) -> float:
    """Central-difference Jacobian determinant of a map on R^{d+1}."""
    v = x.as_array()
    m = v.size
    J = np.empty((m, m))
    for k in range(m):
        e = np.zeros(m)
        e[k] = h
        J[:, k] = (fn(Point.from_array(v + e)).as_array() - fn(Point.from_array(v - e)).as_array()) / (2 * h)
    return float(np.linalg.det(J))
