"""Hypoellipticity conditions for sublaplacians and form Laplacians.

The sublaplacian criterion is ``Sp mu(a)`` avoiding a singular set built
from the absolute eigenvalues of the Levi matrix; the conditions Y(q), X(k)
and Y(p,q) are integer-window exclusions in the form degree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidArgument

DEFAULT_TOL = 1e-9
LATTICE = "Lattice"
RAYS = "Rays"


@dataclass(frozen=True)
class LeviData:
    d: int
    abs_eigs: tuple
    rank: int = field(init=False)

    def __post_init__(self):
        eigs = tuple(sorted((abs(float(v)) for v in self.abs_eigs), reverse=True))
        if len(eigs) != self.d:
            raise InvalidArgument(f"expected {self.d} eigenvalues, got {len(eigs)}")
        rank = sum(1 for v in eigs if v > 0.0)
        if rank % 2:
            raise InvalidArgument(f"Levi rank must be even, got {rank}")
        object.__setattr__(self, "abs_eigs", eigs)
        object.__setattr__(self, "rank", rank)

    @classmethod
    def from_matrix(cls, L, atol: float = 1e-12) -> "LeviData":
        """Build from an antisymmetric structure matrix L."""
        L = np.asarray(L, dtype=float)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise InvalidArgument("Levi matrix must be square")
        if not np.allclose(L, -L.T, atol=atol):
            raise InvalidArgument("Levi matrix must be antisymmetric")
        eigs = np.abs(np.linalg.eigvals(L))
        eigs[eigs <= atol * max(1.0, eigs.max(initial=0.0))] = 0.0
        return cls(L.shape[0], tuple(eigs))

    @property
    def trace_abs(self) -> float:
        return math.fsum(self.abs_eigs)


@dataclass(frozen=True)
class SublaplacianModel:
    levi: LeviData
    mu_spectrum: tuple
    tolerance: float = DEFAULT_TOL

    def __post_init__(self):
        if not self.tolerance > 0:
            raise InvalidArgument("tolerance must be positive")
        object.__setattr__(self, "mu_spectrum", tuple(complex(z) for z in self.mu_spectrum))


@dataclass(frozen=True)
class SingularSet:
    kind: str
    threshold: float
    generators: tuple = ()


@dataclass(frozen=True)
class Verdict:
    condition: str
    passed: bool
    witness: object = None

    def to_dict(self) -> dict:
        return {"condition": self.condition, "pass": self.passed, "witness": self.witness}


def singular_set(levi: LeviData) -> SingularSet:
    thr = 0.5 * levi.trace_abs
    if levi.rank == levi.d:
        return SingularSet(LATTICE, thr, tuple(v for v in levi.abs_eigs if v > 0))
    return SingularSet(RAYS, thr)


def _lattice_sums(gens: Sequence[float], bound: float, merge: float) -> np.ndarray:
    """Sorted distinct values of sum alpha_j g_j <= bound, alpha in N^d."""
    sums = np.array([0.0])
    for g in gens:
        reps = int(math.floor(bound / g)) + 1
        cand = (sums[:, None] + g * np.arange(reps)[None, :]).ravel()
        cand = np.sort(cand[cand <= bound + merge])
        keep = np.concatenate(([True], np.diff(cand) > merge))
        sums = cand[keep]
    return sums


def _nearest_singular(s: SingularSet, x: float, tol: float):
    """Distance from real x to the singular set and the nearest singular point."""
    if s.kind == RAYS:
        if abs(x) >= s.threshold:
            return 0.0, x
        return s.threshold - abs(x), math.copysign(s.threshold, x if x else 1.0)
    y = abs(x) - s.threshold
    if y <= 0:
        return -y, math.copysign(s.threshold, x if x else 1.0)
    if not s.generators:
        return y, math.copysign(s.threshold, x)
    # enumerate all but the smallest generator, whose multiples are placed analytically
    *big, g = s.generators
    base = _lattice_sums(big, y + 1.0, 0.1 * tol)
    near = base + g * np.maximum(np.round((y - base) / g), 0.0)
    i = int(np.argmin(np.abs(near - y)))
    return float(abs(near[i] - y)), math.copysign(s.threshold + float(near[i]), x)


def _spectrum_verdict(name, model: SublaplacianModel, s: SingularSet) -> Verdict:
    tol = model.tolerance
    for z in model.mu_spectrum:
        if abs(z.imag) > tol:
            continue
        dist, point = _nearest_singular(s, z.real, tol)
        if dist <= tol:
            return Verdict(name, False, {"mu": [z.real, z.imag], "singular_point": point})
    return Verdict(name, True)


def rockland_verdict(model: SublaplacianModel) -> Verdict:
    return _spectrum_verdict("rockland", model, singular_set(model.levi))


def weaker_verdict(model: SublaplacianModel) -> Verdict:
    return _spectrum_verdict("weaker", model, SingularSet(RAYS, 0.5 * model.levi.trace_abs))


def rockland_sublaplacian(model: SublaplacianModel) -> bool:
    """True iff every eigenvalue of mu avoids the singular set by more than the tolerance."""
    return rockland_verdict(model).passed


def weaker_condition(model: SublaplacianModel) -> bool:
    """True iff Sp mu avoids both rays |x| >= Trace|L|/2; implies :func:`rockland_sublaplacian`."""
    return weaker_verdict(model).passed


def _check_range(name, value, lo, hi):
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
        raise InvalidArgument(f"{name} must be an integer")
    if not lo <= value <= hi:
        raise InvalidArgument(f"{name}={value} outside [{lo}, {hi}]")


def y_condition(n: int, kappa: int, r: int, q: int) -> bool:
    _check_range("n", n, 0, math.inf)
    _check_range("r", r, 0, n)
    _check_range("kappa", kappa, 0, r)
    _check_range("q", q, 0, n)
    return not (kappa <= q <= kappa + n - r or r - kappa <= q <= n - kappa)


def x_condition(d: int, rank: int, k: int) -> bool:
    _check_range("d", d, 0, math.inf)
    _check_range("rank", rank, 0, d)
    if rank % 2:
        raise InvalidArgument("rank must be even")
    _check_range("k", k, 0, d)
    r = rank // 2
    return not (r <= k <= d - r)


def ypq_condition(n: int, kappa: int, r: int, p: int, q: int) -> bool:
    _check_range("n", n, 0, math.inf)
    _check_range("r", r, 0, n)
    _check_range("kappa", kappa, 0, r)
    _check_range("p", p, 0, n)
    _check_range("q", q, 0, n)
    w = n - r
    first = kappa <= p <= kappa + w and r - kappa <= q <= r - kappa + w
    second = r - kappa <= p <= r - kappa + w and kappa <= q <= kappa + w
    return not (first or second)
