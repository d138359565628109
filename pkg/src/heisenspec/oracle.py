"""Desk-scale oracles: Mellin matrix powers, synthetic spectra, and a
discretized Folland-Stein sublaplacian on the integer Heisenberg nilmanifold.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.special import gamma as gamma_fn

from ._backend import kernels
from .errors import AssemblyFault, GridTooLarge, InvalidArgument, ToleranceNotMet

SYM_TOL = 1e-12
PSD_TOL = 1e-10
MAX_BLOCK = 1024  # dense sector block N^2 x N^2, i.e. N <= 32


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    multiplicities: np.ndarray

    def __post_init__(self):
        ev = np.array(self.eigenvalues, dtype=float).reshape(-1)
        mult = np.array(self.multiplicities).reshape(-1)
        if ev.size != mult.size:
            raise InvalidArgument("eigenvalues and multiplicities differ in length")
        if ev.size and np.any(np.diff(ev) < 0):
            raise InvalidArgument("eigenvalues must be nondecreasing")
        if not np.all(np.isfinite(ev)):
            raise InvalidArgument("eigenvalues must be finite")
        if mult.size and (np.any(mult < 1) or np.any(mult != np.round(mult))):
            raise InvalidArgument("multiplicities must be positive integers")
        mult = mult.astype(np.int64)
        ev.setflags(write=False)
        mult.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "multiplicities", mult)

    @classmethod
    def from_values(cls, values, rel_tol: float = 0.0) -> "Spectrum":
        """Group a list of eigenvalues, merging neighbours within rel_tol."""
        v = np.sort(np.asarray(values, dtype=float).reshape(-1))
        if v.size == 0:
            return cls(v, np.zeros(0, dtype=np.int64))
        scale = np.maximum(1.0, np.abs(v[1:]))
        new = np.concatenate(([True], np.diff(v) > rel_tol * scale))
        starts = np.flatnonzero(new)
        mult = np.diff(np.append(starts, v.size))
        return cls(v[starts], mult)

    def expanded(self) -> np.ndarray:
        return np.repeat(self.eigenvalues, self.multiplicities)

    @property
    def total(self) -> int:
        return int(self.multiplicities.sum())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eigenvalue", "multiplicity"])
        for lam, m in zip(self.eigenvalues, self.multiplicities):
            w.writerow([repr(float(lam)), int(m)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Spectrum":
        rows = list(csv.DictReader(io.StringIO(text)))
        if rows and set(rows[0]) != {"eigenvalue", "multiplicity"}:
            raise InvalidArgument("spectrum CSV needs columns eigenvalue,multiplicity")
        return cls([float(r["eigenvalue"]) for r in rows], [int(r["multiplicity"]) for r in rows])


def heat_trace(sp: Spectrum, t: float) -> float:
    """sum_k mult_k exp(-t lambda_k), compensated."""
    if not t > 0:
        raise InvalidArgument("t must be positive")
    return float(kernels.expsum(sp.eigenvalues, sp.multiplicities.astype(float), float(t)))


def counting_function(sp: Spectrum, lam: float) -> int:
    """Number of eigenvalues <= lam, with multiplicity."""
    i = int(np.searchsorted(sp.eigenvalues, lam, side="right"))
    return int(sp.multiplicities[:i].sum())


def synthetic_spectrum(exponent: float, nu0: float, count: int) -> Spectrum:
    """lambda_k = ((k+1)/nu0)^{1/exponent}, so N(lambda) ~ nu0 lambda^exponent."""
    if not exponent > 0 or not nu0 > 0:
        raise InvalidArgument("exponent and nu0 must be positive")
    if int(count) < 1:
        raise InvalidArgument("count must be >= 1")
    k = np.arange(int(count), dtype=float)
    return Spectrum(((k + 1.0) / nu0) ** (1.0 / exponent), np.ones(int(count), dtype=np.int64))


# -- Mellin powers -----------------------------------------------------------

@dataclass(frozen=True)
class MatrixOperator:
    matrix: np.ndarray
    kernel_projection: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        P = np.array(self.matrix, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
            raise InvalidArgument("operator must be a nonempty square matrix")
        if not np.all(np.isfinite(P)):
            raise InvalidArgument("operator has non-finite entries")
        scale = max(1.0, float(np.abs(P).max()))
        if np.abs(P - P.T).max() > SYM_TOL * scale:
            raise InvalidArgument("operator is not symmetric")
        P = 0.5 * (P + P.T)
        lo = float(sla.eigvalsh(P, subset_by_index=[0, 0])[0])
        if lo < -PSD_TOL * scale:
            raise InvalidArgument(f"operator is not positive semidefinite (eigenvalue {lo:.3g})")
        K = sla.null_space(P, rcond=1e-10)
        P.setflags(write=False)
        object.__setattr__(self, "matrix", P)
        object.__setattr__(self, "kernel_projection", K @ K.T)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def mellin_power(P: MatrixOperator, s: complex, step: float = 0.05, tol: float = 1e-12) -> np.ndarray:
    """P^{-s} on (ker P)^perp (zero on ker P) from the Mellin integral.

    With t = e^u the integrand e^{su} (1 - Pi0) exp(-e^u P) is summed by the
    trapezoid rule over [-U_left, U_right], both ends cut where the integrand
    is below tol.
    """
    s = complex(s)
    if not s.real > 0:
        raise InvalidArgument("Re s must be positive")
    A = P.matrix
    Q = np.eye(P.dim) - P.kernel_projection
    if np.abs(Q).max() < 0.5:
        return np.zeros_like(A) if s.imag == 0 else np.zeros(A.shape, complex)
    lam_min = 1.0 / float(np.linalg.norm(np.linalg.inv(A + P.kernel_projection), "fro"))
    sr = s.real
    # left: int_{-inf}^{-U} e^{su} du = e^{-sU}/s below tol
    u_left = max(0.0, math.log(1.0 / (sr * tol)) / sr)
    # right: e^{s u} exp(-lam_min e^u) below tol
    u_right = math.log(max(1.0, 1.0 / lam_min))
    while sr * u_right - lam_min * math.exp(u_right) > math.log(tol * step):
        u_right += 0.5
        if u_right > 60.0:
            raise ToleranceNotMet("Mellin integral right tail does not decay", lam_min=lam_min)
    nodes = np.arange(-u_left, u_right + step, step)
    t = np.exp(nodes)
    E = sla.expm(-t[:, None, None] * A[None, :, :])
    w = np.exp(s * nodes) if s.imag else np.exp(sr * nodes)
    w = w * step
    body = np.tensordot(w, E, axes=(0, 0))
    out = Q @ body @ Q / gamma_fn(s)
    if s.imag == 0:
        out = out.real
    return 0.5 * (out + out.T)


# -- nilmanifold ------------------------------------------------------------

@dataclass(frozen=True)
class NilmanifoldGrid:
    """Uniform grid of N points per axis on the unit cube, spacing 1/N."""

    N: int
    mu: float = 0.0

    def __post_init__(self):
        if isinstance(self.N, bool) or not isinstance(self.N, (int, np.integer)) or self.N < 4:
            raise InvalidArgument(f"N must be an integer >= 4, got {self.N!r}")
        if not math.isfinite(self.mu):
            raise InvalidArgument("mu must be finite")

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def period(self) -> int:
        """Number of distinct x0-frequency sectors on this grid."""
        return self.N * self.N // 2 if self.N % 2 == 0 else self.N * self.N


def sector_operator(g: NilmanifoldGrid, m: int) -> np.ndarray:
    """Operator on the x0-frequency-m sector, acting on an N x N (x1, x2) grid.

    The fields become covariant shifts: X1 picks up the phase exp(2 pi i m x2 h)
    per step and X2 the phase exp(-2 pi i m x1 h); the lattice identifications
    contribute exp(2 pi i m x2), exp(-2 pi i m x1) at the wrap.
    """
    N, h = g.N, g.h
    M = N * N
    i1, i2 = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    me = (i1 + N * i2).ravel()
    x1, x2 = i1 * h, i2 * h
    ph1 = np.exp(2j * np.pi * m * x2 * h) * np.where(i1 + 1 == N, np.exp(2j * np.pi * m * x2), 1.0)
    ph2 = np.exp(-2j * np.pi * m * x1 * h) * np.where(i2 + 1 == N, np.exp(-2j * np.pi * m * x1), 1.0)
    T1 = np.zeros((M, M), complex)
    T1[me, ((i1 + 1) % N + N * i2).ravel()] = ph1.ravel()
    T2 = np.zeros((M, M), complex)
    T2[me, (i1 + N * ((i2 + 1) % N)).ravel()] = ph2.ravel()
    I = np.eye(M)
    L = 0.5 * ((2 * I - T1 - T1.conj().T) + (2 * I - T2 - T2.conj().T)) / (h * h)
    L += 2.0 * np.pi * g.mu * m * I
    return L


def _sector_eigs(g, m):
    """Eigenvalues of the mu = 0 sector operator for frequency m."""
    L = sector_operator(NilmanifoldGrid(g.N, 0.0), m)
    asym = float(np.abs(L - L.conj().T).max())
    if asym > 1e-10:
        raise AssemblyFault(f"sector {m} operator not Hermitian ({asym:.3g})", sector=m)
    return sla.eigh(L, eigvals_only=True, driver="evd")


def nilmanifold_spectrum(g: NilmanifoldGrid, count: int) -> Spectrum:
    """Lowest ``count`` eigenvalues (with multiplicity) of the discretized L_mu.

    Every frequency sector of the grid is solved.  Sector -m is the complex
    conjugate of sector m at mu = 0, and mu only shifts sector m by 2 pi mu m,
    so one dense solve serves both signs.
    """
    if g.N * g.N > MAX_BLOCK:
        raise GridTooLarge(f"N={g.N}: dense sector blocks limited to {MAX_BLOCK}", N=g.N, limit=MAX_BLOCK)
    count = int(count)
    if count < 1:
        raise InvalidArgument("count must be >= 1")
    P = g.period
    lo_m, hi_m = -((P - 1) // 2), P // 2
    parts = []
    for m in range(0, hi_m + 1):
        w = _sector_eigs(g, m)
        parts.append(w + 2.0 * np.pi * g.mu * m)
        if m > 0 and -m >= lo_m:
            parts.append(w - 2.0 * np.pi * g.mu * m)
    vals = np.sort(np.concatenate(parts))
    if vals.size < count:
        raise InvalidArgument(f"grid has only {vals.size} eigenvalues", available=int(vals.size))
    ev = vals[:count]
    if g.mu == 0.0 and ev[0] < -1e-10:
        raise AssemblyFault(f"negative eigenvalue {ev[0]:.3g}")
    return Spectrum.from_values(ev, rel_tol=1e-9)
