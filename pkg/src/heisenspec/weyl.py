"""Weyl coefficients, CR volumes and asymptotic prediction/inversion.

alpha, beta and gamma are the leading constants in the eigenvalue counting
functions of the Kohn Laplacian, the horizontal sublaplacian and the contact
Laplacian; each is a finite binomial sum of :func:`heisenspec.mehler.nu`
values at integer arguments.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from math import comb
from typing import Sequence, Union

import numpy as np

from . import hypo
from .errors import ConditionViolated, FitFailed, InconsistencyFault, InvalidArgument
from .mehler import NU_REL_TOL, nu

VOLUME_INTRO = "intro"
VOLUME_DEFINITION = "definition"
FIT_COND_MAX = 1e12


def _nu_at(n, arg, rel_tol):
    if not -n < arg < n:
        raise InconsistencyFault(f"nu argument {arg} outside (-{n}, {n})", n=n, argument=arg)
    return nu(n, float(arg), rel_tol)


def _check_kappa(n, kappa):
    hypo._check_range("n", n, 1, math.inf)
    hypo._check_range("kappa", kappa, 0, n // 2)


def alpha(n: int, kappa: int, p: int, q: int, rel_tol: float = NU_REL_TOL) -> float:
    """Kohn Laplacian coefficient on (p, q)-forms for signature (n - kappa, kappa).

    2^{-(n+1)} C(n,p) sum_k C(n-kappa,k) C(kappa,q-k) nu(n + 2q - 2kappa - 4k).
    """
    _check_kappa(n, kappa)
    hypo._check_range("p", p, 0, n)
    hypo._check_range("q", q, 0, n)
    if not hypo.y_condition(n, kappa, n, q):
        raise ConditionViolated(f"condition Y({q}) fails for n={n}, kappa={kappa}", n=n, kappa=kappa, q=q)
    terms = []
    for k in range(max(0, q - kappa), min(q, n - kappa) + 1):
        terms.append(comb(n - kappa, k) * comb(kappa, q - k) * _nu_at(n, n + 2 * q - 2 * kappa - 4 * k, rel_tol))
    return 2.0 ** (-(n + 1)) * comb(n, p) * math.fsum(terms)


def _beta_terms(n, kappa, p, q):
    for l in range(max(0, p - kappa), min(p, n - kappa) + 1):
        for k in range(max(0, q - kappa), min(q, n - kappa) + 1):
            w = comb(n - kappa, l) * comb(kappa, p - l) * comb(n - kappa, k) * comb(kappa, q - k)
            # half the difference of the two Levi weights; see notes on the printed argument
            yield w, (q - p) + 2 * (l - k)


def beta(n: int, kappa: int, p: int, q: int, rel_tol: float = NU_REL_TOL) -> float:
    """Horizontal sublaplacian coefficient on forms of bidegree (p, q).

    sum_{k,l} C(n-kappa,l) C(kappa,p-l) C(n-kappa,k) C(kappa,q-k) nu((q-p) + 2(l-k)).
    """
    _check_kappa(n, kappa)
    hypo._check_range("p", p, 0, n)
    hypo._check_range("q", q, 0, n)
    if (p, q) in ((kappa, n - kappa), (n - kappa, kappa)):
        raise ConditionViolated(f"(p, q) = ({p}, {q}) is excluded for n={n}, kappa={kappa}",
                                n=n, kappa=kappa, p=p, q=q)
    return math.fsum(w * _nu_at(n, arg, rel_tol) for w, arg in _beta_terms(n, kappa, p, q))


def gamma(n: int, k: int, rel_tol: float = NU_REL_TOL) -> float:
    """Contact Laplacian coefficient in degree k: 2^{-n} sum_{p+q=k} C(n,p) C(n,q) nu(p-q)."""
    hypo._check_range("n", n, 1, math.inf)
    hypo._check_range("k", k, 0, 2 * n)
    if k == n:
        raise ConditionViolated(f"k = n = {n} is excluded", n=n, k=k)
    terms = [comb(n, p) * comb(n, k - p) * _nu_at(n, 2 * p - k, rel_tol)
             for p in range(max(0, k - n), min(n, k) + 1)]
    return 2.0 ** (-n) * math.fsum(terms)


def table(coeff: str, n: int, kappa: int = 0, rel_tol: float = NU_REL_TOL):
    """All admissible values of one coefficient; yields (key, value or None)."""
    if coeff == "gamma":
        for k in range(2 * n + 1):
            try:
                yield (n, k), gamma(n, k, rel_tol)
            except ConditionViolated:
                yield (n, k), None
        return
    fn = {"alpha": alpha, "beta": beta}.get(coeff)
    if fn is None:
        raise InvalidArgument(f"unknown coefficient {coeff!r}")
    for p in range(n + 1):
        for q in range(n + 1):
            try:
                yield (n, kappa, p, q), fn(n, kappa, p, q, rel_tol)
            except ConditionViolated:
                yield (n, kappa, p, q), None


@dataclass(frozen=True)
class CRSetting:
    n: int
    kappa: int
    vol_integral: float

    def __post_init__(self):
        _check_kappa(self.n, self.kappa)
        if (-1) ** self.kappa * self.vol_integral < 0:
            warnings.warn("(-1)^kappa * vol_integral < 0: not a kappa-strictly pseudoconvex volume",
                          RuntimeWarning, stacklevel=3)


def pseudohermitian_volume(s: CRSetting, convention: str = VOLUME_INTRO) -> float:
    """(-1)^kappa / (n! 2^n) * vol_integral; ``convention='definition'`` drops the 2^n."""
    if convention == VOLUME_INTRO:
        norm = math.factorial(s.n) * 2 ** s.n
    elif convention == VOLUME_DEFINITION:
        norm = math.factorial(s.n)
    else:
        raise InvalidArgument(f"unknown volume convention {convention!r}")
    return (-1) ** s.kappa * s.vol_integral / norm


def contact_volume(n: int, vol_integral: float) -> float:
    hypo._check_range("n", n, 1, math.inf)
    return vol_integral / math.factorial(n)


@dataclass(frozen=True)
class AsymptoticModel:
    """Leading Weyl data for an order-m operator on a (d+1)-dimensional Heisenberg manifold."""

    d: int
    m: int
    nu0: float

    def __post_init__(self):
        hypo._check_range("d", self.d, 1, math.inf)
        hypo._check_range("m", self.m, 1, math.inf)
        if self.m % 2:
            raise InvalidArgument("Heisenberg order m must be even")
        if not self.nu0 > 0:
            raise InvalidArgument("nu0 must be positive")

    @property
    def exponent(self) -> float:
        return (self.d + 2) / self.m

    @property
    def A0(self) -> float:
        return math.gamma(1.0 + self.exponent) * self.nu0


@dataclass(frozen=True)
class Counting:
    lam: float


@dataclass(frozen=True)
class Eigen:
    k: float


@dataclass(frozen=True)
class HeatLeading:
    t: float


Query = Union[Counting, Eigen, HeatLeading]


def predict(model: AsymptoticModel, what: Query) -> float:
    a = model.exponent
    if isinstance(what, Counting):
        if not what.lam > 0:
            raise InvalidArgument("lambda must be positive")
        return model.nu0 * what.lam ** a
    if isinstance(what, Eigen):
        if not what.k >= 1:
            raise InvalidArgument("k must be >= 1")
        return (what.k / model.nu0) ** (1.0 / a)
    if isinstance(what, HeatLeading):
        if not what.t > 0:
            raise InvalidArgument("t must be positive")
        return model.A0 * what.t ** (-a)
    raise InvalidArgument(f"unknown prediction query {what!r}")


def karamata_fit(samples: Sequence, d: int, m: int, terms: int = 2):
    """Recover nu0 from heat-trace samples [(t, trace), ...].

    Least squares of trace * t^a against 1, t^{2/m}, ...; returns
    ``(nu0, quality)`` with quality the residual 2-norm of the fit.
    """
    model = AsymptoticModel(d, m, 1.0)
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidArgument("samples must be (t, trace) pairs")
    if arr.shape[0] < 3:
        raise InvalidArgument("need at least 3 samples")
    t, tr = arr[:, 0], arr[:, 1]
    if not np.all(t > 0) or not np.all(np.diff(t) < 0):
        raise InvalidArgument("t must be positive and strictly decreasing")
    if not np.all(tr > 0):
        raise InvalidArgument("traces must be positive")
    if terms < 1 or terms > arr.shape[0]:
        raise InvalidArgument("need 1 <= terms <= number of samples")
    y = tr * t ** model.exponent
    V = t[:, None] ** (np.arange(terms)[None, :] * (2.0 / m))
    cond = np.linalg.cond(V)
    if not cond < FIT_COND_MAX:
        raise FitFailed(f"design matrix condition number {cond:.3g}", cond=float(cond))
    coef, *_ = np.linalg.lstsq(V, y, rcond=None)
    quality = float(np.linalg.norm(V @ coef - y))
    A0 = float(coef[0])
    if not A0 > 0:
        raise FitFailed(f"nonpositive leading coefficient {A0:.3g}", A0=A0)
    return A0 / math.gamma(1.0 + model.exponent), quality


def conformal_power_prediction(n: int, k: int, vol_theta: float, lam: float) -> float:
    """nu(0) vol lambda^{(n+1)/k}: leading counting function of a k-th conformal power."""
    hypo._check_range("n", n, 1, math.inf)
    hypo._check_range("k", k, 1, n + 1)
    if not lam > 0:
        raise InvalidArgument("lambda must be positive")
    return nu(n, 0.0) * vol_theta * lam ** ((n + 1) / k)
