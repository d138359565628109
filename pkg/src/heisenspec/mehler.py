"""Heat kernel of the Folland-Stein sublaplacian on H^{2n+1} and the constant nu(mu).

For ``L_mu = -1/2 sum_j X_j^2 - i mu X_0`` with |mu| < n the heat kernel is

    k_mu(x0, x', t) = (2 pi t)^{-(n+1)} int exp(i x0 xi / t - mu xi)
                      (xi / sinh xi)^n exp(-|x'|^2 xi coth(xi) / (2t)) dxi

and ``nu(mu) = k_mu(0, 0, 1) / (n+1)!``.  Everything is evaluated on the
folded half line with Gauss-Kronrod panels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaincc, gammaln, loggamma

from . import _quad
from ._backend import kernels
from ._kernels_py import _log_ratio_and_xcoth as _lr
from .errors import DivergentIntegral, InvalidArgument, ToleranceNotMet
from .group import Point

NU_REL_TOL = 1e-10
KERNEL_REL_TOL = 1e-8
PHASE_SWITCH = 50.0
PHASE_LIMIT = 1e4


@dataclass(frozen=True)
class HeatQuery:
    n: int
    mu: float
    x0: float
    r2: float
    t: float
    rel_tol: float = KERNEL_REL_TOL

    def __post_init__(self):
        _check_order(self.n)
        _check_mu(self.n, self.mu)
        if not self.t > 0:
            raise InvalidArgument(f"t must be positive (kernel is supported on t > 0), got {self.t}")
        if not self.r2 >= 0:
            raise InvalidArgument(f"r2 = |x'|^2 must be nonnegative, got {self.r2}")
        if not self.rel_tol > 0:
            raise InvalidArgument("rel_tol must be positive")
        if not math.isfinite(self.x0):
            raise InvalidArgument("x0 must be finite")


@dataclass(frozen=True)
class KernelValue:
    value: complex | float
    est_error: float

    def to_dict(self) -> dict:
        v = self.value
        if isinstance(v, complex):
            v = {"re": v.real, "im": v.imag}
        return {"value": v, "est_error": self.est_error}


def _check_order(n):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgument(f"n must be a positive integer, got {n!r}")


def _check_mu(n, mu):
    if isinstance(mu, complex):
        raise InvalidArgument("only real mu is supported")
    if not math.isfinite(mu):
        raise InvalidArgument("mu must be finite")
    if abs(mu) >= n:
        raise DivergentIntegral(f"|mu| = {abs(mu)} >= n = {n}: the defining integral diverges",
                                n=int(n), mu=float(mu))


def _nu_integrand(n, mu):
    def f(xi):
        lr, _ = _lr(xi)
        base = n * lr
        return np.exp(base + mu * xi) + np.exp(base - mu * xi), np.zeros_like(xi)
    return f


def _integrate(f, n, decay, width, rel_tol, abs_tol=0.0):
    """Half-line integral with the domain doubled until the tail bound is negligible."""
    R = max(8.0, min(30.0 / decay, 1e5)) if decay > 0 else 8.0
    while True:
        val, err, rab = _quad.adaptive_halfline(f, R, width, 0.5 * rel_tol, abs_tol)
        tail = _quad.tail_bound(n, decay, R)
        if tail <= 0.1 * max(rel_tol * abs(val), abs_tol):
            return val, err + tail
        if R > 1e6:
            raise ToleranceNotMet("integration domain did not converge", est_error=err + tail)
        R *= 2.0


def nu(n: int, mu: float = 0.0, rel_tol: float = NU_REL_TOL, full_output: bool = False):
    """nu(mu) = (2 pi)^{-(n+1)} / (n+1)! * int exp(-mu xi) (xi / sinh xi)^n dxi.

    Raises DivergentIntegral for |mu| >= n.  With ``full_output`` a
    :class:`KernelValue` carrying the error estimate is returned.
    """
    _check_order(n)
    mu = float(mu)
    _check_mu(n, mu)
    val, err = _nu_cached(int(n), mu, float(rel_tol))
    return KernelValue(val, err) if full_output else val


@lru_cache(maxsize=4096)
def _nu_cached(n, mu, rel_tol):
    f = _nu_integrand(n, mu)
    val, err = _integrate(f, n, n - abs(mu), 1.0, rel_tol)
    scale = (2.0 * math.pi) ** (-(n + 1)) / math.factorial(n + 1)
    value = scale * val.real
    est = scale * err
    if not est <= rel_tol * abs(value):
        raise ToleranceNotMet(f"nu error {est:.3g} above tolerance", value=value, est_error=est)
    return value, est


def heat_kernel(q: HeatQuery) -> KernelValue:
    """Evaluate k_mu(x0, x', t); real for mu = 0 or x0 = 0, complex otherwise."""
    a = q.x0 / q.t
    c = q.r2 / (2.0 * q.t)
    if abs(a) > PHASE_LIMIT:
        raise ToleranceNotMet(f"|x0|/t = {abs(a):.3g} exceeds {PHASE_LIMIT:g}; oscillation unresolvable")
    width = 1.0 if abs(a) <= PHASE_SWITCH else (math.pi / 4.0) / abs(a)
    n, mu = int(q.n), float(q.mu)

    def f(xi):
        return kernels.mehler_integrand(xi, n, mu, a, c)

    val, err = _integrate(f, n, n - abs(mu) + c, width, q.rel_tol)
    scale = (2.0 * math.pi * q.t) ** (-(n + 1))
    value = scale * val
    est = scale * err
    if not est <= q.rel_tol * abs(value):
        raise ToleranceNotMet(f"kernel error {est:.3g} above tolerance", est_error=est)
    if mu == 0.0 or q.x0 == 0.0:
        return KernelValue(value.real, est)
    return KernelValue(complex(value), est)


def heat_kernel_value(n, mu, x0, r2, t, rel_tol=KERNEL_REL_TOL):
    return heat_kernel(HeatQuery(n, mu, x0, r2, t, rel_tol)).value


def fiber_mehler(n: int, xi0, r2: float, t: float):
    """Partial Fourier transform in x0 of the mu = 0 kernel (Mehler's formula).

    (2 pi t)^{-n} (t xi0 / sinh t xi0)^n exp(-(t xi0 coth t xi0) r2 / (2t)).
    """
    _check_order(n)
    if not t > 0:
        raise InvalidArgument("t must be positive")
    z = np.abs(np.asarray(xi0, dtype=float)) * t
    lr, xc = _lr(z)
    out = (2.0 * math.pi * t) ** (-n) * np.exp(n * lr - xc * r2 / (2.0 * t))
    return float(out) if out.ndim == 0 else out


# -- fixed-rule evaluation for finite differences and mass integrals ---------

def _fixed_rule(n, decay, a_max, tol=1e-18, width_max=1.0, phase_per_panel=math.pi / 4.0):
    R = 4.0
    while _quad.tail_bound(n, decay, R) > tol:
        R *= 1.25
    width = min(width_max, phase_per_panel / a_max) if a_max > 0 else width_max
    npan = int(math.ceil(R / width))
    return _quad.kronrod_nodes(np.linspace(0.0, R, npan + 1))


def _kernel_batch(n, mu, x0, r2, t, rule=None):
    """Kernel values on arrays (x0, r2, t) with one shared fixed node set."""
    x0, r2, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x0, r2, t)))
    a = x0 / t
    c = r2 / (2.0 * t)
    if rule is None:
        rule = _fixed_rule(n, n - abs(mu) + float(c.min()), float(np.abs(a).max()))
    xi, w = rule
    re, im = kernels.mehler_batch(xi, w, n, mu, a, c)
    return (2.0 * math.pi * t) ** (-(n + 1)) * (re + 1j * im)


def heat_residual(n: int, mu: float, p: Point, t: float, h: float, kernel_mu: float | None = None) -> float:
    """|(L_mu + d/dt) k| at (p, t) by central differences of step h.

    Second derivatives X_j^2 are taken along the exact flows of the
    left-invariant fields, X_j = d_j + x_{n+j} d_0 and X_{n+j} = d_{n+j} - x_j d_0.
    ``kernel_mu`` substitutes a different kernel (negative control).
    """
    _check_order(n)
    if p.d != 2 * n:
        raise InvalidArgument(f"point must have {2 * n} degree-1 coordinates")
    if not (t > h > 0):
        raise InvalidArgument("need t > h > 0")
    km = mu if kernel_mu is None else kernel_mu
    _check_mu(n, km)
    x = p.as_array()
    pts = [(x[0], x[1:], t)]
    for j in range(n):
        for s in (h, -h):
            y = x.copy()
            y[0] += x[1 + n + j] * s
            y[1 + j] += s
            pts.append((y[0], y[1:], t))
            y = x.copy()
            y[0] -= x[1 + j] * s
            y[1 + n + j] += s
            pts.append((y[0], y[1:], t))
    pts += [(x[0] + h, x[1:], t), (x[0] - h, x[1:], t), (x[0], x[1:], t + h), (x[0], x[1:], t - h)]
    x0s = np.array([q[0] for q in pts])
    r2s = np.array([float(q[1] @ q[1]) for q in pts])
    ts = np.array([q[2] for q in pts])
    k = _kernel_batch(n, float(km), x0s, r2s, ts)
    k_c = k[0]
    lap = 0.0
    for j in range(n):
        base = 1 + 4 * j
        # entries: (X_j,+h), (X_{n+j},+h), (X_j,-h), (X_{n+j},-h)
        lap += (k[base] - 2 * k_c + k[base + 2]) + (k[base + 1] - 2 * k_c + k[base + 3])
    lap /= h * h
    m = 1 + 4 * n
    dx0 = (k[m] - k[m + 1]) / (2 * h)
    dt = (k[m + 2] - k[m + 3]) / (2 * h)
    return float(abs(-0.5 * lap - 1j * mu * dx0 + dt))


def _x0_marginal(n, s):
    """Density of the x'-marginal of k_0 in the scaled variable s = x0/t."""
    lg = (n - 1) * math.log(2.0) + 2.0 * loggamma(0.5 * (n + 1j * s)).real - gammaln(n)
    return math.exp(lg) / (2.0 * math.pi)


def total_mass(n: int, t: float, trunc: float = 8.0, rel_tol: float = 1e-8, nodes: int = 12) -> KernelValue:
    """Integral of k_0(., t) over the parabolic box |x0| <= trunc^2 t / 4, |x'| <= trunc sqrt(t).

    The reported error adds the quadrature discrepancy between two
    resolutions and estimates of the mass outside the box, so a small
    truncation shows up as a wide ``est_error``.
    """
    _check_order(n)
    if not t > 0 or not trunc > 0:
        raise InvalidArgument("t and trunc must be positive")
    X = trunc * trunc * t / 4.0
    Rr = trunc * math.sqrt(t)
    sphere = 2.0 * math.pi ** n / math.gamma(n)

    def integrate(m):
        gx, gw = np.polynomial.legendre.leggauss(m)
        x_edges = np.linspace(0.0, X, max(1, int(math.ceil(X / (0.75 * t)))) + 1)
        r_edges = np.linspace(0.0, Rr, max(1, int(math.ceil(Rr / (0.5 * math.sqrt(t))))) + 1)

        def nodes_on(edges):
            half = 0.5 * np.diff(edges)
            mid = 0.5 * (edges[1:] + edges[:-1])
            return ((mid[:, None] + half[:, None] * gx).ravel(), (half[:, None] * gw).ravel())

        xs, xw = nodes_on(x_edges)
        rs, rw = nodes_on(r_edges)
        a_max = X / t
        rows = []
        for r, wr in zip(rs, rw):
            c = r * r / (2.0 * t)
            rule = _fixed_rule(n, n + c, a_max, tol=1e-16, width_max=1.5, phase_per_panel=6.0)
            k = _kernel_batch(n, 0.0, xs, r * r, t, rule=rule).real
            rows.append(wr * r ** (2 * n - 1) * math.fsum(k * xw))
        return 2.0 * sphere * math.fsum(rows)

    fine = integrate(nodes)
    coarse = integrate(max(4, nodes - 4))
    quad_err = abs(fine - coarse)
    r_tail = float(gammaincc(n, 0.5 * trunc * trunc))
    x_tail = 2.0 * (2.0 / math.pi) * _x0_marginal(n, X / t)
    if quad_err > rel_tol * max(abs(fine), 1.0):
        raise ToleranceNotMet(f"mass quadrature discrepancy {quad_err:.3g}", value=fine, est_error=quad_err)
    return KernelValue(fine, quad_err + r_tail + x_tail)
