"""Gauss-Kronrod panels on the half line for the Mehler-type integrands."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaincc, gammaln

from .errors import ToleranceNotMet

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15)
XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])

_K_NODES = np.concatenate((-XGK[:-1], XGK[::-1]))
_K_W = np.concatenate((WGK[:-1], WGK[::-1]))
_G_W = np.zeros(15)
_G_W[[1, 3, 5]] = WG[:3]
_G_W[[13, 11, 9]] = WG[:3]
_G_W[7] = WG[3]

EPS = np.finfo(float).eps
MAX_PANELS = 200_000


def kronrod_nodes(edges):
    """Nodes and weights of the 15-point Kronrod rule on each panel [e_i, e_{i+1}]."""
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * _K_NODES[None, :]).ravel()
    w = (half[:, None] * _K_W[None, :]).ravel()
    return x, w


def tail_bound(n: int, decay: float, R: float) -> float:
    """Bound on int_R^inf of |integrand| for |(xi/sinh xi)^n e^{...}| <= (2 xi)^n e^{-decay xi}/(1-e^{-2R})^n.

    The factor 2 in front accounts for folding both half lines.
    """
    if decay <= 0:
        return math.inf
    pref = n * (math.log(2.0) - math.log1p(-math.exp(-2.0 * R))) if n else 0.0
    log_tail = pref + gammaln(n + 1) - (n + 1) * math.log(decay)
    q = gammaincc(n + 1, decay * R)
    if q <= 0:
        return 0.0
    return 2.0 * math.exp(log_tail) * q


def _panel_sums(f, lo, hi):
    """Kronrod/Gauss estimates for a batch of panels; f returns (re, im) arrays."""
    edges_lo = np.asarray(lo)
    half = 0.5 * (np.asarray(hi) - edges_lo)
    mid = edges_lo + half
    x = (mid[:, None] + half[:, None] * _K_NODES[None, :])
    re, im = f(x.ravel())
    vals = (re + 1j * im).reshape(x.shape)
    k = half * (vals @ _K_W)
    g = half * (vals @ _G_W)
    mean = (vals @ _K_W) * 0.5
    resasc = half * (np.abs(vals - mean[:, None]) @ _K_W)
    resabs = half * (np.abs(vals) @ _K_W)
    raw = np.abs(k - g)
    err = raw.copy()
    ok = (resasc > 0) & (raw > 0)
    err[ok] = resasc[ok] * np.minimum(1.0, (200.0 * raw[ok] / resasc[ok]) ** 1.5)
    err = np.maximum(err, 50.0 * EPS * resabs)
    return k, err, resabs


def adaptive_halfline(f, R: float, width: float, rel_tol: float, abs_tol: float = 0.0):
    """Integrate f over [0, R] with bisection of the worst panels.

    Returns (value, error_estimate, abs_integral).  Panels are kept sorted by
    position and summed with math.fsum so the result is deterministic.
    """
    npan = max(1, int(math.ceil(R / width)))
    edges = np.linspace(0.0, R, npan + 1)
    lo, hi = edges[:-1], edges[1:]
    val, err, rab = _panel_sums(f, lo, hi)
    while True:
        total = complex(math.fsum(val.real), math.fsum(val.imag))
        etot = math.fsum(err)
        target = max(rel_tol * abs(total), abs_tol)
        if etot <= target:
            return total, etot, math.fsum(rab)
        floor = 50.0 * EPS * math.fsum(rab)
        if floor > target and etot <= 2.0 * floor:
            raise ToleranceNotMet(
                f"cancellation floor {floor:.3g} exceeds requested accuracy {target:.3g}",
                value=[total.real, total.imag], est_error=etot)
        if lo.size > MAX_PANELS:
            raise ToleranceNotMet(f"panel budget exhausted, error {etot:.3g} > {target:.3g}",
                                  value=[total.real, total.imag], est_error=etot)
        bad = err > target * (hi - lo) / R
        if not bad.any():
            bad = err >= err.max()
        mid = 0.5 * (lo[bad] + hi[bad])
        nv, ne, nr = _panel_sums(f, np.concatenate((lo[bad], mid)), np.concatenate((mid, hi[bad])))
        keep = ~bad
        lo = np.concatenate((lo[keep], lo[bad], mid))
        hi = np.concatenate((hi[keep], mid, hi[bad]))
        val = np.concatenate((val[keep], nv))
        err = np.concatenate((err[keep], ne))
        rab = np.concatenate((rab[keep], nr))
        order = np.argsort(lo, kind="stable")
        lo, hi, val, err, rab = lo[order], hi[order], val[order], err[order], rab[order]
