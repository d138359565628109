"""Pure numpy implementations of the hot loops.

Same signatures and semantics as the compiled ``_kernels`` module; used when
the extension is not built or ``HEISENSPEC_PURE=1`` is set.
"""
import math

import numpy as np

LN2 = math.log(2.0)
_SMALL = 1e-5

# bytes per chunk of the (pairs x nodes) work array in mehler_batch
_CHUNK = 1 << 22


def _log_ratio_and_xcoth(xi):
    """Return log(xi/sinh xi) and xi*coth(xi) for xi >= 0."""
    xi = np.asarray(xi, dtype=float)
    small = xi < _SMALL
    safe = np.where(small, 1.0, xi)
    em = -np.expm1(-2.0 * safe)  # 1 - exp(-2 xi)
    log_sinh = safe + np.log(em) - LN2
    lr = np.where(small, -xi * xi / 6.0, np.log(safe) - log_sinh)
    xc = np.where(small, 1.0 + xi * xi / 3.0, safe * (2.0 - em) / em)
    return lr, xc


def mehler_integrand(xi, n, mu, a, c):
    """Folded integrand of the Folland-Stein heat kernel on xi >= 0.

    With E(xi) = (xi/sinh xi)**n * exp(-c xi coth xi) the returned pair is
    ``2 cos(a xi) cosh(mu xi) E`` and ``-2 sin(a xi) sinh(mu xi) E``, i.e. the
    real and imaginary parts of g(xi) + g(-xi) for
    g(xi) = exp(i a xi - mu xi) E(xi).
    """
    xi = np.asarray(xi, dtype=float)
    lr, xc = _log_ratio_and_xcoth(xi)
    log_e = n * lr - c * xc
    m = abs(mu) * xi
    big = np.exp(log_e + m)
    tail = np.exp(-2.0 * m)
    re = np.cos(a * xi) * big * (1.0 + tail)
    # expm1 keeps e^{m} - e^{-m} accurate for small mu * xi
    im = -np.sin(a * xi) * math.copysign(1.0, mu) * big * -np.expm1(-2.0 * m)
    return re, im


def mehler_batch(xi, w, n, mu, a, c):
    """Weighted node sums of :func:`mehler_integrand` for many (a, c) pairs."""
    xi = np.ascontiguousarray(xi, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    a = np.atleast_1d(np.asarray(a, dtype=float))
    c = np.atleast_1d(np.asarray(c, dtype=float))
    a, c = np.broadcast_arrays(a, c)
    shape = a.shape
    a = a.ravel()
    c = c.ravel()
    lr, xc = _log_ratio_and_xcoth(xi)
    base = n * lr
    m = abs(mu) * xi
    wb = w * np.exp(m)
    ep = wb * (1.0 + np.exp(-2.0 * m))
    em = math.copysign(1.0, mu) * wb * -np.expm1(-2.0 * m)
    re = np.empty(a.size)
    im = np.empty(a.size)
    step = max(1, _CHUNK // (8 * max(xi.size, 1)))
    for s in range(0, a.size, step):
        aa = a[s:s + step, None]
        cc = c[s:s + step, None]
        e = np.exp(base - cc * xc)
        ph = aa * xi
        re[s:s + step] = (np.cos(ph) * e) @ ep
        im[s:s + step] = -(np.sin(ph) * e) @ em
    return re.reshape(shape), im.reshape(shape)


def expsum(lam, mult, t):
    """Compensated sum of mult_k * exp(-t lam_k)."""
    lam = np.asarray(lam, dtype=float)
    terms = np.asarray(mult, dtype=float) * np.exp(-t * lam)
    return math.fsum(terms)
