# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; mirrors ``_kernels_py`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, expm1, cos, sin, fabs, copysign

cnp.import_array()

cdef double LN2 = 0.6931471805599453
cdef double SMALL = 1e-5


cdef inline void _lr_xc(double xi, double* lr, double* xc) noexcept nogil:
    cdef double em
    if xi < SMALL:
        lr[0] = -xi * xi / 6.0
        xc[0] = 1.0 + xi * xi / 3.0
    else:
        em = -expm1(-2.0 * xi)
        lr[0] = log(xi) - (xi + log(em) - LN2)
        xc[0] = xi * (2.0 - em) / em


def mehler_integrand(xi, int n, double mu, double a, double c):
    cdef const double[::1] x = np.ascontiguousarray(xi, dtype=np.float64)
    cdef Py_ssize_t i, m = x.shape[0]
    re = np.empty(m)
    im = np.empty(m)
    cdef double[::1] r = re
    cdef double[::1] s = im
    cdef double lr, xc, le, up, am, v
    with nogil:
        for i in range(m):
            v = x[i]
            _lr_xc(v, &lr, &xc)
            le = n * lr - c * xc
            am = fabs(mu) * v
            up = exp(le + am)
            r[i] = cos(a * v) * up * (1.0 + exp(-2.0 * am))
            s[i] = -sin(a * v) * copysign(1.0, mu) * up * -expm1(-2.0 * am)
    return re, im


def mehler_batch(xi, w, int n, double mu, a, c):
    cdef const double[::1] x = np.ascontiguousarray(xi, dtype=np.float64)
    cdef const double[::1] ww = np.ascontiguousarray(w, dtype=np.float64)
    aa, cc = np.broadcast_arrays(np.atleast_1d(np.asarray(a, dtype=np.float64)),
                                 np.atleast_1d(np.asarray(c, dtype=np.float64)))
    shape = aa.shape
    cdef const double[::1] av = np.ascontiguousarray(aa.ravel())
    cdef const double[::1] cv = np.ascontiguousarray(cc.ravel())
    cdef Py_ssize_t i, j, m = x.shape[0], p = av.shape[0]
    base_a = np.empty(m)
    xc_a = np.empty(m)
    ep_a = np.empty(m)
    em_a = np.empty(m)
    cdef double[::1] base = base_a
    cdef double[::1] xcv = xc_a
    cdef double[::1] ep = ep_a
    cdef double[::1] emv = em_a
    re = np.empty(p)
    im = np.empty(p)
    cdef double[::1] r = re
    cdef double[::1] s = im
    cdef double lr, xc, e, sr, si, ph, aj, cj, am, wb
    with nogil:
        for i in range(m):
            _lr_xc(x[i], &lr, &xc)
            base[i] = n * lr
            xcv[i] = xc
            am = fabs(mu) * x[i]
            wb = ww[i] * exp(am)
            ep[i] = wb * (1.0 + exp(-2.0 * am))
            emv[i] = copysign(1.0, mu) * wb * -expm1(-2.0 * am)
        for j in range(p):
            aj = av[j]
            cj = cv[j]
            sr = 0.0
            si = 0.0
            for i in range(m):
                e = exp(base[i] - cj * xcv[i])
                ph = aj * x[i]
                sr += cos(ph) * e * ep[i]
                si -= sin(ph) * e * emv[i]
            r[j] = sr
            s[j] = si
    return re.reshape(shape), im.reshape(shape)


def expsum(lam, mult, double t):
    """Neumaier-compensated sum of mult_k * exp(-t lam_k)."""
    cdef const double[::1] l = np.ascontiguousarray(lam, dtype=np.float64)
    cdef const double[::1] mm = np.ascontiguousarray(mult, dtype=np.float64)
    cdef Py_ssize_t i, m = l.shape[0]
    cdef double total = 0.0, comp = 0.0, term, tmp
    with nogil:
        for i in range(m):
            term = mm[i] * exp(-t * l[i])
            tmp = total + term
            if fabs(total) >= fabs(term):
                comp += (total - tmp) + term
            else:
                comp += (term - tmp) + total
            total = tmp
    return total + comp
