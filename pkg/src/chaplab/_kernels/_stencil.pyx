# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled stencil kernels.

Every arithmetic expression mirrors fallback.py term for term, and the
module is compiled with -ffp-contract=off, so outputs agree bitwise with
the numpy backend.
"""

import numpy as np
from libc.math cimport fabs, INFINITY


def rhs_axisym(double[::1] phi, double[::1] pi, double[::1] r, double h,
               Py_ssize_t lo, Py_ssize_t hi, int order,
               double[::1] dpi, double[::1] c, double[::1] fr):
    cdef Py_ssize_t j, jm1, jm2, a
    cdef double inv12h, inv12h2, inv2h, invh2
    cdef double frj, frrj, prj, lapj, qj, cj
    if hi <= lo:
        return
    if order == 4:
        inv12h = 1.0 / (12.0 * h)
        inv12h2 = 1.0 / (12.0 * h * h)
        a = lo if lo > 2 else 2
        for j in range(a, hi):
            frj = (8.0 * (phi[j + 1] - phi[j - 1]) - (phi[j + 2] - phi[j - 2])) * inv12h
            frrj = (16.0 * (phi[j + 1] + phi[j - 1]) - (phi[j + 2] + phi[j - 2])
                    - 30.0 * phi[j]) * inv12h2
            prj = (8.0 * (pi[j + 1] - pi[j - 1]) - (pi[j + 2] - pi[j - 2])) * inv12h
            lapj = frrj + frj / r[j]
            qj = frj * frj
            cj = 1.0 + 2.0 * pi[j] + qj
            dpi[j] = cj * lapj - 2.0 * frj * prj - qj * frrj
            c[j] = cj
            fr[j] = frj
        for j in range(lo, min(hi, 2)):
            jm1 = j - 1 if j >= 1 else 1 - j
            jm2 = j - 2 if j >= 2 else 2 - j
            frj = (8.0 * (phi[j + 1] - phi[jm1]) - (phi[j + 2] - phi[jm2])) * inv12h
            frrj = (16.0 * (phi[j + 1] + phi[jm1]) - (phi[j + 2] + phi[jm2])
                    - 30.0 * phi[j]) * inv12h2
            prj = (8.0 * (pi[j + 1] - pi[jm1]) - (pi[j + 2] - pi[jm2])) * inv12h
            if j == 0:
                frj = 0.0
                lapj = 2.0 * frrj
            else:
                lapj = frrj + frj / r[j]
            qj = frj * frj
            cj = 1.0 + 2.0 * pi[j] + qj
            dpi[j] = cj * lapj - 2.0 * frj * prj - qj * frrj
            c[j] = cj
            fr[j] = frj
    elif order == 2:
        inv2h = 1.0 / (2.0 * h)
        invh2 = 1.0 / (h * h)
        a = lo if lo > 1 else 1
        for j in range(a, hi):
            frj = (phi[j + 1] - phi[j - 1]) * inv2h
            frrj = (phi[j + 1] - 2.0 * phi[j] + phi[j - 1]) * invh2
            prj = (pi[j + 1] - pi[j - 1]) * inv2h
            lapj = frrj + frj / r[j]
            qj = frj * frj
            cj = 1.0 + 2.0 * pi[j] + qj
            dpi[j] = cj * lapj - 2.0 * frj * prj - qj * frrj
            c[j] = cj
            fr[j] = frj
        if lo == 0 and hi > 0:
            frrj = (phi[1] - 2.0 * phi[0] + phi[1]) * invh2
            lapj = 2.0 * frrj
            cj = 1.0 + 2.0 * pi[0]
            dpi[0] = cj * lapj
            c[0] = cj
            fr[0] = 0.0
    else:
        raise ValueError(f"unsupported stencil order {order}")


def rhs_axisym_gn(double[::1] phi, double[::1] pi, double[::1] r, double h,
                  Py_ssize_t lo, Py_ssize_t hi, int order, double coeff,
                  double[::1] dpi, double[::1] c, double[::1] fr):
    cdef Py_ssize_t j, jm1, jm2, a
    cdef double inv12h, inv12h2, inv2h, invh2, ta
    cdef double frj, frrj, lapj, chypj
    if hi <= lo:
        return
    ta = 3.0 * coeff
    if order == 4:
        inv12h = 1.0 / (12.0 * h)
        inv12h2 = 1.0 / (12.0 * h * h)
        a = lo if lo > 2 else 2
        for j in range(a, hi):
            frj = (8.0 * (phi[j + 1] - phi[j - 1]) - (phi[j + 2] - phi[j - 2])) * inv12h
            frrj = (16.0 * (phi[j + 1] + phi[j - 1]) - (phi[j + 2] + phi[j - 2])
                    - 30.0 * phi[j]) * inv12h2
            lapj = frrj + frj / r[j]
            chypj = 1.0 + ta * (pi[j] * pi[j])
            dpi[j] = lapj / chypj
            c[j] = chypj
            fr[j] = frj
        for j in range(lo, min(hi, 2)):
            jm1 = j - 1 if j >= 1 else 1 - j
            jm2 = j - 2 if j >= 2 else 2 - j
            frj = (8.0 * (phi[j + 1] - phi[jm1]) - (phi[j + 2] - phi[jm2])) * inv12h
            frrj = (16.0 * (phi[j + 1] + phi[jm1]) - (phi[j + 2] + phi[jm2])
                    - 30.0 * phi[j]) * inv12h2
            if j == 0:
                frj = 0.0
                lapj = 2.0 * frrj
            else:
                lapj = frrj + frj / r[j]
            chypj = 1.0 + ta * (pi[j] * pi[j])
            dpi[j] = lapj / chypj
            c[j] = chypj
            fr[j] = frj
    elif order == 2:
        inv2h = 1.0 / (2.0 * h)
        invh2 = 1.0 / (h * h)
        a = lo if lo > 1 else 1
        for j in range(a, hi):
            frj = (phi[j + 1] - phi[j - 1]) * inv2h
            frrj = (phi[j + 1] - 2.0 * phi[j] + phi[j - 1]) * invh2
            lapj = frrj + frj / r[j]
            chypj = 1.0 + ta * (pi[j] * pi[j])
            dpi[j] = lapj / chypj
            c[j] = chypj
            fr[j] = frj
        if lo == 0 and hi > 0:
            frrj = (phi[1] - 2.0 * phi[0] + phi[1]) * invh2
            lapj = 2.0 * frrj
            chypj = 1.0 + ta * (pi[0] * pi[0])
            dpi[0] = lapj / chypj
            c[0] = chypj
            fr[0] = 0.0
    else:
        raise ValueError(f"unsupported stencil order {order}")


def hj_axisym(double[::1] u, double[::1] adv, double[::1] spd, double h,
              Py_ssize_t lo, Py_ssize_t hi, double[::1] dudt,
              double ugod=INFINITY, double sig=0.0):
    cdef Py_ssize_t j, jm1, jm2, a, b, tt, n
    cdef double inv6h, invh, urj, pm, pp, hm, hp, pmed, hg, d6j
    if hi <= lo:
        return
    n = u.shape[0]
    inv6h = 1.0 / (6.0 * h)
    invh = 1.0 / h
    a = lo if lo > 2 else 2
    for j in range(a, hi):
        if u[j] >= ugod:
            pm = (u[j] - u[j - 1]) * invh
            pp = (u[j + 1] - u[j]) * invh
            if pm <= pp:
                hm = adv[j] * pm - spd[j] * fabs(pm)
                hp = adv[j] * pp - spd[j] * fabs(pp)
                hg = hm if hm <= hp else hp
            else:
                pmed = max(pp, 0.0)
                pmed = pm if pm <= pmed else pmed
                hg = adv[j] * pmed - spd[j] * fabs(pmed)
            dudt[j] = -hg
        else:
            urj = (2.0 * u[j + 1] + 3.0 * u[j] - 6.0 * u[j - 1]
                   + u[j - 2]) * inv6h
            dudt[j] = -adv[j] * urj + spd[j] * fabs(urj)
    # sixth-order damping, biased branch only (see the fallback docstring)
    if sig > 0.0:
        b = lo if lo > 3 else 3
        tt = hi if hi < n - 3 else n - 3
        for j in range(b, tt):
            if u[j] < ugod:
                d6j = (u[j + 3] - 6.0 * u[j + 2] + 15.0 * u[j + 1]
                       - 20.0 * u[j] + 15.0 * u[j - 1] - 6.0 * u[j - 2]
                       + u[j - 3])
                dudt[j] = dudt[j] - (sig / 64.0) * invh * d6j
    for j in range(lo, min(hi, 2)):
        jm1 = j - 1 if j >= 1 else 1 - j
        jm2 = j - 2 if j >= 2 else 2 - j
        if u[j] >= ugod:
            pm = (u[j] - u[jm1]) * invh
            pp = (u[j + 1] - u[j]) * invh
            if pm <= pp:
                hm = adv[j] * pm - spd[j] * fabs(pm)
                hp = adv[j] * pp - spd[j] * fabs(pp)
                hg = hm if hm <= hp else hp
            else:
                pmed = max(pp, 0.0)
                pmed = pm if pm <= pmed else pmed
                hg = adv[j] * pmed - spd[j] * fabs(pmed)
            dudt[j] = -hg
        else:
            urj = (2.0 * u[j + 1] + 3.0 * u[j] - 6.0 * u[jm1]
                   + u[jm2]) * inv6h
            dudt[j] = -adv[j] * urj + spd[j] * fabs(urj)


def rhs_cart2d(double[:, ::1] phi, double[:, ::1] pi, double h,
               Py_ssize_t y0, Py_ssize_t y1, Py_ssize_t x0, Py_ssize_t x1,
               int order,
               double[:, ::1] dpi, double[:, ::1] c,
               double[:, ::1] fx, double[:, ::1] fy):
    cdef Py_ssize_t j, i, i2, m
    cdef double inv12h, inv12h2, inv2h, invh2
    cdef double fxj, fyj, pxj, pyj, fxxj, fyyj, fxyj, lapj, qj, cj, advj, hessj
    cdef double[:, ::1] gy
    if y1 <= y0 or x1 <= x0:
        return
    m = x1 - x0
    if order == 4:
        inv12h = 1.0 / (12.0 * h)
        inv12h2 = 1.0 / (12.0 * h * h)
        gy = np.empty((y1 - y0, m + 4), dtype=np.float64)
        for j in range(y0, y1):
            for i2 in range(m + 4):
                i = x0 - 2 + i2
                gy[j - y0, i2] = (8.0 * (phi[j + 1, i] - phi[j - 1, i])
                                  - (phi[j + 2, i] - phi[j - 2, i])) * inv12h
        for j in range(y0, y1):
            for i in range(x0, x1):
                fxj = (8.0 * (phi[j, i + 1] - phi[j, i - 1])
                       - (phi[j, i + 2] - phi[j, i - 2])) * inv12h
                fyj = gy[j - y0, i - x0 + 2]
                pxj = (8.0 * (pi[j, i + 1] - pi[j, i - 1])
                       - (pi[j, i + 2] - pi[j, i - 2])) * inv12h
                pyj = (8.0 * (pi[j + 1, i] - pi[j - 1, i])
                       - (pi[j + 2, i] - pi[j - 2, i])) * inv12h
                fxxj = (16.0 * (phi[j, i + 1] + phi[j, i - 1])
                        - (phi[j, i + 2] + phi[j, i - 2])
                        - 30.0 * phi[j, i]) * inv12h2
                fyyj = (16.0 * (phi[j + 1, i] + phi[j - 1, i])
                        - (phi[j + 2, i] + phi[j - 2, i])
                        - 30.0 * phi[j, i]) * inv12h2
                fxyj = (8.0 * (gy[j - y0, i - x0 + 3] - gy[j - y0, i - x0 + 1])
                        - (gy[j - y0, i - x0 + 4] - gy[j - y0, i - x0])) * inv12h
                lapj = fxxj + fyyj
                qj = fxj * fxj + fyj * fyj
                cj = 1.0 + 2.0 * pi[j, i] + qj
                advj = fxj * pxj + fyj * pyj
                hessj = fxj * fxj * fxxj + 2.0 * fxj * fyj * fxyj + fyj * fyj * fyyj
                dpi[j, i] = cj * lapj - 2.0 * advj - hessj
                c[j, i] = cj
                fx[j, i] = fxj
                fy[j, i] = fyj
    elif order == 2:
        inv2h = 1.0 / (2.0 * h)
        invh2 = 1.0 / (h * h)
        gy = np.empty((y1 - y0, m + 2), dtype=np.float64)
        for j in range(y0, y1):
            for i2 in range(m + 2):
                i = x0 - 1 + i2
                gy[j - y0, i2] = (phi[j + 1, i] - phi[j - 1, i]) * inv2h
        for j in range(y0, y1):
            for i in range(x0, x1):
                fxj = (phi[j, i + 1] - phi[j, i - 1]) * inv2h
                fyj = gy[j - y0, i - x0 + 1]
                pxj = (pi[j, i + 1] - pi[j, i - 1]) * inv2h
                pyj = (pi[j + 1, i] - pi[j - 1, i]) * inv2h
                fxxj = (phi[j, i + 1] - 2.0 * phi[j, i] + phi[j, i - 1]) * invh2
                fyyj = (phi[j + 1, i] - 2.0 * phi[j, i] + phi[j - 1, i]) * invh2
                fxyj = (gy[j - y0, i - x0 + 2] - gy[j - y0, i - x0]) * inv2h
                lapj = fxxj + fyyj
                qj = fxj * fxj + fyj * fyj
                cj = 1.0 + 2.0 * pi[j, i] + qj
                advj = fxj * pxj + fyj * pyj
                hessj = fxj * fxj * fxxj + 2.0 * fxj * fyj * fxyj + fyj * fyj * fyyj
                dpi[j, i] = cj * lapj - 2.0 * advj - hessj
                c[j, i] = cj
                fx[j, i] = fxj
                fy[j, i] = fyj
    else:
        raise ValueError(f"unsupported stencil order {order}")
