"""Pure-numpy stencil kernels.

These are the reference implementations of the hot loops. The compiled
module `_stencil` mirrors every arithmetic expression here term for term
(and is built with -ffp-contract=off), so the two backends agree bitwise;
the parity test asserts exact equality.

Conventions shared by all kernels:
  * arrays are full-length C-contiguous float64; kernels fill the index
    window [lo, hi) of the output arrays and leave the rest untouched
  * radial kernels assume an even extension through r = 0, so ghost
    values at j < 0 are read as f[|j|]
  * the caller guarantees hi <= n - 2 so the widest stencil fits
"""

import numpy as np


def rhs_axisym(phi, pi, r, h, lo, hi, order, dpi, c, fr):
    """Second-order-in-time radial potential flow, written first order:
    d/dt phi = pi,  d/dt pi = c*lap - 2*fr*pr - q*frr
    with c = 1 + 2*pi + fr^2, q = fr^2, lap = frr + fr/r (2*frr at r=0).

    Fills dpi, c, fr on [lo, hi).
    """
    if hi <= lo:
        return
    a = max(lo, 2)
    if order == 4:
        inv12h = 1.0 / (12.0 * h)
        inv12h2 = 1.0 / (12.0 * h * h)
        if hi > a:
            s = slice(a, hi)
            fp1 = phi[a + 1:hi + 1]
            fm1 = phi[a - 1:hi - 1]
            fp2 = phi[a + 2:hi + 2]
            fm2 = phi[a - 2:hi - 2]
            frs = (8.0 * (fp1 - fm1) - (fp2 - fm2)) * inv12h
            frrs = (16.0 * (fp1 + fm1) - (fp2 + fm2) - 30.0 * phi[s]) * inv12h2
            prs = (8.0 * (pi[a + 1:hi + 1] - pi[a - 1:hi - 1])
                   - (pi[a + 2:hi + 2] - pi[a - 2:hi - 2])) * inv12h
            lap = frrs + frs / r[s]
            q = frs * frs
            cs = 1.0 + 2.0 * pi[s] + q
            dpi[s] = cs * lap - 2.0 * frs * prs - q * frrs
            c[s] = cs
            fr[s] = frs
        for j in range(lo, min(hi, 2)):
            jm1 = abs(j - 1)
            jm2 = abs(j - 2)
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
        a = max(lo, 1)
        if hi > a:
            s = slice(a, hi)
            fp1 = phi[a + 1:hi + 1]
            fm1 = phi[a - 1:hi - 1]
            frs = (fp1 - fm1) * inv2h
            frrs = (fp1 - 2.0 * phi[s] + fm1) * invh2
            prs = (pi[a + 1:hi + 1] - pi[a - 1:hi - 1]) * inv2h
            lap = frrs + frs / r[s]
            q = frs * frs
            cs = 1.0 + 2.0 * pi[s] + q
            dpi[s] = cs * lap - 2.0 * frs * prs - q * frrs
            c[s] = cs
            fr[s] = frs
        if lo == 0 and hi > 0:
            frr0 = (phi[1] - 2.0 * phi[0] + phi[1]) * invh2
            lap0 = 2.0 * frr0
            c0 = 1.0 + 2.0 * pi[0]
            dpi[0] = c0 * lap0
            c[0] = c0
            fr[0] = 0.0
    else:
        raise ValueError(f"unsupported stencil order {order}")


def rhs_axisym_gn(phi, pi, r, h, lo, hi, order, coeff, dpi, c, fr):
    """Radial control equation  (1 + 3*coeff*pi^2) d/dt pi = lap.

    The reported c is the hyperbolicity factor 1 + 3*coeff*pi^2.
    """
    if hi <= lo:
        return
    ta = 3.0 * coeff
    if order == 4:
        inv12h = 1.0 / (12.0 * h)
        inv12h2 = 1.0 / (12.0 * h * h)
        a = max(lo, 2)
        if hi > a:
            s = slice(a, hi)
            fp1 = phi[a + 1:hi + 1]
            fm1 = phi[a - 1:hi - 1]
            fp2 = phi[a + 2:hi + 2]
            fm2 = phi[a - 2:hi - 2]
            frs = (8.0 * (fp1 - fm1) - (fp2 - fm2)) * inv12h
            frrs = (16.0 * (fp1 + fm1) - (fp2 + fm2) - 30.0 * phi[s]) * inv12h2
            lap = frrs + frs / r[s]
            chyp = 1.0 + ta * (pi[s] * pi[s])
            dpi[s] = lap / chyp
            c[s] = chyp
            fr[s] = frs
        for j in range(lo, min(hi, 2)):
            jm1 = abs(j - 1)
            jm2 = abs(j - 2)
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
        a = max(lo, 1)
        if hi > a:
            s = slice(a, hi)
            fp1 = phi[a + 1:hi + 1]
            fm1 = phi[a - 1:hi - 1]
            frs = (fp1 - fm1) * inv2h
            frrs = (fp1 - 2.0 * phi[s] + fm1) * invh2
            lap = frrs + frs / r[s]
            chyp = 1.0 + ta * (pi[s] * pi[s])
            dpi[s] = lap / chyp
            c[s] = chyp
            fr[s] = frs
        if lo == 0 and hi > 0:
            frr0 = (phi[1] - 2.0 * phi[0] + phi[1]) * invh2
            lap0 = 2.0 * frr0
            chyp0 = 1.0 + ta * (pi[0] * pi[0])
            dpi[0] = lap0 / chyp0
            c[0] = chyp0
            fr[0] = 0.0
    else:
        raise ValueError(f"unsupported stencil order {order}")


def hj_axisym(u, adv, spd, h, lo, hi, dudt, ugod=np.inf, sig=0.0):
    """Level-set transport  d/dt u = -adv * u_r + spd * |u_r|
    with a third-order upwind-biased difference (information moves
    outward, so the stencil leans on j-2, j-1, j, j+1).

    Cells with u >= ugod instead use the exact first-order Godunov flux
    of H(p) = adv*p - spd*|p|. The level set u = ugod rides the same
    characteristics as u itself, so the switch line never drifts into
    the accurate region. This matters at the cone tip: the viscosity
    solution turns the initial kink of u into a plateau (the max of u
    cannot grow) whose edge is a concave kink moving outward forever,
    and the biased stencil is not monotone there.

    sig > 0 adds sixth-order dissipation -sig/(64h) * D6 u to the biased
    branch only. The biased stencil is dispersive, not dissipative, at
    grid scale, so slope wiggles rung up where the transport
    coefficients are barely resolved would otherwise ride along
    undamped; the damping acts at O(h^5) on smooth data, below the
    scheme's own truncation error.

    Fills dudt on [lo, hi); caller guarantees hi <= n - 1.
    """
    if hi <= lo:
        return
    n = u.shape[0]
    inv6h = 1.0 / (6.0 * h)
    invh = 1.0 / h
    a = max(lo, 2)
    if hi > a:
        s = slice(a, hi)
        ur = (2.0 * u[a + 1:hi + 1] + 3.0 * u[s]
              - 6.0 * u[a - 1:hi - 1] + u[a - 2:hi - 2]) * inv6h
        d3 = -adv[s] * ur + spd[s] * np.abs(ur)
        pm = (u[s] - u[a - 1:hi - 1]) * invh
        pp = (u[a + 1:hi + 1] - u[s]) * invh
        hm = adv[s] * pm - spd[s] * np.abs(pm)
        hp = adv[s] * pp - spd[s] * np.abs(pp)
        pmed = np.minimum(pm, np.maximum(pp, 0.0))
        hs = adv[s] * pmed - spd[s] * np.abs(pmed)
        hg = np.where(pm <= pp, np.minimum(hm, hp), hs)
        dudt[s] = np.where(u[s] >= ugod, -hg, d3)
    b = max(lo, 3)
    tt = min(hi, n - 3)
    if sig > 0.0 and tt > b:
        k = slice(b, tt)
        d6 = (u[b + 3:tt + 3] - 6.0 * u[b + 2:tt + 2]
              + 15.0 * u[b + 1:tt + 1] - 20.0 * u[k]
              + 15.0 * u[b - 1:tt - 1] - 6.0 * u[b - 2:tt - 2]
              + u[b - 3:tt - 3])
        dudt[k] = np.where(u[k] >= ugod, dudt[k],
                           dudt[k] - (sig / 64.0) * invh * d6)
    for j in range(lo, min(hi, 2)):
        jm1 = abs(j - 1)
        jm2 = abs(j - 2)
        if u[j] >= ugod:
            pmj = (u[j] - u[jm1]) * invh
            ppj = (u[j + 1] - u[j]) * invh
            if pmj <= ppj:
                hmj = adv[j] * pmj - spd[j] * abs(pmj)
                hpj = adv[j] * ppj - spd[j] * abs(ppj)
                hgj = hmj if hmj <= hpj else hpj
            else:
                pmedj = min(pmj, max(ppj, 0.0))
                hgj = adv[j] * pmedj - spd[j] * abs(pmedj)
            dudt[j] = -hgj
        else:
            urj = (2.0 * u[j + 1] + 3.0 * u[j] - 6.0 * u[jm1]
                   + u[jm2]) * inv6h
            dudt[j] = -adv[j] * urj + spd[j] * abs(urj)


def rhs_cart2d(phi, pi, h, y0, y1, x0, x1, order, dpi, c, fx, fy):
    """Planar potential flow:
    d/dt pi = c*lap - 2*(fx*px + fy*py) - hess
    with c = 1 + 2*pi + fx^2 + fy^2,
    hess = fx*fx*fxx + 2*fx*fy*fxy + fy*fy*fyy.

    Fills the box [y0:y1, x0:x1]; the caller guarantees the box sits at
    least 2 cells inside the array in every direction.
    """
    if y1 <= y0 or x1 <= x0:
        return
    ys = slice(y0, y1)
    xs = slice(x0, x1)
    if order == 4:
        inv12h = 1.0 / (12.0 * h)
        inv12h2 = 1.0 / (12.0 * h * h)

        def d1x(f):
            return (8.0 * (f[ys, x0 + 1:x1 + 1] - f[ys, x0 - 1:x1 - 1])
                    - (f[ys, x0 + 2:x1 + 2] - f[ys, x0 - 2:x1 - 2])) * inv12h

        def d1y(f):
            return (8.0 * (f[y0 + 1:y1 + 1, xs] - f[y0 - 1:y1 - 1, xs])
                    - (f[y0 + 2:y1 + 2, xs] - f[y0 - 2:y1 - 2, xs])) * inv12h

        fxs = d1x(phi)
        fys = d1y(phi)
        pxs = d1x(pi)
        pys = d1y(pi)
        fxx = (16.0 * (phi[ys, x0 + 1:x1 + 1] + phi[ys, x0 - 1:x1 - 1])
               - (phi[ys, x0 + 2:x1 + 2] + phi[ys, x0 - 2:x1 - 2])
               - 30.0 * phi[ys, xs]) * inv12h2
        fyy = (16.0 * (phi[y0 + 1:y1 + 1, xs] + phi[y0 - 1:y1 - 1, xs])
               - (phi[y0 + 2:y1 + 2, xs] + phi[y0 - 2:y1 - 2, xs])
               - 30.0 * phi[ys, xs]) * inv12h2
        # cross derivative: d/dx applied to a y-derivative computed on a
        # 2-cell halo, same two-pass order as the compiled kernel
        gy = (8.0 * (phi[y0 + 1:y1 + 1, x0 - 2:x1 + 2]
                     - phi[y0 - 1:y1 - 1, x0 - 2:x1 + 2])
              - (phi[y0 + 2:y1 + 2, x0 - 2:x1 + 2]
                 - phi[y0 - 2:y1 - 2, x0 - 2:x1 + 2])) * inv12h
        m = x1 - x0
        fxy = (8.0 * (gy[:, 3:3 + m] - gy[:, 1:1 + m])
               - (gy[:, 4:4 + m] - gy[:, 0:m])) * inv12h
    elif order == 2:
        inv2h = 1.0 / (2.0 * h)
        invh2 = 1.0 / (h * h)
        fxs = (phi[ys, x0 + 1:x1 + 1] - phi[ys, x0 - 1:x1 - 1]) * inv2h
        fys = (phi[y0 + 1:y1 + 1, xs] - phi[y0 - 1:y1 - 1, xs]) * inv2h
        pxs = (pi[ys, x0 + 1:x1 + 1] - pi[ys, x0 - 1:x1 - 1]) * inv2h
        pys = (pi[y0 + 1:y1 + 1, xs] - pi[y0 - 1:y1 - 1, xs]) * inv2h
        fxx = (phi[ys, x0 + 1:x1 + 1] - 2.0 * phi[ys, xs]
               + phi[ys, x0 - 1:x1 - 1]) * invh2
        fyy = (phi[y0 + 1:y1 + 1, xs] - 2.0 * phi[ys, xs]
               + phi[y0 - 1:y1 - 1, xs]) * invh2
        gy = (phi[y0 + 1:y1 + 1, x0 - 1:x1 + 1]
              - phi[y0 - 1:y1 - 1, x0 - 1:x1 + 1]) * inv2h
        m = x1 - x0
        fxy = (gy[:, 2:2 + m] - gy[:, 0:m]) * inv2h
    else:
        raise ValueError(f"unsupported stencil order {order}")

    lap = fxx + fyy
    q = fxs * fxs + fys * fys
    cs = 1.0 + 2.0 * pi[ys, xs] + q
    adv = fxs * pxs + fys * pys
    hess = fxs * fxs * fxx + 2.0 * fxs * fys * fxy + fys * fys * fyy
    dpi[ys, xs] = cs * lap - 2.0 * adv - hess
    c[ys, xs] = cs
    fx[ys, xs] = fxs
    fy[ys, xs] = fys


def hj_cart2d(u, adv1, adv2, a11, a12, a22, h, y0, y1, x0, x1, dudt,
              ugod=np.inf, sig=0.0):
    """Planar level-set transport
    d/dt u = -(adv1*ux + adv2*uy) + sqrt(max(D, 0)),
    D = (adv1*ux + adv2*uy)^2 + a11*ux^2 + 2*a12*ux*uy + a22*uy^2,
    with per-component upwind-biased differences chosen by the sign of
    the local ray velocity (estimated from a centered gradient).

    Cells with u >= ugod use a monotone first-order flux instead (axis
    Godunov magnitudes, diagonal quadratic form): the cone tip turns
    into a plateau with a persistent concave kink at its rim, where the
    biased stencil would oscillate; see hj_axisym. sig > 0 adds the
    same sixth-order damping as hj_axisym, one difference per axis,
    again on the biased branch only.

    Shared by both backends; fills the box [y0:y1, x0:x1]. The caller
    guarantees the box sits at least 2 cells inside the array.
    """
    if y1 <= y0 or x1 <= x0:
        return
    ys = slice(y0, y1)
    xs = slice(x0, x1)
    inv2h = 1.0 / (2.0 * h)
    inv6h = 1.0 / (6.0 * h)
    invh = 1.0 / h

    uc = u[ys, xs]
    uxp1 = u[ys, x0 + 1:x1 + 1]
    uxm1 = u[ys, x0 - 1:x1 - 1]
    uxp2 = u[ys, x0 + 2:x1 + 2]
    uxm2 = u[ys, x0 - 2:x1 - 2]
    uyp1 = u[y0 + 1:y1 + 1, xs]
    uym1 = u[y0 - 1:y1 - 1, xs]
    uyp2 = u[y0 + 2:y1 + 2, xs]
    uym2 = u[y0 - 2:y1 - 2, xs]

    ux_c = (uxp1 - uxm1) * inv2h
    uy_c = (uyp1 - uym1) * inv2h
    den_c = adv1[ys, xs] * ux_c + adv2[ys, xs] * uy_c
    d_c = (den_c * den_c + a11[ys, xs] * ux_c * ux_c
           + 2.0 * a12[ys, xs] * ux_c * uy_c + a22[ys, xs] * uy_c * uy_c)
    root = np.sqrt(np.maximum(d_c, 0.0))
    root_safe = np.where(root > 0.0, root, 1.0)
    # ray velocity dx/dt = adv - (quad-form gradient)/sqrt(D)
    v1 = adv1[ys, xs] - (den_c * adv1[ys, xs]
                         + a11[ys, xs] * ux_c + a12[ys, xs] * uy_c) / root_safe
    v2 = adv2[ys, xs] - (den_c * adv2[ys, xs]
                         + a12[ys, xs] * ux_c + a22[ys, xs] * uy_c) / root_safe
    # third-order biased one-sided differences in each direction
    ux_up = (2.0 * uxp1 + 3.0 * uc - 6.0 * uxm1 + uxm2) * inv6h
    ux_dn = -(2.0 * uxm1 + 3.0 * uc - 6.0 * uxp1 + uxp2) * inv6h
    uy_up = (2.0 * uyp1 + 3.0 * uc - 6.0 * uym1 + uym2) * inv6h
    uy_dn = -(2.0 * uym1 + 3.0 * uc - 6.0 * uyp1 + uyp2) * inv6h
    ux = np.where(v1 >= 0.0, ux_up, ux_dn)
    uy = np.where(v2 >= 0.0, uy_up, uy_dn)

    den = adv1[ys, xs] * ux + adv2[ys, xs] * uy
    d = (den * den + a11[ys, xs] * ux * ux
         + 2.0 * a12[ys, xs] * ux * uy + a22[ys, xs] * uy * uy)
    d3 = -den + np.sqrt(np.maximum(d, 0.0))

    # monotone plateau treatment where u >= ugod
    dmx = (uc - uxm1) * invh
    dpx = (uxp1 - uc) * invh
    dmy = (uc - uym1) * invh
    dpy = (uyp1 - uc) * invh
    uxa = np.where(adv1[ys, xs] >= 0.0, dmx, dpx)
    uya = np.where(adv2[ys, xs] >= 0.0, dmy, dpy)
    px = np.maximum(np.maximum(-dmx, dpx), 0.0)
    py = np.maximum(np.maximum(-dmy, dpy), 0.0)
    quad = a11[ys, xs] * px * px + a22[ys, xs] * py * py
    god = (-(adv1[ys, xs] * uxa + adv2[ys, xs] * uya)
           + np.sqrt(np.maximum(quad, 0.0)))
    dudt[ys, xs] = np.where(uc >= ugod, god, d3)

    if sig > 0.0:
        b0 = max(y0, 3)
        b1 = min(y1, u.shape[0] - 3)
        c0 = max(x0, 3)
        c1 = min(x1, u.shape[1] - 3)
        if b1 > b0 and c1 > c0:
            yk = slice(b0, b1)
            xk = slice(c0, c1)
            ukc = u[yk, xk]
            d6x = (u[yk, c0 + 3:c1 + 3] - 6.0 * u[yk, c0 + 2:c1 + 2]
                   + 15.0 * u[yk, c0 + 1:c1 + 1] - 20.0 * ukc
                   + 15.0 * u[yk, c0 - 1:c1 - 1] - 6.0 * u[yk, c0 - 2:c1 - 2]
                   + u[yk, c0 - 3:c1 - 3])
            d6y = (u[b0 + 3:b1 + 3, xk] - 6.0 * u[b0 + 2:b1 + 2, xk]
                   + 15.0 * u[b0 + 1:b1 + 1, xk] - 20.0 * ukc
                   + 15.0 * u[b0 - 1:b1 - 1, xk] - 6.0 * u[b0 - 2:b1 - 2, xk]
                   + u[b0 - 3:b1 - 3, xk])
            dk = dudt[yk, xk]
            dudt[yk, xk] = np.where(
                ukc >= ugod, dk,
                dk - (sig / 64.0) * invh * (d6x + d6y))
