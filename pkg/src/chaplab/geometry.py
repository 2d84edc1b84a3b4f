"""Characteristic geometry of the outgoing acoustic cones.

The optical function u solves the eikonal equation for the flow-adapted
metric; its level sets are the outgoing sound cones. From a (phi, pi, u)
snapshot this module computes

    mu          inverse foliation density 1/(dt_u + grad phi . grad u)
    null frame  outgoing Lo = (1, Lo^i), transversal Ttil = grad phi - Lo
    tr lambda   expansion of the cones; tr_lambda_check = tr lambda - 1/rho
    check_L/T   error vectors against the flat frame x^i/rho
    residuals   eikonal (via time differences), null property, and the
                transport identity for mu along Lo

with rho = t - u throughout (the evolved u, never t - r). mu -> 0 is the
shock signal; for the degenerate gas it must stay near 1, and the
genuinely nonlinear control equation is expected to trip MuCollapse.

Everything here is diagnostic: nothing feeds back into the evolution.
"""

from dataclasses import dataclass

import numpy as np

from . import fd
from .errors import DegenerateEikonal, InvalidState, MuCollapse
from .solver import pde_rhs_arrays

MU_FLOOR = 1e-2       # mu at or below this is cone collapse
DEN_FLOOR = 1e-6      # 1/mu at or below this is a degenerate foliation


@dataclass
class OpticalField:
    """The optical function sampled on the solver grid at one instant.

    godunov_level: u-value above which the transport kernels switch to
    their monotone first-order flux (the plateau that forms over the
    cone tip lives there; all diagnostics stay well below it).

    dissipation: optional strength of sixth-order damping on the
    accurate branch, off by default. The fine structure that u picks up
    across the pulse is genuine (the transport coefficients vary on the
    profile's inner scale, about delta/6), so damping only blurs it;
    the knob exists for experiments with rougher data.
    """

    grid: object
    u: np.ndarray
    t: float
    godunov_level: float = np.inf
    dissipation: float = 0.0

    @classmethod
    def flat(cls, grid, t0):
        """u = t0 - r: level sets are the straight light cones through
        the data annulus; u = 0 sits at r = t0."""
        if grid.mode == "axisym":
            u = t0 - grid.r
        else:
            xx, yy = np.meshgrid(grid.x, grid.x, indexing="ij")
            u = t0 - np.hypot(xx, yy)
        return cls(grid=grid, u=u, t=float(t0))

    def reset_boundary(self, t):
        """Pin the outermost cells to the exact flat value; they sit
        beyond every stencil that ever reaches evolved data."""
        if self.grid.mode == "axisym":
            self.u[-1] = t - self.grid.r[-1]
        else:
            xx, yy = np.meshgrid(self.grid.x, self.grid.x, indexing="ij")
            rr = np.hypot(xx, yy)
            for sl in (np.s_[:2, :], np.s_[-2:, :],
                       np.s_[:, :2], np.s_[:, -2:]):
                self.u[sl] = t - rr[sl]

    def copy(self):
        return OpticalField(grid=self.grid, u=self.u.copy(), t=self.t,
                            godunov_level=self.godunov_level,
                            dissipation=self.dissipation)


def init_optical(state, params):
    """Optical field at the state's instant, u = t - r.

    Scenario policy starts geometry at t0 = 1 + 2*delta so that u = 0
    labels the cone leaving the outer edge of the data shell and the
    band 0 <= u <= 2*delta covers the pulse. Diagnostics use u <= 6*delta
    at most, so the monotone-flux switch goes at 8*delta (capped halfway
    to the tip value t0, where the plateau starts, for fat pulses).
    """
    uf = OpticalField.flat(state.grid, state.t)
    uf.godunov_level = min(8.0 * params.delta,
                           0.5 * (6.0 * params.delta + state.t))
    return uf


def radius_field(grid):
    if grid.mode == "axisym":
        return grid.r
    xx, yy = np.meshgrid(grid.x, grid.x, indexing="ij")
    return np.hypot(xx, yy)


def band_mask(ufield, params, u_lo=0.0, u_hi=None, r_min_cells=4):
    """Cells with u_lo <= u <= u_hi, clear of the cone tip.

    Default band is A_{2delta} = {0 <= u <= 2 delta}. The r-guard drops
    the few cells at the origin where the upwind stencil straddles the
    kink of u; for t >= 1 the band never comes near it anyway.
    """
    if u_hi is None:
        u_hi = 2.0 * params.delta
    r = radius_field(ufield.grid)
    return ((ufield.u >= u_lo) & (ufield.u <= u_hi)
            & (r >= r_min_cells * ufield.grid.h))


def _grad_u(ufield, order=4):
    """Plain interior differences: u has no parity at the origin (it is
    t - |x| there), so never reflect it."""
    if ufield.grid.mode == "axisym":
        return fd.d1_interior(ufield.u, ufield.grid.h, order=order)
    ux = fd.d1x(ufield.u, ufield.grid.h, order=order)
    uy = fd.d1y(ufield.u, ufield.grid.h, order=order)
    return ux, uy


@dataclass
class FrameFields:
    """Pointwise frame ingredients on the full grid (valid where c > 0
    and grad u is sane; consumers restrict to masks)."""

    mu: np.ndarray
    den: np.ndarray           # 1/mu = sqrt(c) |grad u|
    u_t: np.ndarray           # eikonal root: sqrt(D) - grad phi . grad u
    ell: object               # Lo^i: array (axisym: radial) or (Lx, Ly)
    ttil: object              # Ttil^i = d_i phi - Lo^i
    c: np.ndarray
    grad_phi: object
    grad_u: object
    F: np.ndarray


def frame_fields(state, ufield, order=4):
    """Everything pointwise the frame needs, from one snapshot.

    The eikonal discriminant simplifies exactly: with g^{00} = -1 the
    quadratic for dt_u gives D = (grad phi . grad u)^2
    + (c delta_ij - d_i phi d_j phi) d_i u d_j u = c |grad u|^2.
    """
    if state.mode == "axisym":
        F, c, fr = pde_rhs_arrays(state, order=order)
        u_r = _grad_u(ufield, order=order)
        den2 = c * u_r * u_r
        den = np.sqrt(np.maximum(den2, 0.0))
        adv = fr * u_r
        u_t = den - adv
        with np.errstate(divide="ignore"):
            mu = np.where(den > 0.0, 1.0 / np.maximum(den, 1e-300), np.inf)
        # divide by den rather than multiply by mu: on the plateau over
        # the cone tip grad u = 0 makes mu = inf while the numerator is
        # 0, and inf * 0 would poison ell with NaN
        den_safe = np.maximum(den, 1e-300)
        ell = (fr * u_t - (c - fr * fr) * u_r) / den_safe
        ttil = fr - ell
        return FrameFields(mu=mu, den=den, u_t=u_t, ell=ell, ttil=ttil,
                           c=c, grad_phi=fr, grad_u=u_r, F=F)
    F, c, fx, fy = pde_rhs_arrays(state, order=order)
    ux, uy = _grad_u(ufield, order=order)
    den2 = c * (ux * ux + uy * uy)
    den = np.sqrt(np.maximum(den2, 0.0))
    adv = fx * ux + fy * uy
    u_t = den - adv
    with np.errstate(divide="ignore"):
        mu = np.where(den > 0.0, 1.0 / np.maximum(den, 1e-300), np.inf)
    q11 = c - fx * fx
    q12 = -fx * fy
    q22 = c - fy * fy
    den_safe = np.maximum(den, 1e-300)
    Lx = (fx * u_t - (q11 * ux + q12 * uy)) / den_safe
    Ly = (fy * u_t - (q12 * ux + q22 * uy)) / den_safe
    return FrameFields(mu=mu, den=den, u_t=u_t, ell=(Lx, Ly),
                       ttil=(fx - Lx, fy - Ly), c=c,
                       grad_phi=(fx, fy), grad_u=(ux, uy), F=F)


def compute_mu(state, ufield, params, region=None, mu_floor=MU_FLOOR,
               den_floor=DEN_FLOOR, check=True, order=4):
    """mu = 1/(dt_u + grad phi . grad u) on the grid.

    When check is on, the guards run over `region` (default A_{2delta}):
    dt_u must stay positive, and MuCollapse fires either when mu falls
    to mu_floor (cones collapsing: the shock signal) or when 1/mu falls
    to den_floor (foliation degenerating the other way).
    """
    ff = frame_fields(state, ufield, order=order)
    if check:
        if region is None:
            region = band_mask(ufield, params)
        if np.any(region):
            r = radius_field(ufield.grid)
            sub_ut = np.where(region, ff.u_t, np.inf)
            j = np.unravel_index(int(np.argmin(sub_ut)), sub_ut.shape)
            if ff.u_t[j] <= 0.0:
                raise DegenerateEikonal(ufield.t, float(r[j]),
                                        detail=f"dt_u={ff.u_t[j]:.3e}")
            sub_den = np.where(region, ff.den, np.inf)
            j = np.unravel_index(int(np.argmin(sub_den)), sub_den.shape)
            if ff.den[j] <= den_floor:
                raise MuCollapse(ufield.t, float(r[j]), float(ff.mu[j]),
                                 reason="foliation density degenerate")
            sub_mu = np.where(region, ff.mu, np.inf)
            j = np.unravel_index(int(np.argmin(sub_mu)), sub_mu.shape)
            if ff.mu[j] <= mu_floor:
                raise MuCollapse(ufield.t, float(r[j]), float(ff.mu[j]))
    return ff.mu


def null_residuals(state, ff):
    """Pointwise residuals of the frame identities.

    g(Lo, Lo) = 0, g(Lo, Ttil) = -mu, and mu * Ttil(u) = 1; all three
    vanish identically in exact arithmetic, so their size measures the
    FD error of the frame construction.
    """
    c = ff.c
    if state.mode == "axisym":
        fr = ff.grad_phi
        ell = ff.ell
        gLL = (-1.0 + fr * fr / c) - 2.0 * fr * ell / c + ell * ell / c
        gLT = ff.ttil * (ell - fr) / c
        tu = ff.mu * ff.ttil * ff.grad_u
    else:
        fx, fy = ff.grad_phi
        Lx, Ly = ff.ell
        Tx, Ty = ff.ttil
        ux, uy = ff.grad_u
        g00 = -1.0 + (fx * fx + fy * fy) / c
        gLL = (g00 - 2.0 * (fx * Lx + fy * Ly) / c
               + (Lx * Lx + Ly * Ly) / c)
        gLT = (-(fx * Tx + fy * Ty) + (Lx * Tx + Ly * Ty)) / c
        tu = ff.mu * (Tx * ux + Ty * uy)
    return dict(null=np.abs(gLL), lt=np.abs(gLT + ff.mu),
                tu=np.abs(tu - 1.0))


def _lo_c_axisym(state, ff, order=4):
    """Lo(c) for c = 1 + 2 pi + phi_r^2 via the evolution equation."""
    h = state.grid.h
    pi_r = fd.d1_radial(state.pi, h, parity=1, order=order)
    phi_rr = fd.d2_radial(state.phi, h, parity=1, order=order)
    dtc = 2.0 * ff.F + 2.0 * ff.grad_phi * pi_r
    drc = 2.0 * pi_r + 2.0 * ff.grad_phi * phi_rr
    return dtc + ff.ell * drc, pi_r, phi_rr


def _metric_g_tensors(pi, fx, fy, c):
    """dg_{alpha beta}/dphi_gamma in closed form for the lowered metric
    g_00 = -1 + q/c, g_{0i} = -phi_i/c, g_{ij} = delta_ij/c with
    q = |grad phi|^2, c = 1 + 2 pi + q. Index order (t, x, y); returns
    G[gamma][alpha][beta] arrays."""
    q = fx * fx + fy * fy
    c2 = c * c
    f = (fx, fy)
    G = [[[None] * 3 for _ in range(3)] for _ in range(3)]
    # gamma = 0 (d/d pi): dc = 2
    G[0][0][0] = -2.0 * q / c2
    for i in (1, 2):
        G[0][0][i] = 2.0 * f[i - 1] / c2
        for jdx in (1, 2):
            G[0][i][jdx] = (-2.0 / c2) if i == jdx else np.zeros_like(c)
    # gamma = k (d/d phi_k): dc = dq = 2 phi_k
    for k in (1, 2):
        fk = f[k - 1]
        G[k][0][0] = 2.0 * fk * (1.0 + 2.0 * pi) / c2
        for i in (1, 2):
            delta = 1.0 if i == k else 0.0
            G[k][0][i] = (-delta * c + 2.0 * f[i - 1] * fk) / c2
            for jdx in (1, 2):
                dd = 1.0 if i == jdx else 0.0
                G[k][i][jdx] = -2.0 * fk * dd / c2
    # symmetrize the 0i entries
    for gdx in range(3):
        for i in range(3):
            for jdx in range(3):
                if G[gdx][i][jdx] is None:
                    G[gdx][i][jdx] = G[gdx][jdx][i]
    return G


def compute_trlambda(state, ufield, params, ff=None, order=4):
    """Expansion of the outgoing cones and its flat-value deviation.

    Axisymmetric mode uses the exact circle reduction: with the circle
    direction as the section tangent,

        tr lambda = ell / r - Lo(c) / (2c),

    which is the full Christoffel contraction collapsed analytically.
    The 2D mode does the contraction numerically with the closed-form
    metric derivative tensors. Returns a dict of arrays:
    tr_lambda, tr_lambda_check, rho, check_L, check_T, r_over_rho_minus_1.
    """
    if ff is None:
        ff = frame_fields(state, ufield, order=order)
    rho = ufield.t - ufield.u
    r = radius_field(state.grid)
    r_safe = np.where(r > 0, r, np.inf)
    rho_safe = np.where(np.abs(rho) > 1e-300, rho, np.inf)
    if state.mode == "axisym":
        lo_c, _, _ = _lo_c_axisym(state, ff, order=order)
        tr = ff.ell / r_safe - lo_c / (2.0 * ff.c)
        check_L = ff.ell - r / rho_safe
        check_T = ff.ttil + r / rho_safe
    else:
        h = state.grid.h
        fx, fy = ff.grad_phi
        Lx, Ly = ff.ell
        ux, uy = ff.grad_u
        px = fd.d1x(state.pi, h, order=order)
        py = fd.d1y(state.pi, h, order=order)
        fxx = fd.d1x(fx, h, order=order)
        fxy = fd.d1y(fx, h, order=order)
        fyy = fd.d1y(fy, h, order=order)
        # second-derivative tensor H[alpha][beta] = d_alpha d_beta phi
        H = [[ff.F, px, py], [px, fxx, fxy], [py, fxy, fyy]]
        G = _metric_g_tensors(state.pi, fx, fy, ff.c)

        def dg(alpha, beta, kappa):
            # d_alpha g_{beta kappa} = G^gamma_{beta kappa} d_alpha phi_gamma
            return (G[0][beta][kappa] * H[alpha][0]
                    + G[1][beta][kappa] * H[alpha][1]
                    + G[2][beta][kappa] * H[alpha][2])

        gu = np.hypot(ux, uy)
        gu_safe = np.where(gu > 0, gu, np.inf)
        X = (-uy / gu_safe, ux / gu_safe)          # unit circle tangent
        L = [np.ones_like(ff.c), Lx, Ly]
        dL = [[None, None, None], [None, None, None]]
        for idx, Lcomp in enumerate((Lx, Ly)):
            dL[0][idx] = fd.d1x(Lcomp, h, order=order)
            dL[1][idx] = fd.d1y(Lcomp, h, order=order)
        lam = np.zeros_like(ff.c)
        for i in (1, 2):          # spatial slot of X (coordinate index)
            for k in (1, 2):
                xi = X[i - 1]
                xk = X[k - 1]
                # g_{k gamma} d_i L^gamma: the gamma = 0 term drops
                # (L^0 = 1 is constant) and g_{kj} = delta_{kj}/c
                term = dL[i - 1][k - 1] / ff.c
                # lowered Christoffel Gamma_{k, i beta} L^beta
                chris = np.zeros_like(ff.c)
                for beta in range(3):
                    chris = chris + 0.5 * (dg(i, beta, k) + dg(beta, i, k)
                                           - dg(k, i, beta)) * L[beta]
                lam = lam + xi * xk * (term + chris)
        tr = ff.c * lam
        Tx, Ty = ff.ttil
        xx, yy = np.meshgrid(state.grid.x, state.grid.x, indexing="ij")
        check_L = (Lx - xx / rho_safe, Ly - yy / rho_safe)
        check_T = (Tx + xx / rho_safe, Ty + yy / rho_safe)
    tr_check = tr - 1.0 / rho_safe
    return dict(tr_lambda=tr, tr_lambda_check=tr_check, rho=rho,
                check_L=check_L, check_T=check_T,
                r_over_rho_minus_1=r / rho_safe - 1.0)


def error_vector_sup(diag, mask, mode="axisym"):
    """sup over the mask of |check_L| and |check_T| (vector norm in 2D)."""
    if not np.any(mask):
        return 0.0, 0.0
    if mode == "axisym":
        cl = np.abs(diag["check_L"])
        ct = np.abs(diag["check_T"])
    else:
        cl = np.hypot(*diag["check_L"])
        ct = np.hypot(*diag["check_T"])
    return float(np.max(cl[mask])), float(np.max(ct[mask]))


def _series_dt(series, t_at):
    """Time derivative from 2 or 3 consecutive snapshots [(t, field)].

    Snapshots must be solver-step spaced: the fields carry the pulse's
    inner scale (about delta/6), which sweeps past a grid cell in a few
    steps, so any coarser spacing aliases the time variation.
    """
    ts = [t for t, _ in series]
    fs = [f for _, f in series]
    if len(series) == 3:
        if abs(ts[1] - t_at) > 1e-9:
            raise InvalidState("3-snapshot series must center the state")
        return fd.time_deriv_3pt(fs[0], fs[1], fs[2], ts[0], ts[1], ts[2])
    if len(series) == 2:
        if min(abs(ts[0] - t_at), abs(ts[1] - t_at)) > 1e-9:
            raise InvalidState("2-snapshot series must touch the state")
        return (fs[1] - fs[0]) / (ts[1] - ts[0])
    raise InvalidState("series needs 2 or 3 consecutive snapshots")


def eikonal_residual(state, ufield, u_series, params, order=4):
    """sup over A_{2delta} of |D - (dt_u + grad phi . grad u)^2|.

    dt_u comes from u_series, a list of (t, u) at consecutive solver
    steps around state.t (2 entries one-sided, 3 centered); the spatial
    side is evaluated with centered differences independent of the
    upwinded update that produced u. Pointwise this is limited by how
    well centered stencils render the delta/6-scale structure inside
    the pulse, so treat it as a sanity indicator, not a convergence
    measurement.
    """
    u_t = _series_dt(u_series, ufield.t)
    ff = frame_fields(state, ufield, order=order)
    if state.mode == "axisym":
        adv = ff.grad_phi * ff.grad_u
        D = ff.c * ff.grad_u ** 2
    else:
        adv = (ff.grad_phi[0] * ff.grad_u[0]
               + ff.grad_phi[1] * ff.grad_u[1])
        D = ff.c * (ff.grad_u[0] ** 2 + ff.grad_u[1] ** 2)
    res = np.abs(D - (u_t + adv) ** 2)
    mask = band_mask(ufield, params)
    if not np.any(mask):
        return 0.0
    return float(np.max(res[mask]))


def mu_transport_residual(state, ufield, mu_series, params, order=4):
    """Residual of Lo(mu) = mu/c * (Lo^a Lo(phi_a) - Lo(c)) over the band.

    mu_series: list of (t, mu) at consecutive solver steps around
    state.t (2 entries one-sided, 3 centered); Lo(mu) is assembled as
    dt(mu) + ell * dr(mu) and the right side uses only state/ufield.

    Returns (sup, l2, terms). The two sides of Lo(mu) are individually
    large: mu oscillates a few percent on the pulse's inner scale, and
    that pattern rides the rays, so dt(mu) and ell*dr(mu) are each of
    size |mu'| * speed and cancel to the small right side. terms
    records each magnitude so the cancellation is visible; the residual
    is dominated by finite-difference error on the large terms and
    shrinks under (grid, dt) refinement, which is the actual check.
    """
    if state.mode != "axisym":
        raise InvalidState("transport residual is radial-only")
    grid = state.grid
    mu_t = _series_dt(mu_series, ufield.t)
    ff = frame_fields(state, ufield, order=order)
    mu_r = fd.d1_interior(ff.mu, grid.h, order=order)
    adv = ff.ell * mu_r
    lo_mu = mu_t + adv

    lo_c, pi_r, phi_rr = _lo_c_axisym(state, ff, order=order)
    lo_phi0 = ff.F + ff.ell * pi_r
    lo_phir = pi_r + ff.ell * phi_rr
    rhs = ff.mu / ff.c * (lo_phi0 + ff.ell * lo_phir - lo_c)
    res = lo_mu - rhs
    mask = band_mask(ufield, params)
    if not np.any(mask):
        return 0.0, 0.0, dict(mu_t=0.0, adv=0.0, rhs=0.0)
    sup = float(np.max(np.abs(res[mask])))
    l2 = float(np.sqrt(np.mean(res[mask] ** 2)))
    terms = dict(mu_t=float(np.max(np.abs(mu_t[mask]))),
                 adv=float(np.max(np.abs(adv[mask]))),
                 rhs=float(np.max(np.abs(rhs[mask]))))
    return sup, l2, terms


def mu_series_from_ctx(ctx, order=4):
    """(state_mid, ufield_mid, mu_series) from a monitor context; the
    context's three snapshots are consecutive solver steps."""
    state = ctx.state_at("mid")
    if "u" not in ctx.mid:
        raise InvalidState("monitor context has no optical field")
    series = []
    for which in ("prev", "mid", "next"):
        snap = getattr(ctx, which)
        st = ctx.state_at(which)
        uf = OpticalField(grid=state.grid, u=snap["u"], t=snap["t"])
        series.append((snap["t"], frame_fields(st, uf, order=order).mu))
    ufield = OpticalField(grid=state.grid, u=ctx.mid["u"], t=ctx.mid["t"])
    return state, ufield, series


def transport_coefficients(state, ufield, order=4):
    """(ell, f) with d mu/dt = mu * f along rays dr/dt = ell; used by the
    ray-transported cross-check of mu."""
    ff = frame_fields(state, ufield, order=order)
    lo_c, pi_r, phi_rr = _lo_c_axisym(state, ff, order=order)
    lo_phi0 = ff.F + ff.ell * pi_r
    lo_phir = pi_r + ff.ell * phi_rr
    f = (lo_phi0 + ff.ell * lo_phir - lo_c) / ff.c
    return ff.ell, f, ff.mu


def _interp4(rq, r0, h, f):
    """Cubic Catmull-Rom interpolation on the uniform grid r0 + j*h.

    The ray coefficients oscillate on a wavelength of a handful of
    cells; linear interpolation clips those swings by tens of percent
    and the bias accumulates along the ray, so cubic is load-bearing
    here, not polish.
    """
    x = (np.asarray(rq, dtype=float) - r0) / h
    j = np.clip(np.floor(x).astype(np.intp), 1, f.shape[0] - 3)
    s = x - j
    fm = f[j - 1]
    f0 = f[j]
    f1 = f[j + 1]
    f2 = f[j + 2]
    return f0 + 0.5 * s * (f1 - fm + s * (
        2.0 * fm - 5.0 * f0 + 4.0 * f1 - f2
        + s * (3.0 * (f0 - f1) + f2 - fm)))


class RaySet:
    """Characteristic rays r(t) with mu transported along them.

    Each ray keeps the optical value u0 of its seed cell (u is constant
    along Lo-rays, so the set is band bookkeeping for free). advance()
    marches through consecutive coefficient frames with RK4, cubic in r
    and linear in t (between solver steps the coefficients barely move:
    their oscillation pattern rides the rays themselves): an
    independent path to mu that shares no differencing with the direct
    formula.
    """

    def __init__(self, r0, u0, mu0):
        self.r = np.asarray(r0, dtype=float).copy()
        self.u0 = np.asarray(u0, dtype=float).copy()
        self.mu = np.asarray(mu0, dtype=float).copy()

    def advance(self, series_t, series_r, series_ell, series_f):
        """March rays through consecutive recorded coefficient frames
        (linear interpolation in t across each interval)."""
        rg0 = float(series_r[0])
        hg = float(series_r[1] - series_r[0])
        for k in range(len(series_t) - 1):
            t0, t1 = series_t[k], series_t[k + 1]

            def coeff(tq, rq):
                w = (tq - t0) / (t1 - t0)
                e0 = _interp4(rq, rg0, hg, series_ell[k])
                e1 = _interp4(rq, rg0, hg, series_ell[k + 1])
                f0 = _interp4(rq, rg0, hg, series_f[k])
                f1 = _interp4(rq, rg0, hg, series_f[k + 1])
                return ((1 - w) * e0 + w * e1), ((1 - w) * f0 + w * f1)

            self._rk4(coeff, t0, t1)

    def advance3(self, frames, series_r, ta, tb):
        """RK4 over [ta, tb] with the coefficients interpolated through
        three step frames [(t, ell, f)] quadratically in t.

        The coefficient pattern sweeps a grid cell in a couple of steps
        (omega*dt is order one), so linear-in-t sampling inside a step
        biases the stage values and the bias integrates coherently
        along the ray; one extra frame removes it.
        """
        (t0, e0, f0), (t1, e1, f1), (t2, e2, f2) = frames
        rg0 = float(series_r[0])
        hg = float(series_r[1] - series_r[0])

        def coeff(tq, rq):
            w0 = (tq - t1) * (tq - t2) / ((t0 - t1) * (t0 - t2))
            w1 = (tq - t0) * (tq - t2) / ((t1 - t0) * (t1 - t2))
            w2 = (tq - t0) * (tq - t1) / ((t2 - t0) * (t2 - t1))
            e = (w0 * _interp4(rq, rg0, hg, e0)
                 + w1 * _interp4(rq, rg0, hg, e1)
                 + w2 * _interp4(rq, rg0, hg, e2))
            f = (w0 * _interp4(rq, rg0, hg, f0)
                 + w1 * _interp4(rq, rg0, hg, f1)
                 + w2 * _interp4(rq, rg0, hg, f2))
            return e, f

        self._rk4(coeff, ta, tb)

    def _rk4(self, coeff, t0, t1):
        dt = t1 - t0
        r, mu = self.r, self.mu
        k1r, k1m = coeff(t0, r)
        k1m = mu * k1m
        k2r, k2m = coeff(t0 + dt / 2, r + dt / 2 * k1r)
        k2m = (mu + dt / 2 * k1m) * k2m
        k3r, k3m = coeff(t0 + dt / 2, r + dt / 2 * k2r)
        k3m = (mu + dt / 2 * k2m) * k3m
        k4r, k4m = coeff(t1, r + dt * k3r)
        k4m = (mu + dt * k3m) * k4m
        self.r = r + dt / 6 * (k1r + 2 * (k2r + k3r) + k4r)
        self.mu = mu + dt / 6 * (k1m + 2 * (k2m + k3m) + k4m)

    def compare_direct(self, series_r, mu_direct, u_lo, u_hi):
        """sup |mu_ray - mu_direct(r_ray)| over rays in the u0-band."""
        sel = (self.u0 >= u_lo) & (self.u0 <= u_hi)
        if not np.any(sel):
            return 0.0
        md = _interp4(self.r[sel], float(series_r[0]),
                      float(series_r[1] - series_r[0]), mu_direct)
        return float(np.max(np.abs(self.mu[sel] - md)))

    def level_set_drift(self, series_r, u_now, u_floor=None):
        """sup |u(r_ray) - u0|: how far rays have slipped off their level
        sets, the direct fidelity check on the integrated paths."""
        if u_floor is not None:
            sel = self.u0 >= u_floor
        else:
            sel = np.ones(self.r.shape, dtype=bool)
        if not np.any(sel):
            return 0.0
        ur = _interp4(self.r[sel], float(series_r[0]),
                      float(series_r[1] - series_r[0]), u_now)
        return float(np.max(np.abs(ur - self.u0[sel])))


class RayTracer:
    """Step-hook wrapper: seeds one ray per grid cell of the u-band on
    its first call and advances the set through every solver step with
    coefficients quadratic in t across three step frames (the rays run
    one interval behind the hook and compare()/drift() flush the tail).

    Pass as evolve(..., step_hook=tracer); afterwards tracer.compare()
    gives sup |mu_ray - mu_direct| over the rays still in [u_lo, u_hi].
    """

    def __init__(self, ufield, params, u_lo=0.0, u_hi=None, order=4):
        self.ufield = ufield
        self.params = params
        self.u_lo = u_lo
        self.u_hi = 2.0 * params.delta if u_hi is None else u_hi
        self.order = order
        self.rays = None
        self._frames = []
        self._t_done = None

    def __call__(self, state):
        ell, f, mu = transport_coefficients(state, self.ufield,
                                            order=self.order)
        grid = state.grid
        if self.rays is None:
            # seed a touch wide so edge rays bracket the band
            pad = 2.0 * self.params.delta
            sel = ((self.ufield.u >= self.u_lo - pad)
                   & (self.ufield.u <= self.u_hi + pad)
                   & (grid.r >= 4 * grid.h))
            self.rays = RaySet(grid.r[sel], self.ufield.u[sel], mu[sel])
            self._t_done = state.t
        self._frames.append((state.t, ell, f))
        if len(self._frames) > 3:
            self._frames.pop(0)
        if len(self._frames) == 3 and self._t_done < self._frames[1][0]:
            # integrate up to the middle frame now that it is bracketed
            self.rays.advance3(self._frames, grid.r,
                               self._t_done, self._frames[1][0])
            self._t_done = self._frames[1][0]
        self._mu_last = mu
        self._u_last = self.ufield.u.copy()
        self._r_last = grid.r

    def _flush(self):
        """Bring the rays up to the last hooked instant."""
        if self.rays is None or not self._frames:
            return
        t_last = self._frames[-1][0]
        if self._t_done >= t_last:
            return
        if len(self._frames) == 3:
            self.rays.advance3(self._frames, self._r_last,
                               self._t_done, t_last)
        elif len(self._frames) == 2:
            (t0, e0, f0), (t1, e1, f1) = self._frames
            self.rays.advance([t0, t1], self._r_last, [e0, e1], [f0, f1])
        self._t_done = t_last

    def compare(self):
        """sup |mu_ray - mu_direct| over the tracked band, at the last
        hooked instant."""
        self._flush()
        return self.rays.compare_direct(self._r_last, self._mu_last,
                                        self.u_lo, self.u_hi)

    def drift(self):
        """sup |u(r_ray) - u0| over the tracked band: path fidelity."""
        self._flush()
        sel = ((self.rays.u0 >= self.u_lo) & (self.rays.u0 <= self.u_hi))
        if not np.any(sel):
            return 0.0
        sub = RaySet(self.rays.r[sel], self.rays.u0[sel], self.rays.mu[sel])
        return sub.level_set_drift(self._r_last, self._u_last)


class GeometryMonitor:
    """Collects the geometry diagnostic series during evolve().

    Appends one row per monitor tick:
    (t, min_mu, max_abs_mu_minus_1, sup_trlambda_check_t32,
     sup_checkL_t12, eikonal_residual, null_residual)
    restricted to A_{2delta}; raises through compute_mu's guards so a
    collapse aborts the run with the diagnostic exception.
    """

    columns = ("t", "min_mu", "max_abs_mu_minus_1",
               "sup_trlambda_check_t32", "sup_checkL_t12",
               "eikonal_residual", "null_residual", "transport_residual")

    def __init__(self, params, path=None, order=4, mu_floor=MU_FLOOR):
        self.params = params
        self.path = path
        self.order = order
        self.mu_floor = mu_floor
        self.rows = []

    def fire(self, ctx):
        state = ctx.state_at("mid")
        ufield = OpticalField(grid=state.grid, u=ctx.mid["u"],
                              t=ctx.mid["t"])
        ff = frame_fields(state, ufield, order=self.order)
        mask = band_mask(ufield, self.params)
        # collapse guards (raise) plus the recorded diagnostics
        compute_mu(state, ufield, self.params, region=mask,
                   mu_floor=self.mu_floor, order=self.order)
        t = ufield.t
        diag = compute_trlambda(state, ufield, self.params, ff=ff,
                                order=self.order)
        res = null_residuals(state, ff)
        u_series = [(snap["t"], snap["u"])
                    for snap in (ctx.prev, ctx.mid, ctx.next)]
        eik = eikonal_residual(state, ufield, u_series, self.params,
                               order=self.order)
        if state.mode == "axisym":
            _, _, mu_series = mu_series_from_ctx(ctx, order=self.order)
            tres, _, _ = mu_transport_residual(state, ufield, mu_series,
                                               self.params,
                                               order=self.order)
        else:
            tres = float("nan")
        if np.any(mask):
            min_mu = float(np.min(ff.mu[mask]))
            dmu = float(np.max(np.abs(ff.mu[mask] - 1.0)))
            trc = float(np.max(np.abs(diag["tr_lambda_check"][mask])))
            cl, _ = error_vector_sup(diag, mask, state.mode)
            nullr = float(np.max(res["null"][mask]))
        else:
            min_mu, dmu, trc, cl, nullr = 1.0, 0.0, 0.0, 0.0, 0.0
        self.rows.append((t, min_mu, dmu, trc * t ** 1.5, cl * t ** 0.5,
                          eik, nullr, tres))

    def flush(self):
        if self.path is None:
            return
        from .report import write_csv
        write_csv(self.path, self.columns, self.rows)
