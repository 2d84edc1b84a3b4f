"""Pointwise algebra of the irrotational Chaplygin flow.

Everything here acts on numbers or numpy arrays of first derivatives of
the velocity potential; no grids, no time stepping. The normalization
fixes the background sound speed to 1, which forces B = rho_bar^2.

Key quantities, writing phi_t for the time derivative and phi_i for the
spatial gradient:

    c   = 1 + 2*phi_t + |grad phi|^2      (squared sound speed in the
                                           Bernoulli-reduced variables)
    rho = rho_bar / sqrt(c),  sound speed = sqrt(c)

The acoustical metric and its exact inverse:

    g^00 = -1         g^0i = -phi_i       g^ij = c d_ij - phi_i phi_j
    g_00 = -1 + |grad phi|^2 / c
    g_0i = -phi_i / c                     g_ij = d_ij / c
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidState, NonHyperbolic


@dataclass(frozen=True)
class GasParams:
    """Equation-of-state and pulse-scale parameters.

    p(rho) = P0 - B / rho. The normalization c(rho_bar) = 1 requires
    B = rho_bar^2. delta is the pulse width, eps0 the shape exponent.
    """

    rho_bar: float = 1.0
    B: float = 1.0
    P0: float = 1.0
    delta: float = 0.05
    eps0: float = 0.125

    def __post_init__(self):
        if self.rho_bar <= 0.0:
            raise InvalidState(f"rho_bar must be positive, got {self.rho_bar}")
        if abs(self.B - self.rho_bar ** 2) > 1e-12 * max(1.0, self.B):
            raise InvalidState(
                f"normalization requires B = rho_bar^2, got B={self.B}, "
                f"rho_bar={self.rho_bar}")
        if not 0.0 < self.delta <= 0.25:
            raise InvalidState(f"delta must lie in (0, 1/4], got {self.delta}")
        if not 0.0 < self.eps0 <= 0.125:
            raise InvalidState(f"eps0 must lie in (0, 1/8], got {self.eps0}")

    def pressure(self, rho):
        return self.P0 - self.B / rho

    def sound_speed(self, rho):
        return np.sqrt(self.B) / rho


@dataclass(frozen=True)
class GradPhi:
    """First derivatives of the potential at a point (or arrays of them)."""

    dt_phi: object
    dx_phi: tuple  # (phi_1, phi_2)

    @property
    def grad_sq(self):
        return self.dx_phi[0] ** 2 + self.dx_phi[1] ** 2

    @property
    def c(self):
        return 1.0 + 2.0 * self.dt_phi + self.grad_sq


@dataclass(frozen=True)
class SpacetimeMetric:
    """Acoustical metric and inverse, stacked along the last two axes."""

    g_up: np.ndarray    # shape (..., 3, 3)
    g_down: np.ndarray  # shape (..., 3, 3)
    c: np.ndarray


def assemble_metric(grad):
    """Build the acoustical metric from first derivatives of phi.

    Raises NonHyperbolic if c = 1 + 2*phi_t + |grad phi|^2 is not
    positive somewhere.
    """
    p1 = np.asarray(grad.dx_phi[0], dtype=float)
    p2 = np.asarray(grad.dx_phi[1], dtype=float)
    pt = np.asarray(grad.dt_phi, dtype=float)
    c = 1.0 + 2.0 * pt + p1 * p1 + p2 * p2
    cmin = np.min(c)
    if cmin <= 0.0:
        idx = np.unravel_index(np.argmin(c), np.shape(c)) if np.ndim(c) else ()
        raise NonHyperbolic(float("nan"), idx, float(cmin))

    shape = np.broadcast(pt, p1, p2).shape
    g_up = np.empty(shape + (3, 3))
    g_up[..., 0, 0] = -1.0
    g_up[..., 0, 1] = g_up[..., 1, 0] = -p1
    g_up[..., 0, 2] = g_up[..., 2, 0] = -p2
    g_up[..., 1, 1] = c - p1 * p1
    g_up[..., 1, 2] = g_up[..., 2, 1] = -p1 * p2
    g_up[..., 2, 2] = c - p2 * p2

    gsq = p1 * p1 + p2 * p2
    g_down = np.empty(shape + (3, 3))
    g_down[..., 0, 0] = -1.0 + gsq / c
    g_down[..., 0, 1] = g_down[..., 1, 0] = -p1 / c
    g_down[..., 0, 2] = g_down[..., 2, 0] = -p2 / c
    g_down[..., 1, 1] = 1.0 / c
    g_down[..., 1, 2] = g_down[..., 2, 1] = 0.0
    g_down[..., 2, 2] = 1.0 / c
    return SpacetimeMetric(g_up=g_up, g_down=g_down, c=c)


def recover_primitive(grad, params):
    """Density, velocity, and sound speed from potential derivatives via
    the Bernoulli relation. Valid while c > 0."""
    c = np.asarray(grad.c, dtype=float)
    if np.min(c) <= 0.0:
        raise NonHyperbolic(float("nan"), (), float(np.min(c)))
    rho = params.rho_bar / np.sqrt(c)
    v = (np.asarray(grad.dx_phi[0], dtype=float),
         np.asarray(grad.dx_phi[1], dtype=float))
    return rho, v, params.sound_speed(rho)


class ChaplyginEos:
    """rho(p) and sound speed for p = P0 - B/rho."""

    def __init__(self, params):
        self.P0 = params.P0
        self.B = params.B

    def rho_of_p(self, p):
        denom = self.P0 - np.asarray(p, dtype=float)
        if np.min(denom) <= 0.0:
            raise InvalidState(
                f"pressure at or beyond vacuum value P0={self.P0}")
        return self.B / denom

    def sound_speed_of_p(self, p):
        return np.sqrt(self.B) / self.rho_of_p(p)


class PolytropicEos:
    """rho(p) and sound speed for p = K rho^2 (a genuinely nonlinear
    control law used by the degeneracy tests)."""

    def __init__(self, K=1.0):
        self.K = K

    def rho_of_p(self, p):
        p = np.asarray(p, dtype=float)
        if np.min(p) <= 0.0:
            raise InvalidState("polytropic law needs positive pressure")
        return np.sqrt(p / self.K)

    def sound_speed_of_p(self, p):
        # c^2 = dp/drho = 2 K rho
        return np.sqrt(2.0 * self.K * self.rho_of_p(p))


@dataclass(frozen=True)
class EigenSystem:
    """Wave speeds and right eigenvectors of the plane-wave symbol of the
    first-order (v1, v2, p) system in direction omega."""

    speeds: np.ndarray   # (lambda_1, lambda_2, lambda_3), slow/contact/fast
    rvecs: np.ndarray    # columns r_1, r_2, r_3
    omega: tuple
    rho: float
    sound: float


def euler_eigensystem(V, omega, params, eos=None):
    """Eigenstructure at state V = (v1, v2, p) in unit direction omega.

    lambda = (w.v - c, w.v, w.v + c), with right eigenvectors
    r1 = (w1, w2, -rho c), r2 = (-w2, w1, 0), r3 = (w1, w2, rho c).
    """
    v1, v2, p = float(V[0]), float(V[1]), float(V[2])
    w1, w2 = float(omega[0]), float(omega[1])
    nrm = np.hypot(w1, w2)
    if abs(nrm - 1.0) > 1e-12:
        raise InvalidState(f"omega must be a unit vector, |omega|={nrm}")
    if eos is None:
        eos = ChaplyginEos(params)
    rho = float(eos.rho_of_p(p))
    cs = float(eos.sound_speed_of_p(p))
    wv = w1 * v1 + w2 * v2
    speeds = np.array([wv - cs, wv, wv + cs])
    rvecs = np.array([
        [w1, -w2, w1],
        [w2, w1, w2],
        [-rho * cs, 0.0, rho * cs],
    ])
    return EigenSystem(speeds=speeds, rvecs=rvecs, omega=(w1, w2),
                       rho=rho, sound=cs)


def degeneracy_residual(V, omega, params, h=1e-4, eos=None):
    """|grad_V lambda_i . r_i| for the three wave families, by centered
    finite differences in the state with one Richardson level.

    Zero for every state and direction exactly when the system is
    totally linearly degenerate; the fast/slow entries are O(1) for a
    polytropic law.
    """
    V = np.asarray(V, dtype=float)
    sys0 = euler_eigensystem(V, omega, params, eos=eos)

    def grad_lambda(step):
        g = np.empty((3, 3))  # g[k, i] = d lambda_i / d V_k
        for k in range(3):
            dV = np.zeros(3)
            dV[k] = step
            lp = euler_eigensystem(V + dV, omega, params, eos=eos).speeds
            lm = euler_eigensystem(V - dV, omega, params, eos=eos).speeds
            g[k] = (lp - lm) / (2.0 * step)
        return g

    g_h = grad_lambda(h)
    g_h2 = grad_lambda(h / 2.0)
    g = (4.0 * g_h2 - g_h) / 3.0  # one Richardson level: O(h^4)
    dots = np.einsum("ki,ki->i", g, sys0.rvecs)
    return np.abs(dots)
