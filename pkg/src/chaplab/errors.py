"""Exception types raised by the laboratory.

Every abort path in the solvers and diagnostics maps to one of these, so
callers (and the CLI exit-code logic) can distinguish a physical abort
from a configuration or resolution problem.
"""


class ChaplabError(Exception):
    """Base class for all package errors."""


class NonHyperbolic(ChaplabError):
    """The coefficient c = 1 + 2*dt_phi + |grad phi|^2 (or its analogue
    for the control equation) dropped to zero or below: the evolution
    equation lost hyperbolicity."""

    def __init__(self, t, location, c_min):
        self.t = t
        self.location = location
        self.c_min = c_min
        super().__init__(
            f"hyperbolicity lost at t={t:.6g}, x={location} (c={c_min:.6g})"
        )


class MuCollapse(ChaplabError):
    """The inverse foliation density crossed its guard: either mu fell to
    the collapse floor (null cones compressing, the shock signature) or
    the defining denominator degenerated."""

    def __init__(self, t, location, mu_val, reason="mu reached floor"):
        self.t = t
        self.location = location
        self.mu_val = mu_val
        self.reason = reason
        super().__init__(
            f"{reason} at t={t:.6g}, x={location} (mu={mu_val:.6g})"
        )


class DegenerateEikonal(ChaplabError):
    """The quadratic form under the eikonal square root went negative, or
    the forward root dt_u > 0 was lost; the optical function can no
    longer be advanced."""

    def __init__(self, t, location, detail=""):
        self.t = t
        self.location = location
        super().__init__(
            f"eikonal root degenerate at t={t:.6g}, x={location} {detail}".rstrip()
        )


class ConcentrationReached(ChaplabError):
    """The 1D Lagrangian run reached the specific-volume floor: mass
    concentration (rho -> infinity) within the resolved tolerance."""

    def __init__(self, s, m_location, v_min):
        self.s = s
        self.m_location = m_location
        self.v_min = v_min
        super().__init__(
            f"specific volume reached floor at s={s:.6g}, m={m_location:.6g} "
            f"(V={v_min:.6g})"
        )


class ResolutionError(ChaplabError):
    """Grid too coarse for the requested pulse width, or the support of
    the solution reached the edge of the computational domain."""


class BadSupport(ChaplabError):
    """Initial pulse profile does not fit in the required s-interval."""


class InvalidState(ChaplabError):
    """A pointwise state is outside the physical regime (e.g. the
    pressure at or beyond the vacuum value, so rho <= 0)."""


class ConfigError(ChaplabError):
    """Malformed, unknown, or out-of-range configuration input."""

    def __init__(self, key, reason):
        self.key = key
        self.reason = reason
        super().__init__(f"config key '{key}': {reason}")
