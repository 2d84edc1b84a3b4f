"""Spatial grids and the evolved state container.

Two modes share one state type:

  * axisym: radial grid r_j = j*h on [0, r_max], fields are radial
    profiles, regularity at r = 0 imposed by even reflection
  * cart2d: square cell-centered-on-nodes grid covering
    [-L, L] x [-L, L], x_i = -L + i*h

The solution of the pulse problem is supported in {r <= t} exactly, so a
grid sized from t_end with a small margin contains the whole evolution;
if the support window ever approaches the boundary the caller raises
ResolutionError rather than polluting the run.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ResolutionError

# finest admissible mesh relative to the pulse width
POINTS_PER_DELTA = 12


@dataclass(frozen=True)
class RadialGrid:
    mode = "axisym"
    n: int
    h: float
    r: np.ndarray

    @property
    def r_max(self):
        return self.r[-1]


@dataclass(frozen=True)
class CartesianGrid:
    mode = "cart2d"
    n: int          # points per side
    h: float
    L: float        # half-width
    x: np.ndarray   # 1D coordinates, shared by both axes

    @property
    def r_max(self):
        return self.L


def make_radial_grid(delta, t_end, points_per_delta=POINTS_PER_DELTA,
                     margin=0.5):
    """Radial grid resolving the pulse width and containing the domain of
    influence of data supported in r <= 1 up to time t_end."""
    if points_per_delta < POINTS_PER_DELTA:
        raise ResolutionError(
            f"need at least {POINTS_PER_DELTA} points per delta, "
            f"got {points_per_delta}")
    h = delta / points_per_delta
    r_max = t_end + margin
    n = int(np.ceil(r_max / h)) + 1
    r = np.arange(n) * h
    return RadialGrid(n=n, h=h, r=r)


def make_cartesian_grid(delta, t_end, points_per_delta=POINTS_PER_DELTA,
                        margin=0.5):
    if points_per_delta < POINTS_PER_DELTA:
        raise ResolutionError(
            f"need at least {POINTS_PER_DELTA} points per delta, "
            f"got {points_per_delta}")
    h = delta / points_per_delta
    L = t_end + margin
    n_half = int(np.ceil(L / h))
    n = 2 * n_half + 1
    x = (np.arange(n) - n_half) * h
    return CartesianGrid(n=n, h=h, L=n_half * h, x=x)


@dataclass
class WaveState:
    """Potential and its time derivative at one instant.

    window marks the index range outside which both fields are exactly
    zero: (lo, hi) in axisym mode, (y0, y1, x0, x1) in cart2d mode. An
    empty window is stored as lo == hi.
    """

    t: float
    grid: object
    phi: np.ndarray
    pi: np.ndarray
    window: tuple

    def copy(self):
        return WaveState(t=self.t, grid=self.grid, phi=self.phi.copy(),
                         pi=self.pi.copy(), window=self.window)

    @property
    def mode(self):
        return self.grid.mode


def tighten_window(state, tol=None):
    """Shrink the support window to the numerically relevant extent of
    the fields.

    Nested RK stages spread machine-level crumbs a stencil reach per
    stage, far ahead of the physical wave, so the default threshold is
    relative: cells below 1e-13 of the field scale are treated as empty.
    They are frozen, not zeroed, and get re-read if the wave catches up.
    """
    if tol is None:
        scale = max(float(np.max(np.abs(state.phi))),
                    float(np.max(np.abs(state.pi))))
        tol = 1e-13 * scale
    mask = (np.abs(state.phi) > tol) | (np.abs(state.pi) > tol)
    if state.mode == "axisym":
        idx = np.nonzero(mask)[0]
        if idx.size == 0:
            state.window = (0, 0)
        else:
            state.window = (int(idx[0]), int(idx[-1]) + 1)
    else:
        rows = np.nonzero(mask.any(axis=1))[0]
        cols = np.nonzero(mask.any(axis=0))[0]
        if rows.size == 0:
            state.window = (0, 0, 0, 0)
        else:
            state.window = (int(rows[0]), int(rows[-1]) + 1,
                            int(cols[0]), int(cols[-1]) + 1)
    return state.window


def dilate_window(window, pad, n, mode):
    """Grow a window by pad cells, clamped to the array bounds."""
    if mode == "axisym":
        lo, hi = window
        if hi <= lo:
            return window
        return (max(lo - pad, 0), min(hi + pad, n))
    y0, y1, x0, x1 = window
    if y1 <= y0:
        return window
    return (max(y0 - pad, 0), min(y1 + pad, n),
            max(x0 - pad, 0), min(x1 + pad, n))
