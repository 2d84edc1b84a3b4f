"""Method-of-lines evolution of the potential equation.

The second-order equation is written as a first-order system for
(phi, pi = dt phi) and stepped with classical RK4. Spatial stencils are
centered order 2 or 4 (see _kernels); radial mode imposes regularity at
the origin by even reflection.

Two equation kinds share the stepper:

  * "chaplygin": dt pi = c lap - 2 grad phi . grad pi - hess,
    c = 1 + 2 pi + |grad phi|^2 (hyperbolic while c > 0)
  * "control":   (1 + 3 a pi^2) dt pi = lap, a genuinely nonlinear
    quasilinear wave equation used as the contrast case

Fields are compactly supported and the stepper only works on a window a
few stencil widths beyond the support, so cost tracks the actual wave,
not the grid. Cells outside the window hold exact zeros throughout.

An optical (level-set) field u can be co-evolved inside the same RK4
stages by the transport law dt u = -adv . grad u + sqrt(D); see
geometry.py for its initialization and the derived diagnostics.
"""

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import NonHyperbolic, ResolutionError
from .grids import WaveState, dilate_window, tighten_window

_CKPT_MAGIC = b"CHLB0001"


@dataclass
class SolverConfig:
    t_end: float
    cfl: float = 0.35
    stencil_order: int = 4
    kind: str = "chaplygin"       # chaplygin | control
    control_coeff: float = 1.0
    backend: str = None           # None -> CHAPLAB_BACKEND / auto
    tighten_every: int = 1
    monitor_dt: float = 0.25
    dissipation: float = 0.0      # fourth-difference damping, 0 = off

    def stencil_radius(self):
        return 2 if self.stencil_order == 4 else 1

    def kernels(self):
        return _kernels.select(self.backend)


def pde_rhs_arrays(state, order=4, kind="chaplygin", coeff=1.0, kernels=None):
    """Full-grid evaluation of (dt pi, c, grad phi) for diagnostics.

    Returns (F, c, fr) in axisym mode and (F, c, fx, fy) in cart2d mode,
    with the exterior defaults F = 0, c = 1, gradients 0.
    """
    if kernels is None:
        kernels = _kernels.ACTIVE
    n = state.grid.n
    if state.mode == "axisym":
        F = np.zeros(n)
        c = np.ones(n)
        fr = np.zeros(n)
        if kind == "chaplygin":
            kernels.rhs_axisym(state.phi, state.pi, state.grid.r,
                               state.grid.h, 0, n - 2, order, F, c, fr)
        else:
            kernels.rhs_axisym_gn(state.phi, state.pi, state.grid.r,
                                  state.grid.h, 0, n - 2, order, coeff,
                                  F, c, fr)
        return F, c, fr
    F = np.zeros((n, n))
    c = np.ones((n, n))
    fx = np.zeros((n, n))
    fy = np.zeros((n, n))
    kernels.rhs_cart2d(state.phi, state.pi, state.grid.h,
                       2, n - 2, 2, n - 2, order, F, c, fx, fy)
    return F, c, fx, fy


class _Workspace:
    """Preallocated stage buffers for one grid shape.

    The k-buffers are kept exactly zero outside the kernel-filled window
    (the full-array RK4 combination relies on it), so they start as
    zeros and are re-zeroed whenever the window shrinks.
    """

    def __init__(self, shape, with_u):
        self.phi_s = np.empty(shape)
        self.pi_s = np.empty(shape)
        self.kq = [np.zeros(shape) for _ in range(4)]
        self.c = np.empty(shape)
        if len(shape) == 1:
            self.fr = np.empty(shape)
        else:
            self.fx = np.empty(shape)
            self.fy = np.empty(shape)
        if with_u:
            self.u_s = np.empty(shape)
            self.ku = [np.zeros(shape) for _ in range(4)]
            self.adv = np.zeros(shape)
            self.spd = np.ones(shape)
            if len(shape) == 2:
                self.adv2 = np.zeros(shape)
                self.a11 = np.ones(shape)
                self.a12 = np.zeros(shape)
                self.a22 = np.ones(shape)

    def rezero(self):
        for k in self.kq:
            k[:] = 0.0


def _raise_nonhyp(t, grid, c, window, mode):
    if mode == "axisym":
        lo, hi = window
        sl = c[lo:hi]
        j = int(np.argmin(sl)) + lo
        raise NonHyperbolic(t, (float(grid.r[j]),), float(sl.min()))
    y0, y1, x0, x1 = window
    sl = c[y0:y1, x0:x1]
    jy, jx = np.unravel_index(int(np.argmin(sl)), sl.shape)
    raise NonHyperbolic(t, (float(grid.x[x0 + jx]), float(grid.x[y0 + jy])),
                        float(sl.min()))


def max_signal_speed(state, config, kernels=None):
    """Largest characteristic speed on the current support: for the
    potential equation |grad phi| + sqrt(c); at most marginally above 1
    for the control equation."""
    out = pde_rhs_arrays(state, order=config.stencil_order, kind=config.kind,
                         coeff=config.control_coeff, kernels=kernels)
    c = out[1]
    if config.kind == "control":
        # characteristic speed is 1/sqrt(chyp), largest where chyp smallest
        cmin = float(np.min(c))
        if cmin <= 0.0:
            return float("inf")
        return max(1.0, 1.0 / np.sqrt(cmin))
    if state.mode == "axisym":
        spd = np.abs(out[2]) + np.sqrt(np.maximum(c, 0.0))
    else:
        spd = np.hypot(out[2], out[3]) + np.sqrt(np.maximum(c, 0.0))
    return float(np.max(spd))


def cfl_dt(state, config, smax=None, kernels=None):
    if smax is None:
        smax = max_signal_speed(state, config, kernels=kernels)
    if not np.isfinite(smax) or smax <= 0.0:
        smax = 1.0
    return config.cfl * state.grid.h / smax


@dataclass
class MonitorContext:
    """Three consecutive snapshots bracketing a monitor tick, plus the
    machinery needed to evaluate fields on them. Each snapshot is a dict
    with keys t, phi, pi and (when geometry is on) u."""

    prev: dict
    mid: dict
    next: dict
    state_mid: WaveState
    config: SolverConfig
    params: object
    kernels: object

    def state_at(self, which):
        """Rebuild the WaveState for one of the three snapshots."""
        snap = {"prev": self.prev, "mid": self.mid, "next": self.next}[which]
        return WaveState(t=snap["t"], grid=self.state_mid.grid,
                         phi=snap["phi"], pi=snap["pi"],
                         window=snap["window"])

    @property
    def t(self):
        return self.mid["t"]


def _snapshot(state, u):
    snap = {"t": state.t, "phi": state.phi.copy(), "pi": state.pi.copy(),
            "window": state.window}
    if u is not None:
        snap["u"] = u.copy()
    return snap


def evolve(state, config, params=None, ufield=None, monitors=(),
           on_abort_flush=True, step_hook=None):
    """Advance a WaveState (and optionally its optical field) to t_end.

    monitors: objects with attribute `cadence` (here: all fire on the
    shared config.monitor_dt grid) and method `fire(ctx)`. Monitor
    exceptions (MuCollapse etc.) propagate as aborts; when
    on_abort_flush is true, monitors with a `flush()` method get it
    called before the abort re-raises, so partial rows survive.

    step_hook: a callable (or sequence of callables) invoked as
    hook(state) once before the first step and after every accepted
    step; used by diagnostics that need per-step sampling (the
    characteristic-ray integrator).

    Returns the final state (ufield, when given, is advanced in place).
    """
    kernels = config.kernels()
    grid = state.grid
    n = grid.n
    sr = config.stencil_radius()
    mode = state.mode
    with_u = ufield is not None
    ws = _Workspace(state.phi.shape, with_u)
    u = ufield.u if with_u else None
    # level above which the HJ kernels switch to their monotone flux,
    # and the damping strength on the accurate branch
    ugod = getattr(ufield, "godunov_level", np.inf) if with_u else np.inf
    usig = getattr(ufield, "dissipation", 0.0) if with_u else 0.0

    hist = []
    next_tick = None
    if monitors:
        next_tick = state.t + config.monitor_dt
        hist.append(_snapshot(state, u))

    if config.dissipation > 0.0 and mode != "axisym":
        raise ResolutionError("fourth-difference damping is radial-only")

    def ko_damp(pi_a, out, window):
        """Kreiss-Oliger style fourth-difference damping of the evolved
        pi, even-reflected through the origin."""
        from .fd import _ghosted
        lo, hi = window
        g = _ghosted(pi_a, 1, 2)
        ko = (g[0:n] - 4.0 * g[1:n + 1] + 6.0 * g[2:n + 2]
              - 4.0 * g[3:n + 3] + g[4:n + 4])
        out[lo:hi] -= (config.dissipation / (16.0 * grid.h)) * ko[lo:hi]

    def rhs_stage(phi_a, pi_a, out, window, t_stage):
        """Fill out (= dt pi) on the window; also refresh ws.c and the
        gradient buffers there. Raises NonHyperbolic on c <= 0."""
        if mode == "axisym":
            lo, hi = window
            if hi > lo:
                if config.kind == "chaplygin":
                    kernels.rhs_axisym(phi_a, pi_a, grid.r, grid.h, lo, hi,
                                       config.stencil_order, out, ws.c, ws.fr)
                else:
                    kernels.rhs_axisym_gn(phi_a, pi_a, grid.r, grid.h, lo, hi,
                                          config.stencil_order,
                                          config.control_coeff,
                                          out, ws.c, ws.fr)
                cmin = float(np.min(ws.c[lo:hi]))
                if not np.isfinite(cmin) or cmin <= 0.0:
                    _raise_nonhyp(t_stage, grid, ws.c, window, mode)
                if config.dissipation > 0.0:
                    ko_damp(pi_a, out, window)
        else:
            y0, y1, x0, x1 = window
            if y1 > y0:
                kernels.rhs_cart2d(phi_a, pi_a, grid.h, y0, y1, x0, x1,
                                   config.stencil_order, out, ws.c,
                                   ws.fx, ws.fy)
                cmin = float(np.min(ws.c[y0:y1, x0:x1]))
                if not np.isfinite(cmin) or cmin <= 0.0:
                    _raise_nonhyp(t_stage, grid, ws.c, window, mode)

    def hj_stage(u_a, out, window):
        """Fill out (= dt u) using the advection/speed fields of the most
        recent rhs_stage call (exact defaults outside the window)."""
        if mode == "axisym":
            lo, hi = window
            ws.adv[:] = 0.0
            ws.spd[:] = 1.0
            if hi > lo:
                if config.kind == "chaplygin":
                    ws.adv[lo:hi] = ws.fr[lo:hi]
                    ws.spd[lo:hi] = np.sqrt(ws.c[lo:hi])
                else:
                    ws.spd[lo:hi] = 1.0 / np.sqrt(ws.c[lo:hi])
            kernels.hj_axisym(u_a, ws.adv, ws.spd, grid.h, 0, n - 1, out,
                              ugod, usig)
        else:
            y0, y1, x0, x1 = window
            ws.adv[:] = 0.0
            ws.adv2[:] = 0.0
            ws.a11[:] = 1.0
            ws.a12[:] = 0.0
            ws.a22[:] = 1.0
            if y1 > y0:
                box = (slice(y0, y1), slice(x0, x1))
                if config.kind == "chaplygin":
                    fxb = ws.fx[box]
                    fyb = ws.fy[box]
                    ws.adv[box] = fxb
                    ws.adv2[box] = fyb
                    ws.a11[box] = ws.c[box] - fxb * fxb
                    ws.a12[box] = -fxb * fyb
                    ws.a22[box] = ws.c[box] - fyb * fyb
                else:
                    inv = 1.0 / ws.c[box]
                    ws.a11[box] = inv
                    ws.a22[box] = inv
            kernels.hj_cart2d(u_a, ws.adv, ws.adv2, ws.a11, ws.a12, ws.a22,
                              grid.h, 2, n - 2, 2, n - 2, out, ugod, usig)

    def check_support_margin(window):
        limit = 3 * sr + 4
        if mode == "axisym":
            if window[1] > n - limit:
                raise ResolutionError(
                    f"support reached the outer boundary at t={state.t:.4g}; "
                    "enlarge the grid or shorten the run")
        else:
            y0, y1, x0, x1 = window
            if (y1 > n - limit or x1 > n - limit
                    or (y1 > y0 and (y0 < limit or x0 < limit))):
                raise ResolutionError(
                    f"support reached the domain boundary at t={state.t:.4g}")

    def window_speed(window):
        """Max characteristic speed using the freshly filled stage
        buffers; 1.0 covers the flat exterior where u still moves."""
        if mode == "axisym":
            lo, hi = window
            if hi <= lo:
                return 1.0
            if config.kind == "control":
                return max(1.0, 1.0 / np.sqrt(float(np.min(ws.c[lo:hi]))))
            spd = np.abs(ws.fr[lo:hi]) + np.sqrt(ws.c[lo:hi])
            return max(1.0, float(np.max(spd)))
        y0, y1, x0, x1 = window
        if y1 <= y0:
            return 1.0
        box = (slice(y0, y1), slice(x0, x1))
        spd = np.hypot(ws.fx[box], ws.fy[box]) + np.sqrt(ws.c[box])
        return max(1.0, float(np.max(spd)))

    pending_tick = None
    steps = 0
    if step_hook is None:
        hooks = ()
    elif callable(step_hook):
        hooks = (step_hook,)
    else:
        hooks = tuple(step_hook)
    for hook in hooks:
        hook(state)
    while state.t < config.t_end - 1e-12:
        # the window dilates a stencil reach per step, so shrink it back
        # to the true support regularly or it outruns the wave
        if steps % config.tighten_every == 0:
            tighten_window(state)
            ws.rezero()
        W = dilate_window(state.window, 4 * sr + 2, n, mode)
        check_support_margin(W)

        phi0, pi0 = state.phi, state.pi
        # stage 1 doubles as the CFL speed probe
        rhs_stage(phi0, pi0, ws.kq[0], W, state.t)
        if with_u:
            hj_stage(u, ws.ku[0], W)

        dt = config.cfl * grid.h / window_speed(W)
        # land exactly on monitor ticks and on t_end
        t_target = state.t + dt
        if next_tick is not None and t_target > next_tick - 1e-12:
            t_target = next_tick
        if t_target > config.t_end:
            t_target = config.t_end
        dt = t_target - state.t
        if dt <= 0.0:
            break
        half = 0.5 * dt
        # stage 2
        np.multiply(pi0, 1.0, out=ws.phi_s)
        ws.phi_s *= half
        ws.phi_s += phi0
        np.multiply(ws.kq[0], half, out=ws.pi_s)
        ws.pi_s += pi0
        rhs_stage(ws.phi_s, ws.pi_s, ws.kq[1], W, state.t + half)
        k2p = ws.pi_s.copy()
        if with_u:
            np.multiply(ws.ku[0], half, out=ws.u_s)
            ws.u_s += u
            hj_stage(ws.u_s, ws.ku[1], W)
        # stage 3
        np.multiply(k2p, half, out=ws.phi_s)
        ws.phi_s += phi0
        np.multiply(ws.kq[1], half, out=ws.pi_s)
        ws.pi_s += pi0
        rhs_stage(ws.phi_s, ws.pi_s, ws.kq[2], W, state.t + half)
        k3p = ws.pi_s.copy()
        if with_u:
            np.multiply(ws.ku[1], half, out=ws.u_s)
            ws.u_s += u
            hj_stage(ws.u_s, ws.ku[2], W)
        # stage 4
        np.multiply(k3p, dt, out=ws.phi_s)
        ws.phi_s += phi0
        np.multiply(ws.kq[2], dt, out=ws.pi_s)
        ws.pi_s += pi0
        rhs_stage(ws.phi_s, ws.pi_s, ws.kq[3], W, state.t + dt)
        k4p = ws.pi_s.copy()
        if with_u:
            np.multiply(ws.ku[2], dt, out=ws.u_s)
            ws.u_s += u
            hj_stage(ws.u_s, ws.ku[3], W)

        sixth = dt / 6.0
        # phi update: k-values for phi are pi0, k2p, k3p, k4p
        phi0 += sixth * (pi0 + 2.0 * (k2p + k3p) + k4p)
        pi0 += sixth * (ws.kq[0] + 2.0 * (ws.kq[1] + ws.kq[2]) + ws.kq[3])
        if with_u:
            u += sixth * (ws.ku[0] + 2.0 * (ws.ku[1] + ws.ku[2]) + ws.ku[3])

        state.t = float(t_target)
        state.window = W
        steps += 1
        if with_u:
            # outermost cells are beyond every stencil and stay flat
            if mode == "axisym":
                u[n - 1] = state.t - grid.r[n - 1]
            else:
                ufield.reset_boundary(state.t)
            ufield.t = state.t
        for hook in hooks:
            hook(state)

        if monitors:
            hist.append(_snapshot(state, u))
            if len(hist) > 3:
                hist.pop(0)
            if pending_tick is not None and len(hist) == 3 \
                    and abs(hist[1]["t"] - pending_tick) < 1e-12:
                ctx = MonitorContext(prev=hist[0], mid=hist[1], next=hist[2],
                                     state_mid=state, config=config,
                                     params=params, kernels=kernels)
                try:
                    for mon in monitors:
                        mon.fire(ctx)
                except Exception:
                    if on_abort_flush:
                        for mon in monitors:
                            flush = getattr(mon, "flush", None)
                            if flush:
                                flush()
                    raise
                pending_tick = None
            if next_tick is not None and abs(state.t - next_tick) < 1e-12:
                pending_tick = next_tick
                next_tick = next_tick + config.monitor_dt
                # a tick needs one more step to become the centered
                # snapshot, so stop scheduling near t_end
                if next_tick > config.t_end - 0.1 * config.monitor_dt:
                    next_tick = None

    return state


def save_checkpoint(path, state, extra_arrays=None, header_extra=None):
    """Binary snapshot: magic, uint64 header length, JSON header, then the
    raw C-order float64 arrays in header order."""
    arrays = {"phi": state.phi, "pi": state.pi}
    if extra_arrays:
        arrays.update(extra_arrays)
    grid = state.grid
    gdesc = {"mode": state.mode, "n": int(grid.n), "h": float(grid.h)}
    if state.mode == "cart2d":
        gdesc["L"] = float(grid.L)
    header = {
        "schema": 1,
        "t": float(state.t),
        "window": list(state.window),
        "grid": gdesc,
        "arrays": [{"name": k, "shape": list(v.shape)}
                   for k, v in arrays.items()],
    }
    if header_extra:
        header["extra"] = header_extra
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(_CKPT_MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for k in arrays:
            fh.write(np.ascontiguousarray(arrays[k], dtype=np.float64)
                     .tobytes())


def load_checkpoint(path):
    """Inverse of save_checkpoint: returns (WaveState, arrays, header)
    where arrays holds any extra fields saved alongside phi/pi."""
    from .grids import CartesianGrid, RadialGrid
    with open(path, "rb") as fh:
        magic = fh.read(len(_CKPT_MAGIC))
        if magic != _CKPT_MAGIC:
            raise ResolutionError(f"{path} is not a checkpoint file")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode())
        arrays = {}
        for desc in header["arrays"]:
            shape = tuple(desc["shape"])
            count = int(np.prod(shape))
            buf = fh.read(count * 8)
            arrays[desc["name"]] = np.frombuffer(
                buf, dtype=np.float64).reshape(shape).copy()
    g = header["grid"]
    if g["mode"] == "axisym":
        grid = RadialGrid(n=g["n"], h=g["h"], r=np.arange(g["n"]) * g["h"])
    else:
        n = g["n"]
        n_half = (n - 1) // 2
        grid = CartesianGrid(n=n, h=g["h"], L=g["L"],
                             x=(np.arange(n) - n_half) * g["h"])
    state = WaveState(t=header["t"], grid=grid, phi=arrays.pop("phi"),
                      pi=arrays.pop("pi"), window=tuple(header["window"]))
    return state, arrays, header
