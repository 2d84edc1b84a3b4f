"""Centered finite-difference helpers used by diagnostics.

The evolution kernels carry their own inlined stencils (see _kernels);
these array-level helpers serve the geometry and energy diagnostics,
where clarity wins over speed.

Radial fields are extended through r = 0 by parity (+1 for even fields
like phi and pi, -1 for their first derivatives) and by zero past the
outer end, which is valid for compactly supported fields that never
reach it.
"""

import numpy as np


def _ghosted(f, parity, pad):
    """Radial array with `pad` reflected ghosts on the left and zero
    ghosts on the right."""
    n = f.shape[0]
    g = np.zeros(n + 2 * pad)
    g[pad:pad + n] = f
    for k in range(1, pad + 1):
        g[pad - k] = parity * f[k]
    return g


def d1_radial(f, h, parity=1, order=4):
    """First derivative of a radial field with parity reflection at 0."""
    if order == 4:
        g = _ghosted(f, parity, 2)
        n = f.shape[0]
        return (8.0 * (g[3:3 + n] - g[1:1 + n]) - (g[4:4 + n] - g[0:n])) / (12.0 * h)
    if order == 2:
        g = _ghosted(f, parity, 1)
        n = f.shape[0]
        return (g[2:2 + n] - g[0:n]) / (2.0 * h)
    raise ValueError(f"unsupported order {order}")


def d2_radial(f, h, parity=1, order=4):
    if order == 4:
        g = _ghosted(f, parity, 2)
        n = f.shape[0]
        return (16.0 * (g[3:3 + n] + g[1:1 + n]) - (g[4:4 + n] + g[0:n])
                - 30.0 * f) / (12.0 * h * h)
    if order == 2:
        g = _ghosted(f, parity, 1)
        n = f.shape[0]
        return (g[2:2 + n] - 2.0 * f + g[0:n]) / (h * h)
    raise ValueError(f"unsupported order {order}")


def d3_radial(f, h, parity=1):
    """Third derivative, second-order stencil."""
    g = _ghosted(f, parity, 2)
    n = f.shape[0]
    return (g[4:4 + n] - 2.0 * g[3:3 + n] + 2.0 * g[1:1 + n] - g[0:n]) / (2.0 * h ** 3)


def d1_interior(f, h, order=4):
    """First derivative with no symmetry assumption: centered inside,
    second-order one-sided at the ends. For level-set-type fields."""
    n = f.shape[0]
    out = np.empty_like(f)
    if order == 4 and n >= 5:
        out[2:-2] = (8.0 * (f[3:-1] - f[1:-3]) - (f[4:] - f[:-4])) / (12.0 * h)
        out[1] = (f[2] - f[0]) / (2.0 * h)
        out[-2] = (f[-1] - f[-3]) / (2.0 * h)
    elif n >= 3:
        out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    else:
        raise ValueError("array too short")
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    return out


def d1x(f, h, order=4):
    """First derivative along the last axis, one-sided at the edges."""
    n = f.shape[-1]
    out = np.empty_like(f)
    if order == 4 and n >= 5:
        out[..., 2:-2] = (8.0 * (f[..., 3:-1] - f[..., 1:-3])
                          - (f[..., 4:] - f[..., :-4])) / (12.0 * h)
        out[..., 1] = (f[..., 2] - f[..., 0]) / (2.0 * h)
        out[..., -2] = (f[..., -1] - f[..., -3]) / (2.0 * h)
    elif n >= 3:
        out[..., 1:-1] = (f[..., 2:] - f[..., :-2]) / (2.0 * h)
    else:
        raise ValueError("array too short")
    out[..., 0] = (-3.0 * f[..., 0] + 4.0 * f[..., 1] - f[..., 2]) / (2.0 * h)
    out[..., -1] = (3.0 * f[..., -1] - 4.0 * f[..., -2] + f[..., -3]) / (2.0 * h)
    return out


def d1y(f, h, order=4):
    """First derivative along the first axis of a 2D field."""
    return np.swapaxes(d1x(np.swapaxes(f, 0, 1), h, order=order), 0, 1)


def time_deriv_3pt(f_prev, f_mid, f_next, t_prev, t_mid, t_next):
    """Second-order first time derivative at t_mid from three snapshots
    with possibly unequal spacing."""
    hm = t_mid - t_prev
    hp = t_next - t_mid
    return (hm * hm * f_next + (hp * hp - hm * hm) * f_mid
            - hp * hp * f_prev) / (hm * hp * (hm + hp))


def time_deriv2_3pt(f_prev, f_mid, f_next, t_prev, t_mid, t_next):
    """Second time derivative from three nearby snapshots."""
    hm = t_mid - t_prev
    hp = t_next - t_mid
    return 2.0 * (hp * f_prev - (hp + hm) * f_mid + hm * f_next) / (
        hm * hp * (hm + hp))
