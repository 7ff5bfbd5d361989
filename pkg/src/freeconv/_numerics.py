"""Small numerical helpers shared across modules."""
from __future__ import annotations

import numpy as np


def height_schedule(y0: float, n: int) -> np.ndarray:
    """Geometric schedule ``y0 * 2**-k`` for ``k = 0..n-1``."""
    return y0 * 2.0 ** -np.arange(n)


def neville(heights, values, at=0.0):
    """Polynomial extrapolation of ``values(h)`` to ``h = at``.

    ``values`` may carry trailing axes; the first axis runs along ``heights``.
    """
    h = np.asarray(heights, dtype=float)
    p = np.array(values, dtype=complex if np.iscomplexobj(values) else float, copy=True)
    m = len(h)
    for j in range(1, m):
        for i in range(m - 1, j - 1, -1):
            num = (at - h[i - j]) * p[i] - (at - h[i]) * p[i - 1]
            p[i] = num / (h[i] - h[i - j])
    return p[m - 1]


def richardson(heights, values, terms: int = 3):
    """Extrapolate to zero height from the last ``terms`` samples.

    Returns ``(estimate, error)``, the error being the change against the same
    extrapolation shifted one sample towards larger heights.
    """
    heights = np.asarray(heights, dtype=float)
    values = np.asarray(values)
    est = neville(heights[-terms:], values[-terms:])
    if len(heights) > terms:
        prev = neville(heights[-terms - 1:-1], values[-terms - 1:-1])
        err = np.abs(est - prev)
    else:
        err = np.full(np.shape(est), np.inf)
    return est, err


def derivative(f, z, step: float = 1e-7):
    """Symmetric finite-difference derivative of an analytic ``f`` at ``z``."""
    z = np.asarray(z, dtype=complex)
    h = step * np.maximum(1.0, np.abs(z))
    return (f(z + h) - f(z - h)) / (2 * h)


def radial_log(f, z, anchor_log: complex, steps: int = 16):
    """Continuous logarithm of a nonvanishing ``f`` along the segment ``[0, z]``.

    ``anchor_log`` fixes the branch at the origin.
    """
    z = np.asarray(z, dtype=complex)
    r = np.linspace(0.0, 1.0, steps + 1)
    path = np.multiply.outer(r, z)
    vals = f(path)
    ang = np.unwrap(np.angle(vals), axis=0)
    ang = ang - ang[0] + np.imag(anchor_log)
    return np.log(np.abs(vals[-1])) + 1j * ang[-1]


def winding_number(f, radius: float = 0.99, n: int = 2048) -> int:
    """Number of zeros of ``f`` inside ``|z| < radius`` by the argument principle."""
    theta = np.linspace(0.0, 2 * np.pi, n + 1)
    vals = f(radius * np.exp(1j * theta))
    if np.any(vals == 0):
        return -1
    ang = np.unwrap(np.angle(vals))
    return int(round((ang[-1] - ang[0]) / (2 * np.pi)))
