"""Quadrature kernels: cumulative product integration against e^{i*theta*s}.

The running integrals Q_i = int_{t0}^{t0+i*h} g(s) e^{i*theta*s} ds are
computed by interpolating the envelope g with piecewise quadratics over node
pairs and integrating the oscillatory weight exactly (a Filon-type product
rule).  At theta = 0 the weights reduce identically to composite Simpson, so
the same routine serves slow integrands.  Envelope smoothness gives an O(h^4)
error bound with a constant independent of theta, which is what lets coarse
grids (a few dozen points per fast period) resolve Duhamel integrals of
rapidly oscillating drives.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "oscillatory_moments",
    "cumulative_oscillatory",
    "cumulative_simpson",
    "gauss_panel_rule",
]


def oscillatory_moments(theta, length, count=3):
    """Moments m_p = int_0^length sigma^p e^{i*theta*sigma} d*sigma, p < count.

    Closed forms by parts when |theta*length| >= 0.5; a quickly convergent
    power series below that, where the closed forms lose digits to
    cancellation.
    """
    X = float(length)
    theta = float(theta)
    th = theta * X
    out = np.zeros(count, dtype=complex)
    if abs(th) < 0.5:
        for p in range(count):
            term = 1.0 + 0j
            s = 0.0 + 0j
            for n in range(40):
                piece = term * X ** (n + p + 1) / (n + p + 1)
                s += piece
                if abs(piece) <= 1e-18 * abs(s):
                    break
                term *= 1j * theta / (n + 1)
            out[p] = s
        return out
    e = np.exp(1j * th)
    i_t = 1j * theta
    m = np.empty(count, dtype=complex)
    m[0] = (e - 1.0) / i_t
    for p in range(1, count):
        m[p] = (X ** p * e) / i_t - p * m[p - 1] / i_t
    return m


def _pair_weights(moments, h):
    """Weights for the quadratic through nodes (0, h, 2h) against the moments."""
    m0, m1, m2 = moments
    w0 = (m2 - 3.0 * h * m1 + 2.0 * h * h * m0) / (2.0 * h * h)
    w1 = (2.0 * h * m1 - m2) / (h * h)
    w2 = (m2 - h * m1) / (2.0 * h * h)
    return w0, w1, w2


def cumulative_oscillatory(values, h, theta, t0=0.0):
    """Running integrals of values * e^{i*theta*s} from t0 over a uniform grid.

    Parameters
    ----------
    values : (N+1,) array of envelope samples at t0 + i*h.
    h : positive step.
    theta : real phase rate (0 is allowed and exact for quadratics).
    t0 : grid origin; the phase factor e^{i*theta*s} uses absolute s.

    Returns
    -------
    (N+1,) complex array Q with Q[0] = 0.
    """
    g = np.asarray(values, dtype=complex)
    n = g.size - 1
    if n < 1:
        raise ValueError("need at least two samples")
    if h <= 0:
        raise ValueError("step must be positive")

    if n == 1:
        # single interval: linear envelope against the exact weight
        m0, m1 = oscillatory_moments(theta, h, count=2)
        q = np.exp(1j * theta * t0) * ((m0 - m1 / h) * g[0] + (m1 / h) * g[1])
        return np.array([0.0, q], dtype=complex)

    n_even = n if n % 2 == 0 else n - 1
    wf = _pair_weights(oscillatory_moments(theta, 2.0 * h), h)
    wh = _pair_weights(oscillatory_moments(theta, h), h)

    g0 = g[0:n_even - 1:2]
    g1 = g[1:n_even:2]
    g2 = g[2:n_even + 1:2]
    phase = np.exp(1j * theta * (t0 + h * np.arange(0, n_even - 1, 2)))
    full = phase * (wf[0] * g0 + wf[1] * g1 + wf[2] * g2)
    half = phase * (wh[0] * g0 + wh[1] * g1 + wh[2] * g2)

    Q = np.zeros(n + 1, dtype=complex)
    Q[2:n_even + 1:2] = np.cumsum(full)
    Q[1:n_even:2] = Q[0:n_even - 1:2] + half

    if n_even != n:
        # odd tail: integrate the quadratic through the last three nodes
        # over its second subinterval (full pair minus its first half)
        tail0 = t0 + (n - 2) * h
        ph = np.exp(1j * theta * tail0)
        gt = g[n - 2:n + 1]
        seg = ph * ((wf[0] - wh[0]) * gt[0] + (wf[1] - wh[1]) * gt[1]
                    + (wf[2] - wh[2]) * gt[2])
        Q[n] = Q[n - 1] + seg
    return Q


def cumulative_simpson(values, h):
    """Running integrals of a slow envelope (theta = 0 product rule)."""
    return cumulative_oscillatory(values, h, 0.0).real


def gauss_panel_rule(a, b, n_panels, q=16):
    """Composite Gauss-Legendre rule: q nodes on each of n_panels panels."""
    xg, wg = np.polynomial.legendre.leggauss(q)
    edges = np.linspace(float(a), float(b), n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights
