"""Second-kind Volterra equations a(t) u(t) + int_0^t K(t,s) u(s) ds = g(t).

The marching scheme is the trapezoidal product rule: at node t_i the integral
uses trapezoid weights on the known values u_0..u_{i-1} and the diagonal
contribution (h/2) K(t_i,t_i) u_i moves into the multiplier, keeping the
update explicit.  Global accuracy is O(h^2) for smooth kernels.

The spectral trace kernel K(t,s) = -sum_m sqrt(lam_m) f_m(s) y_m(x0)
sin(sqrt(lam_m)(t-s)) vanishes on the diagonal and separates by the angle
addition formula, so the marching runs in O(N*M) with per-mode running sums
instead of the generic O(N^2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .basis import SeparableAmplitude
from .traces import TimeTrace

__all__ = ["VolterraKernel", "build_kernel", "solve_second_kind",
           "volterra_residual"]


@dataclass(eq=False)
class VolterraKernel:
    """Separable trace kernel with its spectral data."""

    lams: np.ndarray            # (M,)
    mode_weights: np.ndarray    # (M,) eigenfunctions at the observation point
    fm_traces: list             # per-mode amplitude traces f_m
    x0: object = None

    @property
    def M(self):
        return int(self.lams.size)

    def evaluate(self, t, s):
        """K(t, s) for scalar t and array s."""
        s = np.asarray(s, dtype=float)
        roots = np.sqrt(self.lams)
        out = np.zeros_like(s)
        for m in range(self.M):
            fs = self.fm_traces[m](s)
            out -= roots[m] * self.mode_weights[m] * fs \
                * np.sin(roots[m] * (float(t) - s))
        return out

    def __call__(self, t, s):
        return self.evaluate(t, s)


def build_kernel(basis, f, x0, grid=None, M=None):
    """Trace kernel of the slow-part equation at observation point x0.

    ``f`` is a SeparableAmplitude (needs ``grid`` for its mode traces) or a
    ready list of per-mode TimeTrace amplitudes.  A warning is issued when x0
    sits where every eigenfunction is negligible (e.g. on the boundary).
    """
    if isinstance(f, SeparableAmplitude):
        if grid is None:
            raise ValueError("grid required to realize amplitude mode traces")
        fm = f.mode_traces(basis, grid)
    else:
        fm = list(f)
    if M is not None:
        fm = fm[:M]
    M_eff = len(fm)
    x0a = np.atleast_1d(np.asarray(x0, dtype=float))
    pts = x0a.reshape(1, -1) if basis.dim > 1 else x0a[:1]
    wts = basis.eval_modes(pts).ravel()[:M_eff]
    if np.max(np.abs(wts)) < 1e-12:
        warnings.warn("all eigenfunctions vanish at the observation point; "
                      "the kernel and data carry no information", stacklevel=2)
    return VolterraKernel(basis.eigenvalues[:M_eff].copy(), wts, fm, x0=x0)


def _multiplier_values(a, grid):
    if isinstance(a, TimeTrace):
        return a.sample(grid)
    if callable(a):
        return np.asarray(a(grid), dtype=float)
    if np.ndim(a) == 0:
        return np.full(grid.size, float(a))
    vals = np.asarray(a, dtype=float)
    if vals.shape != grid.shape:
        raise ValueError("multiplier array does not match the grid")
    return vals


def solve_second_kind(a, K, g, grid=None):
    """March the product-trapezoid scheme; returns the solution trace.

    The multiplier must be uniformly nonzero: min |a| >= 1e-8 * max |a| is
    enforced, since the equation degenerates to first kind where a vanishes.
    """
    if isinstance(g, TimeTrace):
        grid = g.grid if grid is None else np.asarray(grid, dtype=float)
        gv = g.sample(grid)
    else:
        if grid is None:
            raise ValueError("grid required when g is a plain array")
        grid = np.asarray(grid, dtype=float)
        gv = np.asarray(g, dtype=float)
    av = _multiplier_values(a, grid)
    amax = float(np.max(np.abs(av)))
    if amax == 0.0 or float(np.min(np.abs(av))) < 1e-8 * amax:
        raise ValueError("multiplier a(t) vanishes (or nearly) on the grid; "
                         "the second-kind formulation degenerates")
    h = grid[1] - grid[0]
    n = grid.size
    u = np.empty(n)
    u[0] = gv[0] / av[0]

    if isinstance(K, VolterraKernel):
        roots = np.sqrt(K.lams)
        wf = roots * K.mode_weights
        fvals = np.vstack([tr.sample(grid) for tr in K.fm_traces])
        cos_s = np.cos(np.outer(roots, grid))
        sin_s = np.sin(np.outer(roots, grid))
        # running trapezoid sums of f_m(s) cos/sin(sqrt(lam_m) s) u(s)
        Sc = 0.5 * fvals[:, 0] * cos_s[:, 0] * u[0]
        Ss = 0.5 * fvals[:, 0] * sin_s[:, 0] * u[0]
        for i in range(1, n):
            # K(t_i,t_i) = 0, so the diagonal adds nothing to the multiplier
            integ = -h * float(wf @ (sin_s[:, i] * Sc - cos_s[:, i] * Ss))
            u[i] = (gv[i] - integ) / av[i]
            Sc += fvals[:, i] * cos_s[:, i] * u[i]
            Ss += fvals[:, i] * sin_s[:, i] * u[i]
        return TimeTrace(grid, u)

    if not callable(K):
        raise TypeError("kernel must be a VolterraKernel or a callable K(t, s)")
    for i in range(1, n):
        row = np.asarray(K(grid[i], grid[: i + 1]), dtype=float)
        acc = h * (0.5 * row[0] * u[0] + row[1:i] @ u[1:i])
        u[i] = (gv[i] - acc) / (av[i] + 0.5 * h * row[i])
    return TimeTrace(grid, u)


def volterra_residual(a, K, g, u):
    """Sup-norm residual of a candidate solution, with independent quadrature.

    The running integral is re-evaluated rowwise with Simpson weights, so the
    result measures the solution, not the marching rule.
    """
    grid = u.grid
    gv = g.sample(grid) if isinstance(g, TimeTrace) else np.asarray(g, float)
    av = _multiplier_values(a, grid)
    h = grid[1] - grid[0]
    uv = u.values
    res = np.empty(grid.size)
    res[0] = av[0] * uv[0] - gv[0]
    kernel = K.evaluate if isinstance(K, VolterraKernel) else K
    for i in range(1, grid.size):
        row = np.asarray(kernel(grid[i], grid[: i + 1]), dtype=float)
        prod = row * uv[: i + 1]
        if i == 1:
            integ = 0.5 * h * (prod[0] + prod[1])
        else:
            integ = simpson(prod, dx=h)
        res[i] = av[i] * uv[i] + integ - gv[i]
    return float(np.max(np.abs(res)))
