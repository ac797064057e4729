"""Rapidly oscillating drives r(t, tau) split into slow mean and fast remainder.

The fast remainder is a zero-mean trigonometric polynomial in the phase tau
with time-dependent coefficients.  That structure is closed under every
operation the solvers need: phase derivatives, slow-time derivatives,
zero-mean antiderivatives in tau, and division by a time trace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy
from sympy.simplify.fu import TR8

from . import expressions
from .expressions import T, TAU
from .traces import TimeTrace

__all__ = [
    "FastProfile", "OscillatorySource",
    "tau_mean", "split_source", "rho0", "rho1",
    "corner_values", "corner_values_from_rho0",
]

_TWO_PI = 2.0 * np.pi


@dataclass(eq=False)
class FastProfile:
    """Zero-tau-mean trig polynomial sum_k a_k(t) cos(k tau) + b_k(t) sin(k tau)."""

    terms: list            # of (k: int, kind: "cos"|"sin", coeff: TimeTrace)
    grid: np.ndarray

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        norm = {}
        order = []
        for k, kind, coeff in self.terms:
            k = int(k)
            if k < 1:
                raise ValueError("harmonic indices start at 1")
            if kind not in ("cos", "sin"):
                raise ValueError(f"unknown term kind {kind!r}")
            key = (k, kind)
            if key in norm:
                norm[key] = norm[key] + coeff
            else:
                norm[key] = coeff
                order.append(key)
        order.sort()
        self.terms = [(k, kind, norm[(k, kind)]) for k, kind in order]

    @classmethod
    def from_specs(cls, specs, grid):
        """Build from (harmonic, kind, coefficient expression/number) triples."""
        terms = []
        for k, kind, coeff in specs:
            if isinstance(coeff, TimeTrace):
                tr = coeff
            elif isinstance(coeff, (int, float)):
                tr = TimeTrace.constant(float(coeff), grid)
            else:
                tr = TimeTrace.from_expr(coeff, grid)
            terms.append((int(k), kind, tr))
        return cls(terms, grid)

    @classmethod
    def zero(cls, grid):
        return cls([], grid)

    @property
    def max_harmonic(self):
        return max((k for k, _, _ in self.terms), default=0)

    @property
    def max_abs(self):
        return max((c.max_abs for _, _, c in self.terms), default=0.0)

    def is_negligible(self, rel=1e-13, scale=1.0):
        return self.max_abs <= rel * max(scale, 1.0)

    # -- evaluation -----------------------------------------------------

    def evaluate(self, t, tau):
        """Pointwise values; t and tau broadcast together."""
        t = np.asarray(t, dtype=float)
        tau = np.asarray(tau, dtype=float)
        out = np.zeros(np.broadcast_shapes(t.shape, tau.shape))
        for k, kind, coeff in self.terms:
            osc = np.cos(k * tau) if kind == "cos" else np.sin(k * tau)
            out = out + coeff(t) * osc
        return float(out) if out.ndim == 0 else out

    def coefficient(self, k, kind):
        for kk, kd, c in self.terms:
            if kk == k and kd == kind:
                return c
        return TimeTrace.constant(0.0, self.grid)

    # -- calculus in the fast phase --------------------------------------

    def tau_derivative(self, order=1):
        terms = self.terms
        for _ in range(order):
            nxt = []
            for k, kind, c in terms:
                if kind == "cos":
                    nxt.append((k, "sin", c * (-float(k))))
                else:
                    nxt.append((k, "cos", c * float(k)))
            terms = nxt
        return FastProfile(terms, self.grid)

    def tau_antiderivative_zero_mean(self, order=1):
        """Antiderivative in tau with the constant fixed by zero tau-mean."""
        terms = self.terms
        for _ in range(order):
            nxt = []
            for k, kind, c in terms:
                if kind == "cos":
                    nxt.append((k, "sin", c * (1.0 / k)))
                else:
                    nxt.append((k, "cos", c * (-1.0 / k)))
            terms = nxt
        return FastProfile(terms, self.grid)

    def t_derivative(self, order=1):
        return FastProfile([(k, kind, c.derivative(order))
                            for k, kind, c in self.terms], self.grid)

    def corner(self, t_order=0):
        """d^t_order/dt^t_order of the profile at (t=grid[0], tau=0)."""
        return sum((c.value_at_start(t_order) for k, kind, c in self.terms
                    if kind == "cos"), 0.0)

    # -- algebra ----------------------------------------------------------

    def scaled(self, factor):
        """Multiply every coefficient by a scalar or a TimeTrace."""
        return FastProfile([(k, kind, c * factor) for k, kind, c in self.terms],
                           self.grid)

    def divided_by(self, trace):
        return FastProfile([(k, kind, c / trace) for k, kind, c in self.terms],
                           self.grid)

    def __add__(self, other):
        if not isinstance(other, FastProfile):
            return NotImplemented
        return FastProfile(self.terms + other.terms, self.grid)

    def __neg__(self):
        return self.scaled(-1.0)

    def __sub__(self, other):
        if not isinstance(other, FastProfile):
            return NotImplemented
        return self + (-other)

    def resample(self, grid2):
        return FastProfile([(k, kind, c.resample(grid2))
                            for k, kind, c in self.terms], np.asarray(grid2, float))


@dataclass(eq=False)
class OscillatorySource:
    """Drive r(t, tau) = r0(t) + r1(t, tau) with r1 of zero tau-mean."""

    r0: TimeTrace
    r1: FastProfile

    def evaluate(self, t, tau):
        return self.r0(t) + self.r1.evaluate(t, tau)

    @property
    def grid(self):
        return self.r0.grid

    def resample(self, grid2):
        return OscillatorySource(self.r0.resample(grid2), self.r1.resample(grid2))


def tau_mean(obj, t=0.0, n_tau=256):
    """Average over one fast period at fixed slow time.

    FastProfile means vanish structurally; sympy expressions are integrated
    exactly; callables are sampled on n_tau equispaced phases (exact for trig
    polynomials below the aliasing limit).
    """
    if isinstance(obj, FastProfile):
        return 0.0
    if isinstance(obj, OscillatorySource):
        return float(obj.r0(t))
    if isinstance(obj, (str, sympy.Expr)):
        e = expressions.parse(obj, allowed=(T, TAU))
        mean = sympy.integrate(e, (TAU, 0, 2 * sympy.pi)) / (2 * sympy.pi)
        mean = sympy.simplify(mean)
        if mean.free_symbols:
            return float(mean.subs(T, t))
        return float(mean)
    taus = _TWO_PI * np.arange(n_tau) / n_tau
    vals = np.asarray([obj(t, tv) for tv in taus], dtype=float)
    return float(vals.mean())


def _extract_trig_terms(expr):
    """Termwise (k, kind, envelope-in-t) extraction of a zero-mean trig poly."""
    expr = sympy.expand(TR8(sympy.expand_trig(sympy.expand(expr))))
    out = []
    for term in sympy.Add.make_args(expr):
        if TAU not in term.free_symbols:
            if sympy.simplify(term) != 0:
                raise ValueError(f"leftover tau-free term {term} in the fast part")
            continue
        trig = None
        env = sympy.Integer(1)
        for fac in sympy.Mul.make_args(term):
            if TAU in fac.free_symbols:
                if trig is not None:
                    raise ValueError(f"cannot reduce {term} to a single "
                                     "harmonic; use the structured term list")
                trig = fac
            else:
                env = env * fac
        if not isinstance(trig, (sympy.sin, sympy.cos)):
            raise ValueError(f"fast factor {trig} is not a pure harmonic")
        ratio = sympy.simplify(trig.args[0] / TAU)
        if not (ratio.is_number and ratio.is_integer):
            raise ValueError(f"non-integer harmonic in {trig}; the drive must "
                             "be 2*pi-periodic in the fast phase")
        k = int(ratio)
        kind = "cos" if isinstance(trig, sympy.cos) else "sin"
        if k < 0:
            k = -k
            if kind == "sin":
                env = -env
        out.append((k, kind, env))
    return out


def split_source(r, grid, n_tau=256):
    """Split a drive r(t, tau) into slow mean r0(t) and fast remainder r1.

    Accepts an OscillatorySource (returned as is), an expression in t and tau,
    or a callable r(t, tau); callables are resolved with an n_tau-point
    discrete Fourier transform along the phase and must be 2*pi-periodic.
    """
    grid = np.asarray(grid, dtype=float)
    if isinstance(r, OscillatorySource):
        return r
    if isinstance(r, (str, sympy.Expr)):
        e = expressions.parse(r, allowed=(T, TAU))
        mean = sympy.simplify(sympy.integrate(e, (TAU, 0, 2 * sympy.pi))
                              / (2 * sympy.pi))
        r0 = TimeTrace.from_expr(mean, grid)
        fast = sympy.expand(e - mean)
        terms = [(k, kind, TimeTrace.from_expr(env, grid))
                 for k, kind, env in _extract_trig_terms(fast)]
        return OscillatorySource(r0, FastProfile(terms, grid))

    if not callable(r):
        raise TypeError("drive must be a source, an expression, or a callable")
    taus = _TWO_PI * np.arange(n_tau) / n_tau
    samples = np.empty((grid.size, n_tau))
    for j, tv in enumerate(taus):
        samples[:, j] = [r(tv_t, tv) for tv_t in grid]
    scale = max(1.0, float(np.max(np.abs(samples))))
    wrap = np.asarray([r(tv_t, _TWO_PI) - r(tv_t, 0.0) for tv_t in grid])
    if np.max(np.abs(wrap)) > 1e-9 * scale:
        raise ValueError("drive is not 2*pi-periodic in its fast argument")
    F = np.fft.rfft(samples, axis=1)
    r0 = TimeTrace(grid, F[:, 0].real / n_tau)
    terms = []
    for k in range(1, n_tau // 2):
        a = 2.0 * F[:, k].real / n_tau
        b = -2.0 * F[:, k].imag / n_tau
        if np.max(np.abs(a)) > 1e-12 * scale:
            terms.append((k, "cos", TimeTrace(grid, a)))
        if np.max(np.abs(b)) > 1e-12 * scale:
            terms.append((k, "sin", TimeTrace(grid, b)))
    nyq = F[:, n_tau // 2].real / n_tau
    if np.max(np.abs(nyq)) > 1e-9 * scale:
        raise ValueError("fast harmonics at or beyond the sampling limit; "
                         "raise n_tau")
    return OscillatorySource(r0, FastProfile(terms, grid))


def rho0(r1):
    """Zero-mean second antiderivative of the fast part in the phase variable."""
    if isinstance(r1, OscillatorySource):
        r1 = r1.r1
    return r1.tau_antiderivative_zero_mean(order=2)


def rho1(rho0_profile):
    """Zero-mean profile with d(rho1)/dtau = -rho0."""
    return (-rho0_profile).tau_antiderivative_zero_mean(order=1)


def corner_values_from_rho0(p0):
    """Corner data at (t, tau) = (0, 0) given the profile rho0 itself."""
    p1 = rho1(p0)
    return {
        "rho0": p0.corner(),
        "rho0_tau": p0.tau_derivative().corner(),
        "rho0_t": p0.t_derivative().corner(),
        "rho1": p1.corner(),
        "rho1_t": p1.t_derivative().corner(),
    }


def corner_values(r1):
    """Corner data of rho0 and rho1 at (t, tau) = (0, 0).

    Returns a dict with rho0, rho0_tau, rho0_t, rho1, rho1_t; these five
    numbers determine the first- and second-order expansion coefficients.
    """
    return corner_values_from_rho0(rho0(r1))
