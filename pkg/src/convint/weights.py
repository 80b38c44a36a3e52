"""Weight functions mu_j(t) > 1 with an integrable singularity of the excess.

Only the excess mu - 1 enters the computation. It is positive, summable over
the line, and may blow up like |t|^(-gamma), gamma in [0, 1), at t = 0. Each
model provides

  * pointwise evaluation (with a domain error exactly at the singular point),
  * the total excess integral w = int (mu - 1) dt, closed form where one
    exists and a singularity-aware quadrature route for cross-checking,
  * exact cell moments m0 = int_cell (mu - 1) dt and m1 = int_cell t (mu - 1) dt,
    which the discretization uses as a product-quadrature measure,
  * tail masses outside [-T, T].

Built-ins:

  ExpSqrtWeight:   mu(t) = 1 + eps exp(-|t|) / sqrt(|t|).
                   w = 2 eps sqrt(pi); moments via incomplete gamma.
  RationalWeight:  mu(t) = 1 + eps / ((1 + t^2) |t|^alpha), alpha in (0, 1).
                   w = eps pi / cos(pi alpha / 2); moments by a
                   desingularizing substitution u = t^(1-alpha) and a fixed
                   Gauss rule on the (smooth) transformed integrand.
  TabulatedExcessWeight: samples of mu - 1 with a declared singularity
                   exponent gamma; the regular factor s(t) = (mu-1)|t|^gamma
                   is interpolated linearly and integrated against |t|^-gamma
                   in closed form.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

SQRT_PI = math.sqrt(math.pi)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)

__all__ = [
    "ExcessIntegrals",
    "ExpSqrtWeight",
    "RationalWeight",
    "TabulatedExcessWeight",
    "weight_eval",
    "excess_integral",
    "excess_tail_mass",
    "excess_cell_moments",
    "excess_weighted_integral",
    "build_b_matrix",
    "load_tabulated_excess",
]


@dataclass(frozen=True)
class ExcessIntegrals:
    """Excess masses w_j and the derived matrix b_ij = w_j * sup K_ij."""

    w: np.ndarray
    b: np.ndarray


class ExpSqrtWeight:
    """mu(t) = 1 + eps * exp(-|t|) / sqrt(|t|); inverse-square-root singularity."""

    variant = "exp_sqrt"

    def __init__(self, eps):
        eps = float(eps)
        if not (eps >= 0.0) or not math.isfinite(eps):
            raise ValueError("eps must be finite and nonnegative")
        self.eps = eps
        self.gamma_exponent = 0.5

    def excess(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t == 0.0):
            raise ValueError("weight is singular at t = 0")
        a = np.abs(t)
        out = self.eps * np.exp(-a) / np.sqrt(a)
        return out if out.ndim else float(out)

    def excess_integral_closed(self) -> float:
        return 2.0 * self.eps * SQRT_PI

    def excess_integral_quadrature(self) -> float:
        # t = u^2 removes the singularity on [0, 1]
        head, _ = integrate.quad(lambda u: 2.0 * math.exp(-u * u), 0.0, 1.0,
                                 epsabs=1e-13, epsrel=1e-13)
        tail, _ = integrate.quad(lambda t: math.exp(-t) / math.sqrt(t), 1.0, np.inf,
                                 epsabs=1e-13, epsrel=1e-13)
        return 2.0 * self.eps * (head + tail)

    def excess_tail(self, t_from: float) -> float:
        return 2.0 * self.eps * SQRT_PI * float(special.gammaincc(0.5, t_from))

    def _mass_diff(self, lo, hi, shape):
        # int_lo^hi e^-t t^(shape-1) dt in units of Gamma(shape), with the
        # complementary form for large lo to keep relative precision
        scale = self.eps * float(special.gamma(shape))
        p = special.gammainc(shape, hi) - special.gammainc(shape, lo)
        q = special.gammaincc(shape, lo) - special.gammaincc(shape, hi)
        return scale * np.where(lo >= 1.0, q, p)

    def cell_moments_batch(self, edges):
        lo, hi, sign = _fold_cells(np.asarray(edges, dtype=float))
        m0 = self._mass_diff(lo, hi, 0.5)
        m1 = sign * self._mass_diff(lo, hi, 1.5)
        return m0, m1

    def weighted_integral(self, fn, hi: float) -> float:
        """int_0^hi fn(t) (mu-1)(t) dt by adaptive quadrature, t = u^2."""
        val, _ = integrate.quad(lambda u: fn(u * u) * 2.0 * self.eps * math.exp(-u * u),
                                0.0, math.sqrt(hi), epsabs=1e-12, epsrel=1e-12, limit=400)
        return val

    def with_eps(self, eps):
        return ExpSqrtWeight(eps)


class RationalWeight:
    """mu(t) = 1 + eps / ((1 + t^2) |t|^alpha), alpha in (0, 1)."""

    variant = "rational"

    def __init__(self, eps, alpha):
        eps = float(eps)
        alpha = float(alpha)
        if not (eps >= 0.0) or not math.isfinite(eps):
            raise ValueError("eps must be finite and nonnegative")
        if not (0.0 < alpha < 1.0):
            raise ValueError("alpha must lie in (0, 1)")
        self.eps = eps
        self.alpha = alpha
        self.gamma_exponent = alpha
        self._beta = 1.0 / (1.0 - alpha)

    def excess(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t == 0.0):
            raise ValueError("weight is singular at t = 0")
        a = np.abs(t)
        out = self.eps / ((1.0 + t * t) * np.power(a, self.alpha))
        return out if out.ndim else float(out)

    def excess_integral_closed(self) -> float:
        return self.eps * math.pi / math.cos(math.pi * self.alpha / 2.0)

    def excess_integral_quadrature(self) -> float:
        b = self._beta
        head, _ = integrate.quad(lambda u: b / (1.0 + u ** (2.0 * b)), 0.0, 1.0,
                                 epsabs=1e-13, epsrel=1e-13)
        # t -> 1/v maps [1, inf) onto (0, 1] with a smooth integrand
        tail, _ = integrate.quad(lambda v: v ** self.alpha / (1.0 + v * v), 0.0, 1.0,
                                 epsabs=1e-13, epsrel=1e-13)
        return 2.0 * self.eps * (head + tail)

    def excess_tail(self, t_from: float) -> float:
        if t_from <= 0.0:
            return self.excess_integral_closed()
        if t_from < 1.0:
            inner = self.weighted_integral(lambda t: 1.0, t_from)
            return self.excess_integral_closed() - 2.0 * inner
        val, _ = integrate.quad(lambda v: v ** self.alpha / (1.0 + v * v), 0.0, 1.0 / t_from,
                                epsabs=1e-14, epsrel=1e-13)
        return 2.0 * self.eps * val

    def cell_moments_batch(self, edges):
        lo, hi, sign = _fold_cells(np.asarray(edges, dtype=float))
        b = self._beta
        u0 = np.power(lo, 1.0 - self.alpha)
        u1 = np.power(hi, 1.0 - self.alpha)
        mid = 0.5 * (u1 + u0)
        half = 0.5 * (u1 - u0)
        u = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        ub = np.power(u, b)
        den = 1.0 + ub * ub
        m0 = self.eps * b * half * ((1.0 / den) @ _GL_WEIGHTS)
        m1 = sign * self.eps * b * half * ((ub / den) @ _GL_WEIGHTS)
        return m0, m1

    def weighted_integral(self, fn, hi: float) -> float:
        b = self._beta
        val, _ = integrate.quad(
            lambda u: fn(u ** b) * self.eps * b / (1.0 + u ** (2.0 * b)),
            0.0, hi ** (1.0 - self.alpha), epsabs=1e-12, epsrel=1e-12, limit=400)
        return val

    def with_eps(self, eps):
        return RationalWeight(eps, self.alpha)


class TabulatedExcessWeight:
    """Samples of mu - 1 at t >= 0 with a declared singularity exponent.

    The weight is even, so the table covers the nonnegative axis only.  The
    regular factor s(t) = (mu - 1)(t) |t|^gamma is interpolated linearly
    between samples; cells beyond the sampled support contribute nothing.
    """

    variant = "tabulated_excess"

    def __init__(self, t, values, gamma):
        t = np.asarray(t, dtype=float)
        values = np.asarray(values, dtype=float)
        gamma = float(gamma)
        if not (0.0 <= gamma < 1.0):
            raise ValueError("gamma must lie in [0, 1)")
        if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0.0):
            raise ValueError("t samples must be strictly increasing, at least two")
        if t[0] < 0.0:
            raise ValueError("samples must lie on the nonnegative axis; "
                             "the weight is even in t")
        if gamma > 0.0 and np.any(t == 0.0):
            raise ValueError("samples at t = 0 are not representable with gamma > 0")
        if not np.all(np.isfinite(values)) or np.any(values < 0.0):
            raise ValueError("excess samples must be finite and nonnegative")
        self.t = t
        self.values = values
        self.gamma_exponent = gamma
        self._s = values * np.power(np.abs(t), gamma)

    def _s_at(self, t):
        return np.interp(t, self.t, self._s)

    def excess(self, t):
        t = np.asarray(t, dtype=float)
        if self.gamma_exponent > 0.0 and np.any(t == 0.0):
            raise ValueError("weight is singular at t = 0")
        a = np.abs(t)
        inside = (a >= self.t[0]) & (a <= self.t[-1])
        safe = np.where(a == 0.0, 1.0, a)
        out = np.where(inside, self._s_at(a) * np.power(safe, -self.gamma_exponent),
                       0.0)
        return out if out.ndim else float(out)

    def _one_cell(self, a, b):
        # moments over [a, b] with 0 <= a < b after folding; s evaluated on the
        # original (possibly mirrored) axis by the caller
        g = self.gamma_exponent
        p1, p2, p3 = 1.0 - g, 2.0 - g, 3.0 - g
        i0 = (b ** p1 - a ** p1) / p1
        i1 = (b ** p2 - a ** p2) / p2
        i2 = (b ** p3 - a ** p3) / p3
        return i0, i1, i2

    def cell_moments_batch(self, edges):
        edges = np.asarray(edges, dtype=float)
        m0 = np.zeros(edges.size - 1)
        m1 = np.zeros(edges.size - 1)
        lo_sup, hi_sup = self.t[0], self.t[-1]
        for k in range(edges.size - 1):
            a, b = edges[k], edges[k + 1]
            for (ca, cb) in _split_at_zero(a, b):
                # fold to the positive axis first, then clip to the support
                if cb <= 0.0:
                    lo, hi, sign = -cb, -ca, -1.0
                else:
                    lo, hi, sign = ca, cb, 1.0
                lo, hi = max(lo, lo_sup), min(hi, hi_sup)
                if hi <= lo:
                    continue
                s_lo, s_hi = self._s_at(lo), self._s_at(hi)
                slope = (s_hi - s_lo) / (hi - lo)
                i0, i1, i2 = self._one_cell(lo, hi)
                m0[k] += s_lo * i0 + slope * (i1 - lo * i0)
                m1[k] += sign * (s_lo * i1 + slope * (i2 - lo * i1))
        return m0, m1

    def excess_integral_closed(self) -> float:
        # the table covers t >= 0; the even extension doubles the mass
        m0, _ = self.cell_moments_batch(self.t)
        return 2.0 * float(np.sum(m0))

    excess_integral_quadrature = excess_integral_closed

    def excess_tail(self, t_from: float) -> float:
        # integrate outward along the table's own cells; a single wide cell
        # would misrepresent the curve through its linear model
        if t_from >= self.t[-1]:
            return 0.0
        if t_from <= self.t[0]:
            return self.excess_integral_closed()
        edges = np.concatenate([[t_from], self.t[self.t > t_from]])
        m0, _ = self.cell_moments_batch(edges)
        return 2.0 * float(np.sum(m0))

    def weighted_integral(self, fn, hi: float) -> float:
        # u = t^(1-gamma) removes the singular factor; the integrand is
        # smooth inside each table cell, so fixed Gauss-Legendre per cell
        # is exact to roundoff for our piecewise-linear s
        p = 1.0 - self.gamma_exponent
        top = min(hi, self.t[-1])
        lo = self.t[0]
        if top <= lo:
            return 0.0
        nodes, wts = np.polynomial.legendre.leggauss(16)
        edges = np.concatenate([[lo], self.t[(self.t > lo) & (self.t < top)],
                                [top]])
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            ua, ub = a ** p, b ** p
            mid, halfw = 0.5 * (ua + ub), 0.5 * (ub - ua)
            u = mid + halfw * nodes
            t = u ** (1.0 / p)
            total += halfw * float(np.sum(wts * np.asarray(fn(t), dtype=float)
                                          * self._s_at(t))) / p
        return total


def _split_at_zero(a, b):
    if a < 0.0 < b:
        return [(a, 0.0), (0.0, b)]
    return [(a, b)]


def _fold_cells(edges):
    """Map cells to the positive axis; returns (lo, hi, orientation sign).

    Requires no cell to straddle 0 (the solver grids always place a node
    there); straddling input raises.
    """
    a, b = edges[:-1], edges[1:]
    if np.any(b <= a):
        raise ValueError("cell edges must increase")
    if np.any((a < 0.0) & (b > 0.0)):
        raise ValueError("cells must not straddle t = 0; split them first")
    neg = b <= 0.0
    lo = np.where(neg, -b, a)
    hi = np.where(neg, -a, b)
    sign = np.where(neg, -1.0, 1.0)
    return lo, hi, sign


def weight_eval(model, t):
    """mu(t) = 1 + excess; raises exactly at the singular point t = 0."""
    return 1.0 + model.excess(t)


def excess_integral(model, method: str = "closed") -> float:
    """Total excess mass w = int (mu - 1) dt over the whole line."""
    if method == "closed":
        return float(model.excess_integral_closed())
    if method == "quadrature":
        return float(model.excess_integral_quadrature())
    raise ValueError(f"unknown method {method!r}")


def excess_tail_mass(model, t_from: float) -> float:
    """Excess mass outside [-t_from, t_from]."""
    if t_from < 0.0:
        raise ValueError("t_from must be nonnegative")
    return float(model.excess_tail(t_from))


def excess_cell_moments(model, t0: float, t1: float):
    """(m0, m1) of the excess over one cell [t0, t1]; exact across t = 0."""
    if not (t1 > t0):
        raise ValueError("need t1 > t0")
    parts = _split_at_zero(float(t0), float(t1))
    m0 = m1 = 0.0
    for (a, b) in parts:
        c0, c1 = model.cell_moments_batch(np.array([a, b]))
        m0 += float(c0[0])
        m1 += float(c1[0])
    return m0, m1


def excess_weighted_integral(model, fn, hi: float) -> float:
    """int_0^hi fn(t) (mu - 1)(t) dt with the singularity handled analytically.

    Reference-quality route used for error estimation and cross-checks.
    """
    return float(model.weighted_integral(fn, hi))


def build_b_matrix(weights, scalars) -> ExcessIntegrals:
    """b_ij = w_j * sup K_ij from the excess masses and kernel suprema."""
    n = scalars.n
    if len(weights) != n:
        raise ValueError(f"expected {n} weights, got {len(weights)}")
    w = np.array([excess_integral(m) for m in weights], dtype=float)
    if not np.all(np.isfinite(w)) or np.any(w < 0.0):
        raise ValueError("excess integrals must be finite and nonnegative")
    b = scalars.sup * w[None, :]
    return ExcessIntegrals(w=w, b=b)


def load_tabulated_excess(path) -> TabulatedExcessWeight:
    """Read a CSV with columns t, mu_minus_1 and a '# gamma=...' metadata line.

    Tables without the declared singularity exponent are refused.
    """
    gamma = None
    rows = []
    with open(path, newline="") as fh:
        for raw in fh:
            stripped = raw.strip()
            if stripped.startswith("#"):
                body = stripped.lstrip("#").strip()
                if body.replace(" ", "").startswith("gamma="):
                    gamma = float(body.split("=", 1)[1])
                continue
            if stripped:
                rows.append(next(csv.reader([stripped])))
    if gamma is None:
        raise ValueError(f"{path}: missing '# gamma=...' metadata line")
    if not rows:
        raise ValueError(f"{path}: no data rows")
    header = [h.strip() for h in rows[0]]
    if header[:2] != ["t", "mu_minus_1"]:
        raise ValueError(f"{path}: expected columns t, mu_minus_1")
    data = np.array([[float(x) for x in row[:2]] for row in rows[1:]])
    return TabulatedExcessWeight(data[:, 0], data[:, 1], gamma)
