"""Analytic oracles for a critical Markov branching process.

Everything is driven by ``g(w) = L(e^w)`` where ``L(1/(1-s)) = (f(s)-s)/(1-s)``.
For a mean-one law, ``L(x) = sum_{k>=1} P(nu>k) (1 - (1-1/x)^k)``, which stays
accurate for astronomically large ``x``.  In the coordinate
``y = -ln(1 - F)`` the backward equation ``dF/dt = f(F) - F`` becomes
``dy/dt = g(y)``; ``q(t) = -ln Q(t)`` is its solution started from 0.
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass

import numba as nb
import numpy as np
from scipy import integrate

from .errors import DomainError, NumericalError, ParameterError
from .offspring import LawKind, OffspringLaw

E = math.e
_HEAD = 512
_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
# finite-t oracles are trusted only while Q(t) stays above this floor
Q_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# compiled g kernels


@nb.njit(cache=True)
def _ell(z):
    # ln(e + e^z) without overflow
    if z > 1.0:
        return z + math.log1p(math.exp(1.0 - z))
    return math.log(E + math.exp(z))


@nb.njit(cache=True)
def _lam(w):
    # -ln(1 - e^{-w}); the per-step discount with s = 1 - e^{-w}
    if w < 0.6931471805599453:
        return -math.log(-math.expm1(-w))
    return -math.log1p(-math.exp(-w))


@nb.njit(cache=True)
def _g_heavy(w, beta, c, total, head, gx, gw):
    if w <= 0.0:
        return total
    lam = _lam(w)
    # log(lam), valid even where lam underflows
    loglam = math.log(lam) if w < 30.0 else -w + 0.5 * math.exp(-w)
    k0 = head.shape[0]
    acc = 0.0
    for k in range(1, k0):
        acc += head[k] * -math.expm1(-lam * k)
    # Euler-Maclaurin remainder for k >= k0
    y0 = float(k0)
    l0 = math.log(E + y0)
    tau0 = c / (y0 * l0 ** (1.0 + beta))
    dtau0 = -c / (y0 * y0 * l0 ** (1.0 + beta)) - c * (1.0 + beta) / (y0 * (E + y0) * l0 ** (2.0 + beta))
    one_m = -math.expm1(-lam * y0)
    h0 = tau0 * one_m
    dh0 = dtau0 * one_m + tau0 * lam * math.exp(-lam * y0)
    acc += 0.5 * h0 - dh0 / 12.0
    # integral of tau(y)(1 - e^{-lam y}) over [k0, Y], in z = ln y; below
    # z = ln(1/lam) - 40 the integrand is lam * y * tau(y), a relative e^-40 share
    z_lo = max(math.log(y0), -loglam - 40.0)
    z_hi = max(z_lo, math.log(40.0) - loglam)
    if z_hi > z_lo:
        npan = int(math.ceil((z_hi - z_lo) / 4.0))
        width = (z_hi - z_lo) / npan
        for p in range(npan):
            a = z_lo + p * width
            for i in range(gx.shape[0]):
                z = a + 0.5 * width * (gx[i] + 1.0)
                val = c * _ell(z) ** (-1.0 - beta) * -math.expm1(-math.exp(z + loglam))
                acc += 0.5 * width * gw[i] * val
    # integral of tau(y) over [Y, inf), in v = ln(e + y)
    u0 = _ell(z_hi)
    tail = u0 ** (-beta) / beta
    if u0 < 60.0:
        npan = 10
        width = 4.0
        for p in range(npan):
            a = u0 + p * width
            for i in range(gx.shape[0]):
                v = a + 0.5 * width * (gx[i] + 1.0)
                tail += 0.5 * width * gw[i] * v ** (-1.0 - beta) * math.exp(1.0 - v) / -math.expm1(1.0 - v)
    acc += c * tail
    return acc


@nb.njit(cache=True)
def _g_table(w, tail):
    if w <= 0.0:
        s = 0.0
        for k in range(1, tail.shape[0]):
            s += tail[k]
        return s
    lam = _lam(w)
    acc = 0.0
    for k in range(1, tail.shape[0]):
        acc += tail[k] * -math.expm1(-lam * k)
    return acc


@nb.njit(cache=True)
def _g_heavy_many(ws, beta, c, total, head, gx, gw):
    out = np.empty(ws.shape[0])
    for i in range(ws.shape[0]):
        out[i] = _g_heavy(ws[i], beta, c, total, head, gx, gw)
    return out


@nb.njit(cache=True)
def _g_table_many(ws, tail):
    out = np.empty(ws.shape[0])
    for i in range(ws.shape[0]):
        out[i] = _g_table(ws[i], tail)
    return out


# ---------------------------------------------------------------------------
# model


class AnalyticModel:
    """The f, F, pi, rho, q, g, c function stack for one critical law.

    The cumulative rho table is extended lazily under a lock, so a model can
    be shared between threads.
    """

    def __init__(
        self,
        law: OffspringLaw,
        series_tol: float = 1e-14,
        quad_tol: float = 1e-11,
        ode_rtol: float = 1e-9,
        ode_atol: float = 1e-12,
        panel: float = 1.0,
    ):
        self.law = law
        self.series_tol = series_tol
        self.quad_tol = quad_tol
        self.ode_rtol = ode_rtol
        self.ode_atol = ode_atol
        self._panel = panel
        self._lock = threading.Lock()
        self._cum = np.zeros(1)  # rho at multiples of the panel width

        if law.kind is LawKind.HEAVY_TAIL:
            beta, c, t0 = law.params
            head = np.asarray(law.tail(np.arange(_HEAD)), dtype=float)
            args = (beta, c, 1.0 - t0, head, _GL_X, _GL_W)
            self._g1 = lambda w: _g_heavy(float(w), *args)
            self._gv = lambda ws: _g_heavy_many(ws, *args)
        elif law.kind is LawKind.TABLE:
            tail = np.asarray(law.tail(np.arange(law.table.size)), dtype=float)
            if law.pmf(0) <= 0:
                raise ParameterError("P(nu = 0) must be positive for f(s) > s on [0, 1)")
            if abs(law.mean - 1.0) > 1e-12:
                warnings.warn(f"law mean {law.mean} != 1; rho identities assume criticality", stacklevel=2)
            self._g1 = lambda w: _g_table(float(w), tail)
            self._gv = lambda ws: _g_table_many(ws, tail)
        else:
            raise ParameterError(f"analytic stack needs a critical law, got {law.kind.value}")

    # -- g, L, f ---------------------------------------------------------------
    def g(self, w):
        """g(w) = L(e^w); scalar or array input."""
        if np.ndim(w) == 0:
            return self._g1(w)
        return self._gv(np.ascontiguousarray(w, dtype=float))

    def L_eval(self, x: float) -> float:
        """Slowly varying part, L(1/(1-s)) = (f(s) - s)/(1 - s), for x > 1."""
        if not x > 1.0:
            raise DomainError(f"L is evaluated on x > 1, got {x!r}")
        return self._g1(math.log(x))

    def f_eval(self, s: float) -> float:
        """Offspring generating function."""
        if not 0.0 <= s <= 1.0:
            raise DomainError(f"s must lie in [0, 1], got {s!r}")
        if s == 1.0:
            return 1.0
        if s == 0.0:
            return float(self.law.pmf(0))
        if s > 0.99:
            return s + (1.0 - s) * self._g1(-math.log1p(-s))
        return f_series(self.law, s, self.series_tol)

    # -- ODE -------------------------------------------------------------------
    def flow(self, y0: float, t: float) -> float:
        """Solve dy/dt = g(y) from y(0) = y0; y = -ln(1 - F)."""
        if t < 0:
            raise DomainError(f"t must be non-negative, got {t!r}")
        if t == 0 or math.isinf(y0):
            return y0
        g1 = self._g1
        sol = integrate.solve_ivp(
            lambda _t, y: [g1(y[0])],
            (0.0, float(t)),
            [float(y0)],
            method="RK45",
            rtol=self.ode_rtol,
            atol=self.ode_atol,
        )
        if not sol.success:
            raise NumericalError(f"ODE integration failed at t={sol.t[-1]:.6g}: {sol.message}")
        return float(sol.y[0, -1])

    def solve_F(self, s: float, t: float) -> float:
        """F(s, t) = E[s^Z(t)] by integrating the backward equation."""
        if not 0.0 <= s <= 1.0:
            raise DomainError(f"s must lie in [0, 1], got {s!r}")
        if s == 1.0:
            return 1.0
        y = self.flow(-math.log1p(-s), t)
        return -math.expm1(-y)

    def Q(self, t: float) -> float:
        """Survival probability P(Z(t) > 0) from the ODE."""
        return math.exp(-self.flow(0.0, t))

    # -- pi, rho ---------------------------------------------------------------
    def _extend(self, x: float) -> None:
        need = int(math.ceil(x / self._panel)) + 1
        if self._cum.size > need:
            return
        with self._lock:
            cum = self._cum
            if cum.size > need:
                return
            h = self._panel
            start = cum.size - 1
            n_new = max(need - start, start)  # grow geometrically
            a = (start + np.arange(n_new))[:, None] * h
            nodes = a + 0.5 * h * (_GL_X[None, :] + 1.0)
            vals = 1.0 / self.g(nodes.ravel()).reshape(nodes.shape)
            panels = 0.5 * h * vals @ _GL_W
            self._cum = np.concatenate([cum, cum[-1] + np.cumsum(panels)])

    def rho(self, x: float) -> float:
        """rho(x) = pi(1 - e^{-x}) = int_0^x dw / g(w)."""
        if x < 0:
            raise DomainError(f"rho is defined for x >= 0, got {x!r}")
        if math.isinf(x):
            raise DomainError("rho diverges at infinity in the critical case")
        self._extend(x)
        h = self._panel
        j = int(x // h)
        a = j * h
        base = self._cum[j]
        if x == a:
            return float(base)
        half = 0.5 * (x - a)
        nodes = a + half * (_GL_X + 1.0)
        return float(base + half * np.dot(_GL_W, 1.0 / self.g(nodes)))

    def pi_eval(self, s: float) -> float:
        """pi(s) = int_0^s dv / (f(v) - v)."""
        if not 0.0 <= s < 1.0:
            if s == 1.0:
                raise DomainError("pi(1) diverges in the critical case")
            raise DomainError(f"s must lie in [0, 1), got {s!r}")
        if s > 0.9:
            return self._pi_direct(0.9) + self.rho(-math.log1p(-s)) - self.rho(-math.log1p(-0.9))
        return self._pi_direct(s)

    def _pi_direct(self, s: float) -> float:
        if s == 0.0:
            return 0.0
        val, _ = integrate.quad(
            lambda v: 1.0 / (self.f_eval(v) - v), 0.0, s, epsabs=self.quad_tol, epsrel=self.quad_tol, limit=200
        )
        return val

    # -- q and friends -----------------------------------------------------------
    def q_of_t(self, t: float) -> float:
        """q(t) = -ln Q(t), found by solving rho(q) = t."""
        if t < 0:
            raise DomainError(f"t must be non-negative, got {t!r}")
        if t == 0:
            return 0.0
        lo, hi = 0.0, 1.0
        while self.rho(hi) <= t:
            lo, hi = hi, 2.0 * hi
            if hi > 1e7:
                raise NumericalError(f"could not bracket rho(q) = {t}")
        x = 0.5 * (lo + hi)
        for _ in range(200):
            r = self.rho(x) - t
            if r > 0:
                hi = x
            else:
                lo = x
            step = r * self._g1(x)  # rho' = 1/g
            xn = x - step
            if not lo < xn < hi:
                xn = 0.5 * (lo + hi)
            if abs(xn - x) <= 1e-13 * max(1.0, x):
                return xn
            x = xn
            if hi - lo <= 1e-14 * max(1.0, x):
                return x
        raise NumericalError(f"root solve for q({t}) did not converge")

    def q_prime(self, t: float) -> float:
        """q'(t) = g(q(t))."""
        return self._g1(self.q_of_t(t))

    def c_of_t(self, t: float) -> float:
        """Log-size scale q(1/g(q(t))): ln Z(t) / c_of_t(t) has a proper limit law."""
        if not t > 0:
            raise DomainError(f"t must be positive, got {t!r}")
        gq = self._g1(self.q_of_t(t))
        if gq >= 1.0:
            raise DomainError(f"g(q(t)) = {gq:.4g} >= 1; t = {t} is pre-asymptotic")
        return self.q_of_t(1.0 / gq)

    def delta(self, s: float, t: float) -> float:
        """Delta(s, t) = rho(q(t) - ln(1 - s)) - t."""
        return self.rho(self.q_of_t(t) - math.log1p(-s)) - t

    # -- reduced process ---------------------------------------------------------
    def _q_checked(self, t: float) -> float:
        q = self.flow(0.0, t)
        if q > -math.log(Q_FLOOR):
            raise NumericalError(
                f"Q({t}) = exp(-{q:.4g}) is below {Q_FLOOR:g}; compare against limit laws instead"
            )
        return q

    def reduced_gf(self, s: float, u: float, t: float) -> float:
        """E[s^Z(u,t) | Z(t) > 0] = 1 - exp(q(t) - y_u), y from q(t-u) - ln(1-s)."""
        if not 0.0 <= u <= t:
            raise DomainError(f"need 0 <= u <= t, got u={u!r}, t={t!r}")
        if not 0.0 <= s <= 1.0:
            raise DomainError(f"s must lie in [0, 1], got {s!r}")
        qt = self._q_checked(t)
        if s == 1.0:
            return 1.0
        y0 = self.flow(0.0, t - u) - math.log1p(-s)
        return -math.expm1(qt - self.flow(y0, u))

    def single_ancestor_prob(self, u: float, t: float, method: str = "exact") -> float:
        """P(Z(u,t) = 1 | Z(t) > 0) = P(tau(t) <= t - u | Z(t) > 0).

        ``exact`` uses d/ds of the flow, g(q(t)) / g(q(t-u)); ``fd`` takes a
        Richardson-extrapolated finite difference of ``reduced_gf`` at s = 0.
        """
        if not 0.0 <= u <= t:
            raise DomainError(f"need 0 <= u <= t, got u={u!r}, t={t!r}")
        if method == "exact":
            qt = self._q_checked(t)
            return self._g1(qt) / self._g1(self.flow(0.0, t - u))
        if method == "fd":
            h = 1e-3
            d1 = self.reduced_gf(h, u, t) / h
            d2 = self.reduced_gf(h / 2, u, t) / (h / 2)
            return 2.0 * d2 - d1
        raise ValueError(f"unknown method {method!r}")

    def mrca_cdf(self, x, t: float):
        """Exact finite-t law P(tau(t) <= t x | Z(t) > 0) for x in [0, 1]."""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any((xs < 0) | (xs > 1)):
            raise DomainError("x must lie in [0, 1]")
        gt = self._g1(self._q_checked(t))
        out = np.array([gt / self._g1(self.flow(0.0, t * xi)) for xi in xs])
        return float(out[0]) if np.ndim(x) == 0 else out


def f_series(law: OffspringLaw, s: float, tol: float = 1e-14) -> float:
    """sum_k pmf(k) s^k truncated where the geometric bound s^(K+1) < tol."""
    if s == 0.0:
        return float(law.pmf(0))
    kmax = int(math.ceil(math.log(tol) / math.log(s)))
    if kmax > 50_000_000:
        raise NumericalError(f"series at s={s} needs {kmax} terms")
    if law.kind is LawKind.TABLE:
        kmax = min(kmax, law.table.size - 1)
    k = np.arange(kmax + 1)
    terms = law.pmf(k) * np.exp(k * math.log(s))
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# limit laws and closed forms


@dataclass(frozen=True)
class LimitLaws:
    """Limit laws of the beta regime."""

    beta: float

    @property
    def exponent(self) -> float:
        return self.beta / (1.0 + self.beta)

    def mrca_cdf(self, x):
        """lim P(tau(t)/t <= x | Z(t) > 0) = x^(beta/(1+beta))."""
        xs = np.asarray(x, dtype=float)
        if np.any((xs < 0) | (xs > 1)):
            raise DomainError("mrca_cdf is defined on [0, 1]")
        return xs**self.exponent

    def phi_density(self, x):
        """Density of the limiting tau(t)/t on (0, 1]."""
        xs = np.asarray(x, dtype=float)
        if np.any((xs <= 0) | (xs > 1)):
            raise DomainError("phi_density is defined on (0, 1]")
        return self.exponent * xs ** (-1.0 / (1.0 + self.beta))

    def size_cdf(self, x):
        """lim P(ln Z(t) <= x c(t) | Z(t) > 0) = 1 - exp(-x^(beta+1))."""
        xs = np.asarray(x, dtype=float)
        if np.any(xs < 0):
            raise DomainError("size_cdf is defined on [0, inf)")
        return -np.expm1(-(xs ** (self.beta + 1.0)))

    def marginal_one(self, x, y):
        """P(R(y) = 1 | R(x) = 1) = ((1-y)/(1-x))^(beta/(1+beta)), 0 <= x <= y < 1."""
        xs = np.asarray(x, dtype=float)
        ys = np.asarray(y, dtype=float)
        if np.any((xs < 0) | (xs > ys) | (ys >= 1)):
            raise DomainError("marginal_one needs 0 <= x <= y < 1")
        return ((1.0 - ys) / (1.0 - xs)) ** self.exponent


def limit_cdfs(beta: float) -> LimitLaws:
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta!r}")
    return LimitLaws(float(beta))


def F_closed(mode: str, s: float, t: float, alpha: float | None = None) -> float:
    """Generating function of Z_alpha(t) (mode 'alpha') or Z_0(t) (mode 'zero')."""
    if not 0.0 <= s < 1.0:
        raise DomainError(f"s must lie in [0, 1), got {s!r}")
    if t < 0:
        raise DomainError(f"t must be non-negative, got {t!r}")
    p = math.exp(-t)
    if mode == "zero":
        return -math.expm1(p * math.log1p(-s))
    if mode != "alpha":
        raise DomainError(f"unknown mode {mode!r}")
    if alpha is None or not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha!r}")
    if alpha == 1.0:
        return s * p / (1.0 - (1.0 - p) * s)
    # 1 - (1 - p + p (1-s)^-alpha)^(-1/alpha), arranged to survive alpha -> 0
    inner = math.log1p(p * math.expm1(-alpha * math.log1p(-s)))
    return -math.expm1(-inner / alpha)
