"""Bessel functions of order 0-2 and exponential-Bessel moment integrals.

The moments

    A_{n+-}(a, beta) = int_0^inf u^n exp(-a u) [J0(beta u) +- J2(beta u)] du
    B_n(a, beta)     = int_0^inf u^n exp(-a u) J0(beta u) du

appear in the retarded interaction with a half space. Closed forms for
n = 3, 4, 5 are implemented in :func:`a_integral` and :func:`b_integral`;
:func:`ab_quadrature_oracle` evaluates the defining integrals numerically
so the two can be checked against each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .quadrature import QuadratureError, integrate_interval

ENVELOPE_DROP = 1e-18


def bessel_j(n: int, x):
    """Bessel function of the first kind J_n(x) for n in {0, 1, 2}, x >= 0.

    Power series for small arguments, Miller's backward recurrence in the
    intermediate band and the Hankel asymptotic expansion for large
    arguments; absolute accuracy is about 2e-14 everywhere.

    Examples
    --------
    >>> bessel_j(0, 0.0)
    1.0
    >>> abs(bessel_j(0, 2.404825557695773)) < 1e-12
    True
    """
    if n not in (0, 1, 2):
        raise ValueError("only orders 0, 1 and 2 are supported")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or not np.all(np.isfinite(xa)):
        raise ValueError("x must be finite and non-negative")
    val = _kernels.bessel_j012(xa)[n]
    if np.ndim(x) == 0:
        return float(val)
    return val


@dataclass(frozen=True)
class ABParams:
    """Arguments of the exponential-Bessel moments: decay ``a`` and scale ``beta``."""

    a: float
    beta: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be positive")
        if not self.beta >= 0:
            raise ValueError("beta must be non-negative")


def _check_order(n):
    if n not in (3, 4, 5):
        raise ValueError("n must be 3, 4 or 5")


def a_integral(n: int, sign: str, p: ABParams) -> float:
    """Closed form of A_{n+} (``sign='+'``) or A_{n-} (``sign='-'``).

    Examples
    --------
    >>> a_integral(3, '+', ABParams(1.0, 0.0))
    6.0
    """
    _check_order(n)
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    a, b = p.a, p.beta
    a2, b2 = a * a, b * b
    r2 = a2 + b2
    if sign == "+":
        if n == 3:
            return 6.0 * a / r2 ** 2.5
        if n == 4:
            return 6.0 * (4.0 * a2 - b2) / r2 ** 3.5
        return 30.0 * (4.0 * a2 * a - 3.0 * a * b2) / r2 ** 4.5
    if n == 3:
        return 6.0 * (a2 * a - 4.0 * a * b2) / r2 ** 3.5
    if n == 4:
        return 6.0 * (4.0 * a2 * a2 - 27.0 * a2 * b2 + 4.0 * b2 * b2) / r2 ** 4.5
    return 30.0 * (4.0 * a2 * a2 * a - 41.0 * a2 * a * b2 + 18.0 * a * b2 * b2) / r2 ** 5.5


def b_integral(n: int, p: ABParams) -> float:
    """Closed form of B_n for n in {3, 4, 5}.

    Examples
    --------
    >>> b_integral(3, ABParams(1.0, 0.0))
    6.0
    """
    _check_order(n)
    a, b = p.a, p.beta
    a2, b2 = a * a, b * b
    r2 = a2 + b2
    if n == 3:
        return 3.0 * a * (2.0 * a2 - 3.0 * b2) / r2 ** 3.5
    if n == 4:
        return 3.0 * (8.0 * a2 * a2 - 24.0 * a2 * b2 + 3.0 * b2 * b2) / r2 ** 4.5
    return 15.0 * a * (8.0 * a2 * a2 - 40.0 * a2 * b2 + 15.0 * b2 * b2) / r2 ** 5.5


def envelope_cutoff(power: float, rate: float, drop: float = ENVELOPE_DROP) -> float:
    """Point beyond the peak of ``u**power * exp(-rate*u)`` where it has fallen by ``drop``."""
    if not rate > 0:
        raise ValueError("decay rate must be positive")
    peak = power / rate
    log_peak = power * math.log(peak) - power if power > 0 else 0.0
    target = log_peak + math.log(drop)

    def logenv(u):
        return (power * math.log(u) if power > 0 else 0.0) - rate * u

    lo = max(peak, 1e-300)
    hi = max(2.0 * peak, 1.0 / rate)
    while logenv(hi) > target:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if logenv(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    return hi


def _moment(integrand: Callable, power: int, rate: float, freq: float, tol: float) -> float:
    """Integrate an enveloped Bessel moment, with the error measured against
    ``max(|I|, power! / rate**(power+1))`` so that moments which vanish by
    cancellation can still be certified."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    upper = envelope_cutoff(power, rate)
    scale = math.factorial(power) / rate ** (power + 1)
    breaks = None
    if freq > 0 and upper * freq / math.pi > 4:
        breaks = math.pi / freq * np.arange(1, int(upper * freq / math.pi) + 1)
    res = integrate_interval(integrand, 0.0, upper, rel_tol=0.1 * tol,
                             abs_tol=0.1 * tol * scale, max_panels=20000,
                             breakpoints=breaks)
    if not res.converged or res.error_estimate > tol * max(abs(res.value), scale):
        raise QuadratureError(
            f"moment integral did not reach tolerance {tol:g} "
            f"(estimate {res.error_estimate:.3g})", res)
    return res.value


def ab_quadrature_oracle(n: int, which: str, p: ABParams, tol: float = 1e-10) -> float:
    """Evaluate A_{n+-} or B_n from the defining integral by adaptive quadrature.

    Parameters
    ----------
    n : int
        Power of u, 3, 4 or 5.
    which : {'+', '-', 'B'}
        Selects A_{n+}, A_{n-} or B_n.
    p : ABParams
    tol : float
        Relative tolerance; a :class:`QuadratureError` is raised when it is
        not reached.
    """
    _check_order(n)
    if which not in ("+", "-", "B"):
        raise ValueError("which must be '+', '-' or 'B'")
    a, beta = p.a, p.beta

    def f(u):
        j0, _, j2 = _kernels.bessel_j012(beta * u)
        if which == "+":
            br = j0 + j2
        elif which == "-":
            br = j0 - j2
        else:
            br = j0
        return u ** n * np.exp(-a * u) * br

    return _moment(f, n, a, beta, tol)


def m_integral(n: int, v: float, vp: float, x: float, zplus: float, tol: float = 1e-10) -> float:
    """M_n = int_0^inf u^6 exp(-(v+v') Z+ u) J_n(beta u) J_n(beta' u) du.

    Here ``beta = X sqrt(v^2 - 1)`` and ``beta' = X sqrt(v'^2 - 1)``. For
    ``X = 0`` the Bessel product reduces to ``delta_{n0}`` and the result
    is the Gamma integral ``720 / ((v+v') Z+)^7``.

    Examples
    --------
    >>> m_integral(0, 1.0, 1.0, 0.0, 1.0)
    5.625
    """
    if n not in (0, 1, 2):
        raise ValueError("n must be 0, 1 or 2")
    if not (v >= 1 and vp >= 1 and zplus > 0):
        raise ValueError("need v, v' >= 1 and Z+ > 0")
    rate = (v + vp) * zplus
    beta = abs(x) * math.sqrt(v * v - 1.0)
    betap = abs(x) * math.sqrt(vp * vp - 1.0)
    if beta == 0.0 and betap == 0.0:
        return 720.0 / rate ** 7 if n == 0 else 0.0
    if n > 0 and (beta == 0.0 or betap == 0.0):
        return 0.0

    def f(u):
        jb = _kernels.bessel_j012(beta * u)[n]
        jbp = _kernels.bessel_j012(betap * u)[n]
        return u ** 6 * np.exp(-rate * u) * jb * jbp

    return _moment(f, 6, rate, max(beta, betap), tol)
