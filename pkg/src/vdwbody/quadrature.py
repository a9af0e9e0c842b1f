"""Adaptive Gauss-Kronrod integration engines.

Three entry points are provided:

* :func:`integrate_interval` for finite intervals,
* :func:`integrate_semi_infinite` for ``[lower, inf)`` through the map
  ``u = lower + s t / (1 - t)``,
* :func:`integrate_iterated_2d` for iterated double integrals.

Integrands are called with a 1-D array of abscissae and must return an
array of matching length, or of shape ``(n, k)`` for ``k`` simultaneous
integrals sharing the same abscissae. Scalar integrands can be wrapped
with ``vectorize=False``.

Panels are refined in rounds: every panel carrying more than an equal
share of the allowed error is bisected. Panels stay in positional order
and sums are taken in that order, so repeated calls give bit-identical
results.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from ._kernels._common import EPS, GWEIGHTS, KWEIGHTS, NODES, gk_error

DEFAULT_REL_TOL = 1e-8
DEFAULT_ABS_TOL = 1e-14
OUTER_REL_TOL = 1e-7
DEFAULT_MAX_PANELS = 2000

Value = Union[float, np.ndarray]


@dataclass(frozen=True)
class QuadResult:
    """Outcome of an adaptive integration.

    Attributes
    ----------
    value : float or numpy.ndarray
        Integral estimate (array for vector-valued integrands).
    error_estimate : float
        Absolute error estimate; for vector integrands the largest
        component error.
    evaluations : int
        Number of integrand evaluations (abscissae).
    converged : bool
        Whether the requested tolerance was met within the panel budget.
    detail : str
        Free-form diagnostic, e.g. the abscissa at which a nested
        integral failed.
    """

    value: Value
    error_estimate: float
    evaluations: int
    converged: bool
    detail: str = ""
    component_errors: Optional[np.ndarray] = None


class QuadratureError(RuntimeError):
    """Raised when an integral cannot be brought within tolerance."""

    def __init__(self, message: str, result: Optional[QuadResult] = None):
        super().__init__(message)
        self.result = result


def _vectorized(f, vectorize):
    if vectorize:
        return f

    def g(x):
        return np.array([f(xi) for xi in x])

    return g


def _gk(fn, a, b):
    half = 0.5 * (b - a)
    centre = 0.5 * (a + b)
    nodes = centre[:, None] + half[:, None] * NODES[None, :]
    flat = np.asarray(fn(nodes.ravel()), dtype=float)
    f = flat.reshape(len(a), 15, -1)
    if not np.all(np.isfinite(f)):
        bad = nodes.ravel()[~np.all(np.isfinite(f.reshape(len(a) * 15, -1)), axis=1)]
        raise QuadratureError(f"integrand not finite at x = {bad[0]!r}")
    resk = np.einsum("k,pkc->pc", KWEIGHTS, f)
    resg = np.einsum("k,pkc->pc", GWEIGHTS, f)
    resabs = np.einsum("k,pkc->pc", KWEIGHTS, np.abs(f))
    resasc = np.einsum("k,pkc->pc", KWEIGHTS, np.abs(f - 0.5 * resk[:, None, :]))
    h = half[:, None]
    err = gk_error(resk, resg, resabs, resasc, h)
    return resk * h, err, resabs * h


def _adapt(fn, edges, rel_tol, abs_tol, max_panels, monitor=None):
    """Core refinement loop; returns totals, per-component errors, count, flag."""
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1].copy(), edges[1:].copy()
    val, err, rab = _gk(fn, a, b)
    ncomp = val.shape[1]
    mon = np.ones(ncomp, dtype=bool) if monitor is None else np.asarray(monitor, dtype=bool)
    neval = 15 * len(a)
    refined = 0
    while True:
        total = val.sum(axis=0)
        etot = err.sum(axis=0)
        target = np.maximum(np.maximum(rel_tol * np.abs(total), abs_tol),
                            100.0 * EPS * rab.sum(axis=0))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(target > 0, etot / target, np.where(etot > 0, np.inf, 0.0))
        if np.all(ratio[mon] <= 1.0):
            return total, etot, neval, True
        if refined >= max_panels:
            return total, etot, neval, False
        with np.errstate(divide="ignore", invalid="ignore"):
            share = np.where(target > 0, err / target, np.where(err > 0, np.inf, 0.0))
        score = share[:, mon].max(axis=1)
        sel = score > 1.0 / len(a)
        if not sel.any():
            sel[np.argmax(score)] = True
        if refined + int(sel.sum()) > max_panels:
            order = np.argsort(-score, kind="stable")[: max_panels - refined]
            sel = np.zeros_like(sel)
            sel[order] = True
        nsel = int(sel.sum())
        mid = 0.5 * (a + b)
        counts = 1 + sel.astype(int)
        first = (np.cumsum(counts) - counts)[sel]
        second = first + 1
        na = np.repeat(a, counts)
        nb = np.repeat(b, counts)
        nb[first] = mid[sel]
        na[second] = mid[sel]
        val = np.repeat(val, counts, axis=0)
        err = np.repeat(err, counts, axis=0)
        rab = np.repeat(rab, counts, axis=0)
        fresh = np.concatenate([first, second])
        v, e, r = _gk(fn, na[fresh], nb[fresh])
        val[fresh], err[fresh], rab[fresh] = v, e, r
        a, b = na, nb
        neval += 15 * len(fresh)
        refined += nsel


def _package(total, etot, neval, ok, scalar, detail=""):
    value = float(total[0]) if scalar else total
    return QuadResult(value, float(np.max(etot)), int(neval), bool(ok), detail, etot)


def _call_shape(f):
    """Wrap ``f`` so that it always returns a 2-D (n, k) array; report scalar-ness."""
    state = {"scalar": None}

    def fn(x):
        y = np.asarray(f(x), dtype=float)
        if y.ndim == 1:
            state["scalar"] = True
            return y[:, None]
        state["scalar"] = False
        return y

    return fn, state


def integrate_interval(
    f: Callable,
    a: float,
    b: float,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    max_panels: int = DEFAULT_MAX_PANELS,
    breakpoints: Optional[Sequence[float]] = None,
    vectorize: bool = True,
) -> QuadResult:
    """Integrate ``f`` over the finite interval ``[a, b]``.

    Parameters
    ----------
    f : callable
        Integrand; see the module docstring for the calling convention.
    a, b : float
        Finite limits with ``a < b``.
    rel_tol, abs_tol : float
        Each component must satisfy ``err <= max(rel_tol*|I|, abs_tol)``;
        the target is never set below the floating-point noise of the
        panel sums.
    max_panels : int
        Maximum number of bisections beyond the initial partition.
    breakpoints : sequence of float, optional
        Interior points to start panels at (kinks, known features).
    """
    if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
        raise ValueError("integrate_interval needs finite a < b")
    if rel_tol <= 0 and abs_tol <= 0:
        raise ValueError("need a positive tolerance")
    pts = [a, b]
    if breakpoints is not None:
        pts += [p for p in breakpoints if a < p < b]
    edges = np.unique(np.asarray(pts, dtype=float))
    fn, state = _call_shape(_vectorized(f, vectorize))
    total, etot, n, ok = _adapt(fn, edges, rel_tol, abs_tol, max_panels)
    return _package(total, etot, n, ok, state["scalar"])


def integrate_semi_infinite(
    f: Callable,
    decay_scale: float,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    max_panels: int = DEFAULT_MAX_PANELS,
    lower: float = 0.0,
    breakpoints: Optional[Sequence[float]] = None,
    vectorize: bool = True,
    monitor: Optional[Sequence[bool]] = None,
) -> QuadResult:
    """Integrate ``f`` over ``[lower, inf)``.

    The substitution ``u = lower + s t/(1-t)`` with ``s = decay_scale``
    maps the half line onto ``[0, 1)``. Gauss-Kronrod nodes are interior,
    so neither endpoint is ever evaluated.

    For vector integrands, ``monitor`` selects the components that must
    meet the tolerance; the others (error bookkeeping, say) are integrated
    along without steering the refinement.

    Examples
    --------
    >>> r = integrate_semi_infinite(lambda u: np.exp(-u), 1.0, rel_tol=1e-12)
    >>> round(r.value, 12)
    1.0
    """
    if not decay_scale > 0:
        raise ValueError("decay_scale must be positive")
    s = float(decay_scale)
    fv, state = _call_shape(_vectorized(f, vectorize))

    def g(t):
        one_minus = 1.0 - t
        u = lower + s * t / one_minus
        return fv(u) * (s / (one_minus * one_minus))[:, None]

    tb = [0.0, 0.5, 0.8, 1.0]
    if breakpoints is not None:
        for p in breakpoints:
            if p > lower:
                tb.append((p - lower) / (s + p - lower))
    edges = np.unique(np.asarray(tb))
    total, etot, n, ok = _adapt(g, edges, rel_tol, abs_tol, max_panels, monitor)
    return _package(total, etot, n, ok, state["scalar"])


Domain = Tuple[float, float]


def _integrate_domain(f, dom, scale, rel_tol, abs_tol, max_panels, monitor=None):
    lo, hi = dom
    fn, state = _call_shape(f)
    if math.isinf(hi):
        s = float(scale)

        def g(t):
            one_minus = 1.0 - t
            u = lo + s * t / one_minus
            return fn(u) * (s / (one_minus * one_minus))[:, None]

        edges = np.array([0.0, 0.5, 0.8, 1.0])
        out = _adapt(g, edges, rel_tol, abs_tol, max_panels, monitor)
    else:
        out = _adapt(fn, np.array([lo, hi], dtype=float), rel_tol, abs_tol, max_panels, monitor)
    return out, state


def integrate_iterated_2d(
    f: Callable[[float, np.ndarray], np.ndarray],
    outer: Domain = (0.0, math.inf),
    inner: Domain = (0.0, math.inf),
    outer_scale: float = 1.0,
    inner_scale: float = 1.0,
    rel_tol_inner: float = DEFAULT_REL_TOL,
    rel_tol_outer: float = OUTER_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    max_panels: int = DEFAULT_MAX_PANELS,
) -> QuadResult:
    """Iterated integral ``int_outer dx int_inner dy f(x, y)``.

    ``f(x, ys)`` receives a scalar outer abscissa and an array of inner
    abscissae. Infinite upper limits use the semi-infinite map with the
    corresponding scale. The reported error is the outer error plus the
    integral of the inner error estimates. An inner failure marks the
    result as not converged and names the first offending outer abscissa.

    Examples
    --------
    >>> r = integrate_iterated_2d(lambda x, y: np.exp(-x - y))
    >>> abs(r.value - 1.0) < 1e-7
    True
    """
    failures = []
    count = [0]

    def outer_integrand(xs):
        out = np.empty((len(xs), 2))
        for i, x in enumerate(xs):
            (tot, et, n, ok), _ = _integrate_domain(
                lambda ys: f(x, ys), inner, inner_scale, rel_tol_inner, abs_tol, max_panels)
            count[0] += n
            if not ok:
                failures.append(float(x))
            out[i, 0] = tot[0]
            out[i, 1] = et[0]
        return out

    (total, etot, n, ok), _ = _integrate_domain(
        outer_integrand, outer, outer_scale, rel_tol_outer, abs_tol, max_panels,
        monitor=[True, False])
    err = float(etot[0] + abs(total[1]))
    detail = ""
    if failures:
        ok = False
        detail = f"inner integral did not converge at outer abscissa {failures[0]!r}"
    return QuadResult(float(total[0]), err, int(n + count[0]), bool(ok), detail)
