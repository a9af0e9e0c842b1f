"""Vectorised numpy implementation of the hot kernels.

This module is the fallback used when the compiled extension is not
available. It implements exactly the same algorithms as ``_core.pyx`` so
both backends agree to rounding.
"""
import math

import numpy as np

from ._common import (EPS, GWEIGHTS, KWEIGHTS, NODES, gk_error,
                      q_panel_edges)

SERIES_MAX = 8.0
MILLER_MAX = 20.0
MILLER_START = 60
SERIES_TERMS = 30
ASYMPTOTIC_TERMS = 28
ASYMPTOTIC_CUT = 1e-17

KIND_REGULAR = 0
KIND_CONDUCTOR = 1
KIND_PERMEABLE = 2


def _series(x):
    h = 0.5 * x
    h2 = h * h
    out = []
    for n in range(3):
        term = h ** n / math.factorial(n)
        total = term.copy()
        for k in range(1, SERIES_TERMS):
            term = term * (-h2) / (k * (k + n))
            total = total + term
        out.append(total)
    return out


def _miller(x):
    jp1 = np.zeros_like(x)
    jk = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    j1 = j2 = None
    for k in range(MILLER_START, 0, -1):
        jm1 = (2.0 * k / x) * jk - jp1
        if k % 2 == 0:
            norm = norm + 2.0 * jk
        if k == 2:
            j2 = jk
        if k == 1:
            j1 = jk
        jp1, jk = jk, jm1
    j0 = jk
    norm = norm + j0
    return j0 / norm, j1 / norm, j2 / norm


def _asym_pq(nu, x):
    mu = 4.0 * nu * nu
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, ASYMPTOTIC_TERMS + 1):
        term = np.where(active, term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x), 0.0)
        if k % 2 == 1:
            q = q + (term if (k // 2) % 2 == 0 else -term)
        else:
            p = p + (-term if (k // 2) % 2 == 1 else term)
        active &= np.abs(term) >= ASYMPTOTIC_CUT
        if not active.any():
            break
    return p, q


def _asymptotic(x):
    p0, q0 = _asym_pq(0, x)
    p1, q1 = _asym_pq(1, x)
    c = np.cos(x - 0.25 * math.pi)
    s = np.sin(x - 0.25 * math.pi)
    amp = np.sqrt(2.0 / (math.pi * x))
    j0 = amp * (p0 * c - q0 * s)
    j1 = amp * (p1 * s + q1 * c)
    return j0, j1, 2.0 * j1 / x - j0


def bessel_j012(x):
    """Return ``(J0(x), J1(x), J2(x))`` for an array of non-negative ``x``."""
    x = np.asarray(x, dtype=float)
    j0 = np.empty_like(x)
    j1 = np.empty_like(x)
    j2 = np.empty_like(x)
    bands = (
        (x < SERIES_MAX, _series),
        ((x >= SERIES_MAX) & (x < MILLER_MAX), _miller),
        (x >= MILLER_MAX, _asymptotic),
    )
    for mask, fn in bands:
        if np.any(mask):
            a, b, c = fn(x[mask])
            j0[mask] = a
            j1[mask] = b
            j2[mask] = c
    return j0, j1, j2


def _interface(q2, u2, e_lo, m_lo, e_hi, m_hi, b_lo, b_hi):
    """Fresnel coefficients of one interface, written without cancellation."""
    num_p = q2 * (e_lo - e_hi) * (e_lo + e_hi) + u2 * e_lo * e_hi * (e_lo * m_hi - e_hi * m_lo)
    num_s = q2 * (m_lo - m_hi) * (m_lo + m_hi) + u2 * m_lo * m_hi * (m_lo * e_hi - m_hi * e_lo)
    den_p = e_lo * b_hi + e_hi * b_lo
    den_s = m_lo * b_hi + m_hi * b_lo
    return num_s / (den_s * den_s), num_p / (den_p * den_p)


def reflection(q, u, eps, mu, thick, kind):
    """Reflection coefficients ``(r_s, r_p)`` seen from the top vacuum layer.

    Parameters
    ----------
    q : array_like
        Transverse wavenumbers.
    u : float
        Imaginary frequency.
    eps, mu : sequence of float
        Responses of the layers below the vacuum region, bottom first.
    thick : sequence of float
        Layer thicknesses (entry 0 unused).
    kind : sequence of int
        0 for an ordinary layer, 1 for a perfect conductor, 2 for a
        perfect permeable layer.
    """
    q = np.asarray(q, dtype=float)
    n = len(eps)
    q2 = q * q
    u2 = u * u
    start = -1
    for j in range(n):
        if kind[j] != KIND_REGULAR:
            start = j
    if start >= 0:
        sign = -1.0 if kind[start] == KIND_CONDUCTOR else 1.0
        rs = np.full_like(q, sign)
        rp = np.full_like(q, -sign)
        first = start + 2
    else:
        rs = np.zeros_like(q)
        rp = np.zeros_like(q)
        first = 1
    for j in range(first, n + 1):
        e_lo, m_lo = eps[j - 1], mu[j - 1]
        e_hi, m_hi = (eps[j], mu[j]) if j < n else (1.0, 1.0)
        b_lo = np.sqrt(u2 * e_lo * m_lo + q2)
        b_hi = np.sqrt(u2 * e_hi * m_hi + q2)
        rho_s, rho_p = _interface(q2, u2, e_lo, m_lo, e_hi, m_hi, b_lo, b_hi)
        if j - 1 >= 1:
            ph = np.exp(-2.0 * b_lo * thick[j - 1])
        else:
            ph = np.zeros_like(q)
        es = ph * rs
        ep = ph * rp
        rs = (rho_s + es) / (1.0 + rho_s * es)
        rp = (rho_p + ep) / (1.0 + rho_p * ep)
    return rs, rp


def _integrand(q, u, x, zplus, eps, mu, thick, kind):
    """The four u^2-scaled tensor densities (xx, yy, zz, xz) at nodes ``q``.

    The factor exp(-u Z+) is left out; the caller multiplies it back.
    """
    rs, rp = reflection(q, u, eps, mu, thick, kind)
    b = np.sqrt(u * u + q * q)
    env = np.exp(-(q * q / (b + u)) * zplus)
    j0, j1, j2 = bessel_j012(q * x)
    u2b = u * u / b
    c8 = q * env / (8.0 * math.pi)
    out = np.empty(q.shape + (4,))
    out[..., 0] = c8 * (u2b * (j0 + j2) * rs - b * (j0 - j2) * rp)
    out[..., 1] = c8 * (u2b * (j0 - j2) * rs - b * (j0 + j2) * rp)
    out[..., 2] = -q ** 3 * env * j0 / b * rp / (4.0 * math.pi)
    out[..., 3] = -q * q * env * j1 * rp / (4.0 * math.pi)
    return out


def _gk_panels(a, b, fn):
    half = 0.5 * (b - a)
    centre = 0.5 * (a + b)
    nodes = centre[:, None] + half[:, None] * NODES[None, :]
    f = fn(nodes)                                    # (P, 15, 4)
    resk = np.einsum("k,pkc->pc", KWEIGHTS, f)
    resg = np.einsum("k,pkc->pc", GWEIGHTS, f)
    resabs = np.einsum("k,pkc->pc", KWEIGHTS, np.abs(f))
    mean = 0.5 * resk
    resasc = np.einsum("k,pkc->pc", KWEIGHTS, np.abs(f - mean[:, None, :]))
    h = half[:, None]
    err = gk_error(resk, resg, resabs, resasc, h)
    return resk * h, err, resabs * h


def adaptive_panels(edges, fn, rel_tol, abs_tol, max_refine):
    """Globally adaptive Gauss-Kronrod integration of a 4-vector integrand.

    Every round bisects all panels whose worst component error exceeds an
    equal share of the allowed total, keeping panels in positional order so
    that sums are deterministic.
    """
    a = np.asarray(edges[:-1], dtype=float)
    b = np.asarray(edges[1:], dtype=float)
    val, err, rab = _gk_panels(a, b, fn)
    neval = 15 * len(a)
    refined = 0
    while True:
        total = val.sum(axis=0)
        etot = err.sum(axis=0)
        norm = np.abs(total).max()
        target = max(rel_tol * norm, abs_tol, 100.0 * EPS * rab.sum(axis=0).max())
        emax = etot.max()
        if emax <= target:
            return total, emax, neval, True
        if refined >= max_refine:
            return total, emax, neval, False
        score = err.max(axis=1)
        sel = score > target / len(a)
        if not sel.any():
            sel[np.argmax(score)] = True
        nsel = int(sel.sum())
        if refined + nsel > max_refine:
            order = np.argsort(-score, kind="stable")[: max_refine - refined]
            sel = np.zeros_like(sel)
            sel[order] = True
            nsel = int(sel.sum())
        mid = 0.5 * (a + b)
        counts = 1 + sel.astype(int)
        start = np.cumsum(counts) - counts
        first = start[sel]
        second = first + 1
        na = np.repeat(a, counts)
        nb = np.repeat(b, counts)
        nb[first] = mid[sel]
        na[second] = mid[sel]
        nval = np.repeat(val, counts, axis=0)
        nerr = np.repeat(err, counts, axis=0)
        nrab = np.repeat(rab, counts, axis=0)
        fresh = np.concatenate([first, second])
        v, e, r = _gk_panels(na[fresh], nb[fresh], fn)
        nval[fresh] = v
        nerr[fresh] = e
        nrab[fresh] = r
        a, b, val, err, rab = na, nb, nval, nerr, nrab
        neval += 15 * len(fresh)
        refined += nsel


def scattering_u2g(u, x, zplus, eps, mu, thick, kind,
                   rel_tol=1e-10, abs_tol=0.0, max_refine=2000):
    """u^2-scaled scattering Green tensor elements above a planar stack.

    Returns
    -------
    values : numpy.ndarray, shape (4,)
        ``u^2 G1`` components ``(xx, yy, zz, xz)`` for lateral offset
        ``x >= 0``.
    error : float
        Absolute error estimate (worst component).
    evaluations : int
    converged : bool
    """
    eps = np.asarray(eps, dtype=float)
    mu = np.asarray(mu, dtype=float)
    thick = np.asarray(thick, dtype=float)
    kind = np.asarray(kind, dtype=np.int32)
    regular = kind == KIND_REGULAR
    edges = q_panel_edges(u, x, zplus, np.sqrt(eps * mu)[regular], thick[1:])

    def fn(q):
        return _integrand(q, u, x, zplus, eps, mu, thick, kind)

    total, err, neval, ok = adaptive_panels(edges, fn, rel_tol, abs_tol, max_refine)
    scale = math.exp(-u * zplus)
    return total * scale, err * scale, neval, ok
