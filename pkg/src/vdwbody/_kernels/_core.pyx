# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Bessel J0-J2, the layered reflection recurrence and
the adaptive transverse-wavenumber integral of the scattering Green tensor.

The algorithms mirror ``_pure.py`` step for step.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, cos, sin, fabs, pow, M_PI
from libc.stdlib cimport malloc, free

from ._common import XGK as _XGK, WGK as _WGK, WG as _WG, EPS as _EPS, UFLOW as _UFLOW
from ._common import q_panel_edges

cnp.import_array()

DEF SERIES_TERMS = 30
DEF ASYMPTOTIC_TERMS = 28
DEF MILLER_START = 60
DEF NCOMP = 4
DEF MAXLAYERS = 64

cdef double SERIES_MAX = 8.0
cdef double MILLER_MAX = 20.0
cdef double ASYMPTOTIC_CUT = 1e-17
cdef double XGK[8]
cdef double WGK[8]
cdef double WG[4]
cdef double EPS = _EPS
cdef double UFLOW = _UFLOW

cdef int _i
for _i in range(8):
    XGK[_i] = _XGK[_i]
    WGK[_i] = _WGK[_i]
for _i in range(4):
    WG[_i] = _WG[_i]


cdef inline void _series(double x, double* j0, double* j1, double* j2) noexcept nogil:
    cdef double h = 0.5 * x
    cdef double h2 = h * h
    cdef double t0 = 1.0, t1 = h, t2 = 0.5 * h * h
    cdef double s0 = t0, s1 = t1, s2 = t2
    cdef int k
    for k in range(1, SERIES_TERMS):
        t0 = t0 * (-h2) / (k * k)
        t1 = t1 * (-h2) / (k * (k + 1))
        t2 = t2 * (-h2) / (k * (k + 2))
        s0 += t0
        s1 += t1
        s2 += t2
    j0[0] = s0
    j1[0] = s1
    j2[0] = s2


cdef inline void _miller(double x, double* j0, double* j1, double* j2) noexcept nogil:
    cdef double jp1 = 0.0, jk = 1e-30, jm1, norm = 0.0
    cdef double a1 = 0.0, a2 = 0.0
    cdef int k
    for k in range(MILLER_START, 0, -1):
        jm1 = (2.0 * k / x) * jk - jp1
        if k % 2 == 0:
            norm += 2.0 * jk
        if k == 2:
            a2 = jk
        if k == 1:
            a1 = jk
        jp1 = jk
        jk = jm1
    norm += jk
    j0[0] = jk / norm
    j1[0] = a1 / norm
    j2[0] = a2 / norm


cdef inline void _asym_pq(int nu, double x, double* p, double* q) noexcept nogil:
    cdef double mu = 4.0 * nu * nu
    cdef double term = 1.0
    cdef int k
    p[0] = 1.0
    q[0] = 0.0
    for k in range(1, ASYMPTOTIC_TERMS + 1):
        term = term * (mu - (2 * k - 1) * (2 * k - 1)) / (8.0 * k * x)
        if k % 2 == 1:
            if (k // 2) % 2 == 0:
                q[0] += term
            else:
                q[0] -= term
        else:
            if (k // 2) % 2 == 1:
                p[0] -= term
            else:
                p[0] += term
        if fabs(term) < ASYMPTOTIC_CUT:
            break


cdef inline void bessel012(double x, double* j0, double* j1, double* j2) noexcept nogil:
    cdef double p0, q0, p1, q1, c, s, amp
    if x < SERIES_MAX:
        _series(x, j0, j1, j2)
    elif x < MILLER_MAX:
        _miller(x, j0, j1, j2)
    else:
        _asym_pq(0, x, &p0, &q0)
        _asym_pq(1, x, &p1, &q1)
        c = cos(x - 0.25 * M_PI)
        s = sin(x - 0.25 * M_PI)
        amp = sqrt(2.0 / (M_PI * x))
        j0[0] = amp * (p0 * c - q0 * s)
        j1[0] = amp * (p1 * s + q1 * c)
        j2[0] = 2.0 * j1[0] / x - j0[0]


def bessel_j012(x):
    """Return ``(J0(x), J1(x), J2(x))`` for an array of non-negative ``x``."""
    cdef cnp.ndarray[double, ndim=1] xs = np.ascontiguousarray(np.ravel(np.asarray(x, dtype=float)))
    cdef Py_ssize_t n = xs.shape[0], i
    cdef cnp.ndarray[double, ndim=1] a = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] b = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] c = np.empty(n)
    for i in range(n):
        bessel012(xs[i], &a[i], &b[i], &c[i])
    shape = np.shape(x)
    return a.reshape(shape), b.reshape(shape), c.reshape(shape)


cdef struct Stack:
    int n
    int first
    double rs0
    double rp0
    double eps[MAXLAYERS + 1]
    double mu[MAXLAYERS + 1]
    double thick[MAXLAYERS + 1]


cdef int _make_stack(Stack* st, eps, mu, thick, kind) except -1:
    cdef int n = len(eps), j, start = -1
    if n > MAXLAYERS:
        raise ValueError("too many layers")
    st.n = n
    for j in range(n):
        st.eps[j] = eps[j]
        st.mu[j] = mu[j]
        st.thick[j] = thick[j]
        if kind[j] != 0:
            start = j
    st.eps[n] = 1.0
    st.mu[n] = 1.0
    st.thick[n] = 0.0
    if start >= 0:
        if kind[start] == 1:
            st.rs0 = -1.0
        else:
            st.rs0 = 1.0
        st.rp0 = -st.rs0
        st.first = start + 2
    else:
        st.rs0 = 0.0
        st.rp0 = 0.0
        st.first = 1
    return 0


cdef inline void _reflect(Stack* st, double q, double u, double* rs, double* rp) noexcept nogil:
    cdef double q2 = q * q, u2 = u * u
    cdef double s = st.rs0, p = st.rp0
    cdef double elo, mlo, ehi, mhi, blo, bhi, ns, np_, ds, dp, rhos, rhop, ph, es, ep
    cdef int j
    for j in range(st.first, st.n + 1):
        elo = st.eps[j - 1]
        mlo = st.mu[j - 1]
        ehi = st.eps[j]
        mhi = st.mu[j]
        blo = sqrt(u2 * elo * mlo + q2)
        bhi = sqrt(u2 * ehi * mhi + q2)
        np_ = q2 * (elo - ehi) * (elo + ehi) + u2 * elo * ehi * (elo * mhi - ehi * mlo)
        ns = q2 * (mlo - mhi) * (mlo + mhi) + u2 * mlo * mhi * (mlo * ehi - mhi * elo)
        dp = elo * bhi + ehi * blo
        ds = mlo * bhi + mhi * blo
        rhop = np_ / (dp * dp)
        rhos = ns / (ds * ds)
        if j - 1 >= 1:
            ph = exp(-2.0 * blo * st.thick[j - 1])
        else:
            ph = 0.0
        es = ph * s
        ep = ph * p
        s = (rhos + es) / (1.0 + rhos * es)
        p = (rhop + ep) / (1.0 + rhop * ep)
    rs[0] = s
    rp[0] = p


def reflection(q, double u, eps, mu, thick, kind):
    """Reflection coefficients ``(r_s, r_p)`` seen from the top vacuum layer."""
    cdef Stack st
    _make_stack(&st, eps, mu, thick, kind)
    cdef cnp.ndarray[double, ndim=1] qs = np.ascontiguousarray(np.ravel(np.asarray(q, dtype=float)))
    cdef Py_ssize_t n = qs.shape[0], i
    cdef cnp.ndarray[double, ndim=1] a = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] b = np.empty(n)
    for i in range(n):
        _reflect(&st, qs[i], u, &a[i], &b[i])
    shape = np.shape(q)
    return a.reshape(shape), b.reshape(shape)


cdef inline void _integrand(Stack* st, double q, double u, double x, double zplus,
                            double* out) noexcept nogil:
    cdef double rs, rp, b, env, j0, j1, j2, u2b, c8
    _reflect(st, q, u, &rs, &rp)
    b = sqrt(u * u + q * q)
    env = exp(-(q * q / (b + u)) * zplus)
    bessel012(q * x, &j0, &j1, &j2)
    u2b = u * u / b
    c8 = q * env / (8.0 * M_PI)
    out[0] = c8 * (u2b * (j0 + j2) * rs - b * (j0 - j2) * rp)
    out[1] = c8 * (u2b * (j0 - j2) * rs - b * (j0 + j2) * rp)
    out[2] = -q * q * q * env * j0 / b * rp / (4.0 * M_PI)
    out[3] = -q * q * env * j1 * rp / (4.0 * M_PI)


cdef void _gk_panel(Stack* st, double u, double x, double zplus, double a, double b,
                    double* val, double* err, double* rab) noexcept nogil:
    cdef double centre = 0.5 * (a + b), half = 0.5 * (b - a)
    cdef double f[15][NCOMP]
    cdef double resk, resg, resabs, resasc, mean, e, sc
    cdef int k, c
    for k in range(7):
        _integrand(st, centre - half * XGK[k], u, x, zplus, f[k])
        _integrand(st, centre + half * XGK[k], u, x, zplus, f[14 - k])
    _integrand(st, centre, u, x, zplus, f[7])
    for c in range(NCOMP):
        resk = WGK[7] * f[7][c]
        resg = WG[3] * f[7][c]
        resabs = WGK[7] * fabs(f[7][c])
        for k in range(7):
            resk += WGK[k] * (f[k][c] + f[14 - k][c])
            resabs += WGK[k] * (fabs(f[k][c]) + fabs(f[14 - k][c]))
            if k % 2 == 1:
                resg += WG[k // 2] * (f[k][c] + f[14 - k][c])
        mean = 0.5 * resk
        resasc = WGK[7] * fabs(f[7][c] - mean)
        for k in range(7):
            resasc += WGK[k] * (fabs(f[k][c] - mean) + fabs(f[14 - k][c] - mean))
        e = fabs((resk - resg) * half)
        resasc *= half
        resabs *= half
        if resasc != 0.0 and e != 0.0:
            sc = pow(200.0 * e / resasc, 1.5)
            if sc > 1.0:
                sc = 1.0
            e = resasc * sc
        if resabs > UFLOW / (50.0 * EPS):
            if 50.0 * EPS * resabs > e:
                e = 50.0 * EPS * resabs
        val[c] = resk * half
        err[c] = e
        rab[c] = resabs


def scattering_u2g(double u, double x, double zplus, eps, mu, thick, kind,
                   double rel_tol=1e-10, double abs_tol=0.0, int max_refine=2000):
    """u^2-scaled scattering Green tensor elements above a planar stack.

    Same contract as the pure-Python implementation: returns
    ``(values[xx, yy, zz, xz], error, evaluations, converged)``.
    """
    cdef Stack st
    _make_stack(&st, eps, mu, thick, kind)
    eps_a = np.asarray(eps, dtype=float)
    mu_a = np.asarray(mu, dtype=float)
    kind_a = np.asarray(kind)
    edges_obj = q_panel_edges(u, x, zplus, np.sqrt(eps_a * mu_a)[kind_a == 0],
                              np.asarray(thick, dtype=float)[1:])
    cdef cnp.ndarray[double, ndim=1] edges = np.ascontiguousarray(edges_obj, dtype=float)
    cdef int npan = edges.shape[0] - 1
    cdef int cap = npan + max_refine + 1
    cdef double* pa = <double*> malloc(cap * sizeof(double))
    cdef double* pb = <double*> malloc(cap * sizeof(double))
    cdef double* val = <double*> malloc(cap * NCOMP * sizeof(double))
    cdef double* err = <double*> malloc(cap * NCOMP * sizeof(double))
    cdef double* rab = <double*> malloc(cap * NCOMP * sizeof(double))
    cdef double* na = <double*> malloc(cap * sizeof(double))
    cdef double* nb = <double*> malloc(cap * sizeof(double))
    cdef double* nval = <double*> malloc(cap * NCOMP * sizeof(double))
    cdef double* nerr = <double*> malloc(cap * NCOMP * sizeof(double))
    cdef double* nrab = <double*> malloc(cap * NCOMP * sizeof(double))
    cdef char* sel = <char*> malloc(cap * sizeof(char))
    cdef double* score = <double*> malloc(cap * sizeof(double))
    cdef double total[NCOMP]
    cdef double etot[NCOMP]
    cdef double atot[NCOMP]
    cdef double norm, target, emax, amax, mid, share, best
    cdef long neval = 0
    cdef int refined = 0, i, c, m, nsel, ibest, budget
    cdef bint converged = False
    cdef double* tmp
    if (pa == NULL or pb == NULL or val == NULL or err == NULL or rab == NULL or na == NULL
            or nb == NULL or nval == NULL or nerr == NULL or nrab == NULL or sel == NULL
            or score == NULL):
        free(pa); free(pb); free(val); free(err); free(rab); free(na); free(nb)
        free(nval); free(nerr); free(nrab); free(sel); free(score)
        raise MemoryError()
    try:
        with nogil:
            for i in range(npan):
                pa[i] = edges[i]
                pb[i] = edges[i + 1]
                _gk_panel(&st, u, x, zplus, pa[i], pb[i], &val[NCOMP * i], &err[NCOMP * i],
                          &rab[NCOMP * i])
            neval = 15 * npan
            while True:
                for c in range(NCOMP):
                    total[c] = 0.0
                    etot[c] = 0.0
                    atot[c] = 0.0
                for i in range(npan):
                    for c in range(NCOMP):
                        total[c] += val[NCOMP * i + c]
                        etot[c] += err[NCOMP * i + c]
                        atot[c] += rab[NCOMP * i + c]
                norm = 0.0
                emax = 0.0
                amax = 0.0
                for c in range(NCOMP):
                    if fabs(total[c]) > norm:
                        norm = fabs(total[c])
                    if etot[c] > emax:
                        emax = etot[c]
                    if atot[c] > amax:
                        amax = atot[c]
                target = rel_tol * norm
                if abs_tol > target:
                    target = abs_tol
                if 100.0 * EPS * amax > target:
                    target = 100.0 * EPS * amax
                if emax <= target:
                    converged = True
                    break
                if refined >= max_refine:
                    break
                share = target / npan
                nsel = 0
                ibest = 0
                best = -1.0
                for i in range(npan):
                    score[i] = 0.0
                    for c in range(NCOMP):
                        if err[NCOMP * i + c] > score[i]:
                            score[i] = err[NCOMP * i + c]
                    sel[i] = score[i] > share
                    if sel[i]:
                        nsel += 1
                    if score[i] > best:
                        best = score[i]
                        ibest = i
                if nsel == 0:
                    sel[ibest] = 1
                    nsel = 1
                budget = max_refine - refined
                while nsel > budget:
                    # drop the smallest selected scores until within budget,
                    # matching a stable descending sort in the pure backend
                    ibest = -1
                    best = 0.0
                    for i in range(npan - 1, -1, -1):
                        if sel[i] and (ibest < 0 or score[i] < best):
                            best = score[i]
                            ibest = i
                    sel[ibest] = 0
                    nsel -= 1
                m = 0
                for i in range(npan):
                    if sel[i]:
                        mid = 0.5 * (pa[i] + pb[i])
                        na[m] = pa[i]
                        nb[m] = mid
                        _gk_panel(&st, u, x, zplus, na[m], nb[m], &nval[NCOMP * m],
                                  &nerr[NCOMP * m], &nrab[NCOMP * m])
                        m += 1
                        na[m] = mid
                        nb[m] = pb[i]
                        _gk_panel(&st, u, x, zplus, na[m], nb[m], &nval[NCOMP * m],
                                  &nerr[NCOMP * m], &nrab[NCOMP * m])
                        m += 1
                    else:
                        na[m] = pa[i]
                        nb[m] = pb[i]
                        for c in range(NCOMP):
                            nval[NCOMP * m + c] = val[NCOMP * i + c]
                            nerr[NCOMP * m + c] = err[NCOMP * i + c]
                            nrab[NCOMP * m + c] = rab[NCOMP * i + c]
                        m += 1
                tmp = pa; pa = na; na = tmp
                tmp = pb; pb = nb; nb = tmp
                tmp = val; val = nval; nval = tmp
                tmp = err; err = nerr; nerr = tmp
                tmp = rab; rab = nrab; nrab = tmp
                npan = m
                neval += 30 * nsel
                refined += nsel
        scale = exp(-u * zplus)
        out = np.array([total[0], total[1], total[2], total[3]]) * scale
        return out, emax * scale, int(neval), bool(converged)
    finally:
        free(pa); free(pb); free(val); free(err); free(rab); free(na); free(nb)
        free(nval); free(nerr); free(nrab); free(sel); free(score)
