"""Van der Waals potentials and forces between two ground-state atoms.

The two-atom potential in the presence of a planar stack splits into

    U = U0 + U1 + U2,

the free (bulk) interaction ``U0``, the cross term ``U1`` between bulk
and scattering Green tensors and the pure scattering term ``U2``. On the
imaginary frequency axis each part is a single u-integral,

    U1 = -(1/pi)   int du a_A a_B sum_ij (u^2 G0)_ij (u^2 G1)_ij,
    U2 = -(1/2pi)  int du a_A a_B sum_ij (u^2 G1)_ij^2,

whose integrand needs one transverse-wavenumber integral for ``u^2 G1``.
The closed-form limits (perfect plates, half spaces, retarded and
nonretarded) are collected in :func:`asymptotic_breakdown`. They are coded
independently of the full numerics so the two can be compared.

Units: hbar = c = eps0 = 1; frequencies in units of the atomic transition
frequency, lengths in units of ``c`` over that frequency.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .greens import (Geometry, LayerStack, bulk_green_u2, scattering_elements_u2)
from .materials import (PERFECT_CONDUCTOR, PERFECT_PERMEABLE, AtomModel, MaterialModel,
                        permeability_iu, permittivity_iu, polarizability_iu,
                        refractive_index_iu)
from .quadrature import QuadratureError, QuadResult, integrate_iterated_2d, \
    integrate_interval, integrate_semi_infinite
from .specfun import ABParams, a_integral, b_integral

DEFAULT_TOL = 1e-8
COEFF_TOL = 1e-10
INNER_FACTOR = 1e-2
INNER_FLOOR = 1e-12
MAX_PANELS = 2000
Q_MAX_REFINE = 4000
EXP_CUTOFF = 700.0
FORCE_STEP = 1e-4

FREE_SPACE = MaterialModel.vacuum()
PI3 = math.pi ** 3

AtomsLike = Union[AtomModel, Sequence[AtomModel]]


class ConvergenceError(QuadratureError):
    """A potential integral missed its tolerance.

    ``partial`` holds whatever was computed (a float or a
    :class:`PotentialBreakdown` with ``converged=False``).
    """

    def __init__(self, message: str, partial=None, result: Optional[QuadResult] = None):
        super().__init__(message, result)
        self.partial = partial


@dataclass(frozen=True)
class PotentialBreakdown:
    """Free, cross and scattering parts of the two-atom potential.

    ``total`` is formed from the three parts on construction, so
    ``total == u0 + u1 + u2`` holds exactly.
    """

    u0: float
    u1: float
    u2: float
    err0: float = 0.0
    err1: float = 0.0
    err2: float = 0.0
    converged: bool = True
    detail: str = ""
    total: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total", self.u0 + self.u1 + self.u2)

    @property
    def body(self) -> float:
        """Body-induced part ``u1 + u2``."""
        return self.u1 + self.u2

    @property
    def ratio(self) -> float:
        """``total / u0`` written as ``1 + (u1 + u2)/u0`` to keep digits."""
        return 1.0 + (self.u1 + self.u2) / self.u0

    @property
    def ratio_error(self) -> float:
        """Error bound on :attr:`ratio` from the three quadrature estimates."""
        b = abs(self.u1 + self.u2)
        return (self.err1 + self.err2) / abs(self.u0) + b * self.err0 / self.u0 ** 2


@dataclass(frozen=True)
class AsymptoticCoefficients:
    """Coefficients of the asymptotic power laws.

    Attributes
    ----------
    c_r, c_nr : float
        Retarded and nonretarded free-space coefficients (for the medium
        in which the atoms are embedded).
    c1_nr, c2_nr : float or None
        Dielectric half-space coefficients; ``None`` without a body.
    c3_nr : float or None
        Magnetic half-space coefficient. It is negative when the static
        permeability lies between 1 and 3.
    """

    c_r: float
    c_nr: float
    c1_nr: Optional[float] = None
    c2_nr: Optional[float] = None
    c3_nr: Optional[float] = None


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _pair(atoms: AtomsLike) -> Tuple[AtomModel, AtomModel]:
    if isinstance(atoms, AtomModel):
        return atoms, atoms
    a, b = atoms
    if not (isinstance(a, AtomModel) and isinstance(b, AtomModel)):
        raise TypeError("atoms must be AtomModel instances")
    return a, b


def _alpha2(atoms, u):
    a, b = atoms
    return np.asarray(polarizability_iu(a, u)) * np.asarray(polarizability_iu(b, u))


def _min_frequency(atoms) -> float:
    return min(a.min_frequency for a in atoms)


def _check(res: QuadResult, what: str, strict: bool, partial=None):
    if not res.converged and strict:
        raise ConvergenceError(
            f"{what} did not converge (error estimate {res.error_estimate:.3g}"
            + (f"; {res.detail}" if res.detail else "") + ")",
            partial if partial is not None else res.value, res)


# ---------------------------------------------------------------------------
# coefficients
# ---------------------------------------------------------------------------

def _coefficient_integral(fn: Callable, scale: float, tol: float) -> float:
    res = integrate_semi_infinite(fn, scale, rel_tol=tol, abs_tol=0.0, max_panels=MAX_PANELS)
    _check(res, "coefficient integral", True)
    return res.value


def asymptotic_coefficients(atoms: AtomsLike, medium: MaterialModel = FREE_SPACE,
                            body: Optional[MaterialModel] = None,
                            tol: float = COEFF_TOL) -> AsymptoticCoefficients:
    """Evaluate ``C_r``, ``C_nr`` and, with a ``body``, the half-space coefficients.

    Parameters
    ----------
    atoms : AtomModel or pair of AtomModel
    medium : MaterialModel
        Host medium of the atoms for ``c_r`` and ``c_nr``.
    body : MaterialModel, optional
        Half-space material. A perfect conductor gives the ``eps -> inf``
        values of ``c1_nr`` and ``c2_nr``; ``c3_nr`` needs a pointwise
        permeability.
    tol : float
        Relative tolerance of the frequency integrals.

    Examples
    --------
    >>> c = asymptotic_coefficients(AtomModel.two_level())
    >>> round(c.c_r * 64 * math.pi ** 3 / 23, 12)
    0.444444444444
    """
    atoms = _pair(atoms)
    if medium.is_perfect:
        raise ValueError("the host medium must have a pointwise response")
    w = _min_frequency(atoms)
    a0 = float(_alpha2(atoms, 0.0))
    n0 = refractive_index_iu(medium, 0.0)
    e0 = permittivity_iu(medium, 0.0)
    c_r = 23.0 / (64.0 * PI3) * a0 / (n0 * e0 * e0)
    c_nr = 3.0 / (16.0 * PI3) * _coefficient_integral(
        lambda u: _alpha2(atoms, u) / np.asarray(permittivity_iu(medium, u)) ** 2, w, tol)
    c1 = c2 = c3 = None
    if body is not None:
        if body.kind == PERFECT_CONDUCTOR:
            def rho(u):
                return np.ones_like(u)
        elif body.kind == PERFECT_PERMEABLE:
            rho = None
        else:
            def rho(u):
                e = np.asarray(permittivity_iu(body, u))
                return (e - 1.0) / (e + 1.0)
        if rho is not None:
            c1 = 1.0 / (16.0 * PI3) * _coefficient_integral(
                lambda u: _alpha2(atoms, u) * rho(u), w, tol)
            c2 = 3.0 / (16.0 * PI3) * _coefficient_integral(
                lambda u: _alpha2(atoms, u) * rho(u) ** 2, w, tol)
        if not body.is_perfect:
            def g3(u):
                m = np.asarray(permeability_iu(body, u))
                return u * u * _alpha2(atoms, u) * (m - 1.0) * (m - 3.0) / (m + 1.0)
            if np.any(np.asarray(permeability_iu(body, np.array([0.0, 1.0]))) != 1.0):
                c3 = 1.0 / (64.0 * PI3) * _coefficient_integral(g3, w, tol)
            else:
                c3 = 0.0
    return AsymptoticCoefficients(c_r, c_nr, c1, c2, c3)


# ---------------------------------------------------------------------------
# bulk potential
# ---------------------------------------------------------------------------

def u_bulk_result(medium: MaterialModel, atoms: AtomsLike, l: float,
                  tol: float = DEFAULT_TOL) -> QuadResult:
    """Bulk two-atom potential as a :class:`QuadResult` (see :func:`u_bulk`)."""
    if not l > 0:
        raise ValueError("separation l must be positive")
    if medium.is_perfect:
        raise ValueError("atoms cannot be embedded in a perfect reflector")
    atoms = _pair(atoms)
    pre = -1.0 / (16.0 * PI3 * l ** 6)

    def f(u):
        n = np.asarray(refractive_index_iu(medium, u))
        e = np.asarray(permittivity_iu(medium, u))
        x = n * u * l
        poly = 3.0 + x * (6.0 + x * (5.0 + x * (2.0 + x)))
        return pre * _alpha2(atoms, u) / (e * e) * np.exp(-2.0 * x) * poly

    n0 = refractive_index_iu(medium, 0.0)
    scale = min(1.0 / (2.0 * n0 * l), _min_frequency(atoms))
    return integrate_semi_infinite(f, scale, rel_tol=tol, abs_tol=0.0, max_panels=MAX_PANELS)


def u_bulk(medium: MaterialModel, atoms: AtomsLike, l: float,
           tol: float = DEFAULT_TOL) -> float:
    """Two-atom potential inside an infinite homogeneous medium.

    Parameters
    ----------
    medium : MaterialModel
        Host medium (pointwise response).
    atoms : AtomModel or pair of AtomModel
    l : float
        Interatomic distance, > 0.
    tol : float
        Relative tolerance.

    Returns
    -------
    float
        Negative energy.

    Examples
    --------
    >>> u = u_bulk(MaterialModel.vacuum(), AtomModel.two_level(), 1e-3)
    >>> c = asymptotic_coefficients(AtomModel.two_level())
    >>> abs(u / (-c.c_nr / 1e-18) - 1) < 0.01
    True
    """
    res = u_bulk_result(medium, atoms, l, tol)
    _check(res, "bulk potential integral", True)
    return res.value


def u0_free(atoms: AtomsLike, geom: Geometry, tol: float = DEFAULT_TOL) -> float:
    """Free-space part ``U0`` for the separation of ``geom``."""
    return u_bulk(FREE_SPACE, atoms, geom.l, tol)


# ---------------------------------------------------------------------------
# body-induced parts
# ---------------------------------------------------------------------------

def _inner_tol(tol: float) -> float:
    return max(INNER_FACTOR * tol, INNER_FLOOR)


def _body_result(stack: LayerStack, atoms, geom: Geometry, tol: float,
                 max_panels: int = MAX_PANELS) -> Tuple[QuadResult, list]:
    """Integrate ``[U1, U2, err1, err2]`` densities over u."""
    geom.check_layered()
    r_a, r_b = geom.r_a, geom.r_b
    X, zp, l = geom.X, geom.zplus, geom.l
    qtol = _inner_tol(tol)
    failures: list = []

    def f(us):
        out = np.zeros((len(us), 4))
        aa = _alpha2(atoms, us)
        for i, u in enumerate(us):
            if u * zp > EXP_CUTOFF:
                continue
            el = scattering_elements_u2(stack, X, zp, float(u), qtol, 0.0, Q_MAX_REFINE)
            if not el.converged and not failures:
                failures.append(float(u))
            g1 = el.tensor(X)
            g0 = bulk_green_u2(FREE_SPACE, r_a, r_b, float(u))
            out[i, 0] = -aa[i] / math.pi * float(np.sum(g0 * g1))
            out[i, 1] = -aa[i] / (2.0 * math.pi) * float(np.sum(g1 * g1))
            out[i, 2] = aa[i] / math.pi * float(np.abs(g0).sum()) * el.error
            out[i, 3] = aa[i] / math.pi * float(np.abs(g1).sum()) * el.error
        return out

    scale = min(1.0 / (2.0 * l), 1.0 / zp, _min_frequency(atoms))
    res = integrate_semi_infinite(f, scale, rel_tol=tol, abs_tol=0.0, max_panels=max_panels,
                                  monitor=[True, True, False, False])
    return res, failures


def u_total(stack: LayerStack, atoms: AtomsLike, geom: Geometry,
            tol: float = DEFAULT_TOL, strict: bool = True) -> PotentialBreakdown:
    """Full two-atom potential above a planar stack, split into its parts.

    Parameters
    ----------
    stack : LayerStack
    atoms : AtomModel or pair of AtomModel
        Atom A sits at ``(geom.x_a, geom.z_a)``, atom B at ``(geom.x_b, geom.z_b)``.
    geom : Geometry
    tol : float
        Relative tolerance of the u-integrals; the inner wavenumber
        integrals run at a hundredth of it (not below 1e-12).
    strict : bool
        Raise :class:`ConvergenceError` on failure (default). With
        ``strict=False`` the breakdown is returned with ``converged=False``.

    Examples
    --------
    >>> b = u_total(LayerStack.vacuum(), AtomModel.two_level(), Geometry.parallel(1e-3, 1.0))
    >>> b.u1 == b.u2 == 0.0 and b.total == b.u0 < 0
    True
    """
    atoms = _pair(atoms)
    r0 = u_bulk_result(FREE_SPACE, atoms, geom.l, tol)
    if stack.is_vacuum:
        out = PotentialBreakdown(r0.value, 0.0, 0.0, r0.error_estimate, 0.0, 0.0, r0.converged)
        if not r0.converged and strict:
            raise ConvergenceError("free-space integral did not converge", out, r0)
        return out
    res, failures = _body_result(stack, atoms, geom, tol)
    v = res.value
    ce = res.component_errors
    detail = res.detail
    if failures:
        detail = f"wavenumber integral missed tolerance at u = {failures[0]!r}"
    ok = r0.converged and res.converged and not failures
    out = PotentialBreakdown(r0.value, float(v[0]), float(v[1]), r0.error_estimate,
                             float(ce[0] + abs(v[2])), float(ce[1] + abs(v[3])), ok, detail)
    if not ok and strict:
        raise ConvergenceError("potential integral did not converge"
                               + (f": {detail}" if detail else ""), out, res)
    return out


def u1_cross(stack: LayerStack, atoms: AtomsLike, geom: Geometry,
             tol: float = DEFAULT_TOL) -> float:
    """Cross term ``U1`` between free and scattered fields."""
    return u_total(stack, atoms, geom, tol).u1


def u2_scatter(stack: LayerStack, atoms: AtomsLike, geom: Geometry,
               tol: float = DEFAULT_TOL) -> float:
    """Pure scattering term ``U2``."""
    return u_total(stack, atoms, geom, tol).u2


def u_single_atom(stack: LayerStack, atom: AtomModel, position,
                  tol: float = DEFAULT_TOL, strict: bool = True) -> float:
    """Single-atom (Casimir-Polder) potential above a planar stack.

    Parameters
    ----------
    position : float or (x, z)
        Height above the top interface, or a point in the xz-plane (only
        the height matters).

    Examples
    --------
    >>> u_single_atom(LayerStack.vacuum(), AtomModel.two_level(), 0.5)
    0.0
    """
    z = float(position[-1]) if np.ndim(position) else float(position)
    if not z > 0:
        raise ValueError("the atom must sit above the stack (z > 0)")
    if stack.is_vacuum:
        return 0.0
    zp = 2.0 * z
    qtol = _inner_tol(tol)
    failures: list = []

    def f(us):
        out = np.zeros(len(us))
        al = np.asarray(polarizability_iu(atom, us))
        for i, u in enumerate(us):
            if u * zp > EXP_CUTOFF:
                continue
            el = scattering_elements_u2(stack, 0.0, zp, float(u), qtol, 0.0, Q_MAX_REFINE)
            if not el.converged and not failures:
                failures.append(float(u))
            out[i] = al[i] / (2.0 * math.pi) * (el.xx + el.yy + el.zz)
        return out

    scale = min(1.0 / zp, atom.min_frequency)
    res = integrate_semi_infinite(f, scale, rel_tol=tol, abs_tol=0.0, max_panels=MAX_PANELS)
    if (failures or not res.converged) and strict:
        raise ConvergenceError("single-atom potential did not converge", res.value, res)
    return res.value


# ---------------------------------------------------------------------------
# forces
# ---------------------------------------------------------------------------

FORCE_PARTS = ("total", "pair", "body", "free")


def _energy_for_force(stack, atoms, which, parts, tol):
    if parts == "free":
        return lambda g: u_bulk(FREE_SPACE, atoms, g.l, tol)

    def fn(g):
        b = u_total(stack, atoms, g, tol)
        if parts == "body":
            return b.u1 + b.u2
        if parts == "pair":
            return b.total
        atom = atoms[0] if which == "A" else atoms[1]
        z = g.z_a if which == "A" else g.z_b
        return b.total + u_single_atom(stack, atom, z, tol)

    return fn


@dataclass(frozen=True)
class ForceResult:
    """Finite-difference force with an error estimate.

    ``error`` is ``|D(h/2) - D(h)|`` for the two central differences, an
    upper bound on the Richardson correction that also picks up
    quadrature noise amplified by the step.
    """

    value: np.ndarray
    error: np.ndarray


def force_estimate(which: str, stack: LayerStack, atoms: AtomsLike, geom: Geometry,
                   tol: float = DEFAULT_TOL, step: Optional[float] = None,
                   parts: str = "total") -> ForceResult:
    """Like :func:`force` but also returns a per-component error estimate."""
    if which not in ("A", "B"):
        raise ValueError("which must be 'A' or 'B'")
    if parts not in FORCE_PARTS:
        raise ValueError(f"parts must be one of {FORCE_PARTS}")
    atoms = _pair(atoms)
    if step is None:
        lengths = [geom.l] if stack.is_vacuum else [geom.l, geom.z_a, geom.z_b]
        step = FORCE_STEP * min(lengths)
    if not step > 0:
        raise ValueError("step must be positive")
    energy = _energy_for_force(stack, atoms, which, parts, tol)
    value = np.zeros(3)
    error = np.zeros(3)
    for axis in (0, 2):
        vals = {}
        for h in (step, -step, 0.5 * step, -0.5 * step):
            vals[h] = energy(geom.moved(which, axis, h))
        d1 = (vals[step] - vals[-step]) / (2 * step)
        d2 = (vals[0.5 * step] - vals[-0.5 * step]) / step
        value[axis] = -(4.0 * d2 - d1) / 3.0
        # quadrature noise would scale like 1/h and so shows up in d2 - d1 as well
        error[axis] = abs(d2 - d1)
    return ForceResult(value, error)


def force(which: str, stack: LayerStack, atoms: AtomsLike, geom: Geometry,
          tol: float = DEFAULT_TOL, step: Optional[float] = None,
          parts: str = "total") -> np.ndarray:
    """Force on atom ``which`` ('A' or 'B') as minus the position gradient.

    Central differences of step ``h`` and ``h/2`` are combined by one
    Richardson extrapolation. The y-component vanishes by symmetry.

    Parameters
    ----------
    step : float, optional
        Difference step; defaults to ``1e-4 * min(l, z_A, z_B)``.
    parts : {'total', 'pair', 'body', 'free'}
        Energy being differentiated: two-atom potential plus the moving
        atom's single-atom potential (the other atom's single-atom term
        does not depend on this position), the two-atom potential only,
        its body-induced part ``U1 + U2`` only, or the free part ``U0``.

    Returns
    -------
    numpy.ndarray
        ``(F_x, 0, F_z)``.

    Examples
    --------
    >>> g = Geometry(0.0, 1.0, 1e-3, 1.0)
    >>> f = force('A', LayerStack.vacuum(), AtomModel.two_level(), g, parts='pair')
    >>> bool(f[0] > 0)
    True
    """
    return force_estimate(which, stack, atoms, geom, tol, step, parts).value


# ---------------------------------------------------------------------------
# closed-form limits
# ---------------------------------------------------------------------------

CASES = (
    "plate_retarded_general",
    "plate_retarded_zA_ll_zB",
    "plate_nonretarded_general",
    "plate_nonretarded_parallel",
    "plate_nonretarded_vertical",
    "halfspace_retarded_u1",
    "halfspace_retarded_u2",
    "halfspace_nonretarded_dielectric",
    "halfspace_nonretarded_magnetic",
)


def permeable_vertical_threshold() -> float:
    """Ratio ``z_B/z_A`` at which the body-induced nonretarded potential of
    two vertically aligned atoms above a perfectly permeable plate changes
    sign (about 14.82)."""
    return 1.0 + 2.0 / (1.5 ** (1.0 / 3.0) - 1.0)


def _plate_sign(body: MaterialModel) -> float:
    if body.kind == PERFECT_CONDUCTOR:
        return 1.0
    if body.kind == PERFECT_PERMEABLE:
        return -1.0
    raise ValueError("this case needs a perfect conductor or a perfectly permeable plate")


def static_reflection(body: MaterialModel, v):
    """Static reflection coefficients ``(r_s(v), r_p(v))`` of a half space.

    ``v >= 1`` is the normalised perpendicular wavenumber. Perfect plates
    give constant coefficients.
    """
    v = np.asarray(v, dtype=float)
    if body.kind == PERFECT_CONDUCTOR:
        return -np.ones_like(v), np.ones_like(v)
    if body.kind == PERFECT_PERMEABLE:
        return np.ones_like(v), -np.ones_like(v)
    e = permittivity_iu(body, 0.0)
    m = permeability_iu(body, 0.0)
    root = np.sqrt(e * m - 1.0 + v * v)
    return (m * v - root) / (m * v + root), (e * v - root) / (e * v + root)


def halfspace_retarded_u1(atoms: AtomsLike, geom: Geometry, body: MaterialModel,
                          tol: float = 1e-10) -> float:
    """Retarded cross term over a half space from the exponential-Bessel moments."""
    atoms = _pair(atoms)
    geom.check_layered()
    a0 = float(_alpha2(atoms, 0.0))
    X, Z, zp, l = abs(geom.X), geom.Z, geom.zplus, geom.l
    X2, Z2, l2 = X * X, Z * Z, l * l

    def one(v):
        p = ABParams(l + v * zp, X * math.sqrt(v * v - 1.0))
        ap = {n: a_integral(n, "+", p) for n in (3, 4, 5)}
        am = {n: a_integral(n, "-", p) for n in (3, 4, 5)}
        bb = {n: b_integral(n, p) for n in (3, 4, 5)}
        rs, rp = static_reflection(body, v)
        tp = v * v * (Z2 * am[5] + (Z2 - 2 * X2) * (am[4] / l + am[3] / l2)
                      + l2 * ap[5] + l * ap[4] + ap[3]) \
            + 2.0 * (v * v - 1.0) * (X2 * bb[5] + (X2 - 2 * Z2) * (bb[4] / l + bb[3] / l2))
        ts = Z2 * ap[5] + (Z2 - 2 * X2) * (ap[4] / l + ap[3] / l2) + l2 * am[5] + l * am[4] + am[3]
        return float(tp * rp - ts * rs)

    res = integrate_semi_infinite(one, 1.0 + l / zp, rel_tol=tol, abs_tol=0.0,
                                  max_panels=MAX_PANELS, lower=1.0, vectorize=False)
    _check(res, "retarded cross-term v-integral", True)
    return a0 / (32.0 * PI3 * l ** 3) * res.value


def _m_all(v: float, vp: float, x: float, zp: float, tol: float) -> np.ndarray:
    rate = (v + vp) * zp
    beta = abs(x) * math.sqrt(v * v - 1.0)
    betap = abs(x) * math.sqrt(vp * vp - 1.0)
    if beta == 0.0 and betap == 0.0:
        return np.array([720.0 / rate ** 7, 0.0, 0.0])
    from . import _kernels
    from .specfun import envelope_cutoff
    upper = envelope_cutoff(6, rate)

    def f(u):
        jb = np.stack(_kernels.bessel_j012(beta * u), axis=-1)
        jp = np.stack(_kernels.bessel_j012(betap * u), axis=-1)
        return (u ** 6 * np.exp(-rate * u))[:, None] * jb * jp

    freq = max(beta, betap)
    breaks = None
    if upper * freq / math.pi > 4:
        breaks = math.pi / freq * np.arange(1, int(upper * freq / math.pi) + 1)
    scale = 720.0 / rate ** 7
    res = integrate_interval(f, 0.0, upper, rel_tol=tol, abs_tol=tol * scale,
                             max_panels=20000, breakpoints=breaks)
    _check(res, "M_n moment", True)
    return res.value


def halfspace_retarded_u2(atoms: AtomsLike, geom: Geometry, body: MaterialModel,
                          small_x: bool = False, tol: float = 1e-8) -> float:
    """Retarded scattering term over a half space as a double v-integral.

    With ``small_x=True`` (or ``X = 0``) the Bessel moments take their
    ``X << Z+`` form. Otherwise every integrand point needs three moment
    quadratures, which is slow.
    """
    atoms = _pair(atoms)
    geom.check_layered()
    a0 = float(_alpha2(atoms, 0.0))
    X, zp = (0.0 if small_x else abs(geom.X)), geom.zplus

    def f(v, vps):
        out = np.empty(len(vps))
        rs, rp = static_reflection(body, v)
        rs2, rp2 = static_reflection(body, vps)
        sv = math.sqrt(v * v - 1.0)
        for i, vp in enumerate(vps):
            m = _m_all(v, vp, X, zp, 1e-2 * tol)
            t0 = (rp * rp2[i] * (3 * v * v * vp * vp - 2 * (v * v + vp * vp) + 2)
                  + rs * rs2[i] - rs * rp2[i] * vp * vp - rp * rs2[i] * v * v)
            t1 = 4.0 * v * vp * sv * math.sqrt(vp * vp - 1.0) * rp * rp2[i]
            t2 = rs * rs2[i] + rp * rp2[i] * v * v * vp * vp + rs * rp2[i] * vp * vp \
                + rp * rs2[i] * v * v
            out[i] = t0 * m[0] + t1 * m[1] + t2 * m[2]
        return out

    res = integrate_iterated_2d(f, (1.0, math.inf), (1.0, math.inf), 1.0, 1.0,
                                rel_tol_inner=1e-2 * tol, rel_tol_outer=tol, abs_tol=0.0)
    _check(res, "retarded scattering double integral", True)
    return -a0 / (64.0 * PI3) * res.value


def asymptotic_breakdown(case: str, atoms: AtomsLike, geom: Geometry,
                         body: MaterialModel,
                         coeffs: Optional[AsymptoticCoefficients] = None,
                         small: bool = False) -> PotentialBreakdown:
    """Closed-form limit of the potential, split into ``U0``, ``U1``, ``U2``.

    Parameters
    ----------
    case : str
        One of :data:`CASES`.
    atoms : AtomModel or pair of AtomModel
    geom : Geometry
    body : MaterialModel
        Perfect plate for the ``plate_*`` cases, a half-space material
        otherwise.
    coeffs : AsymptoticCoefficients, optional
        Precomputed coefficients (computed on demand otherwise).
    small : bool
        Use the further reduced form where one exists: ``l << Z+`` for the
        dielectric case, ``X << Z+`` for the magnetic and retarded
        scattering cases.

    Examples
    --------
    >>> pc = MaterialModel.perfect_conductor()
    >>> b = asymptotic_breakdown('plate_retarded_zA_ll_zB', AtomModel.two_level(),
    ...                          Geometry.vertical(1.0, 100.0), pc)
    >>> round(b.ratio, 4)
    1.7391
    """
    if case not in CASES:
        raise ValueError(f"unknown case {case!r}; expected one of {CASES}")
    atoms = _pair(atoms)
    geom.check_layered()
    X, Z, zp, l, lp = geom.X, geom.Z, geom.zplus, geom.l, geom.lplus
    if case.startswith("plate_"):
        sign = _plate_sign(body)
    elif body.is_vacuum:
        raise ValueError("a half-space case needs a non-vacuum body")
    if coeffs is None:
        pointwise = None if body.is_perfect else body
        coeffs = asymptotic_coefficients(atoms, body=pointwise)
    cr, cnr = coeffs.c_r, coeffs.c_nr

    if case == "plate_retarded_general":
        u1 = sign * 32.0 / 23.0 * (X * X + 6 * l * l) / (l ** 3 * zp * (l + zp) ** 5) * cr
        return PotentialBreakdown(-cr / l ** 7, u1, -cr / zp ** 7)
    if case == "plate_retarded_zA_ll_zB":
        return PotentialBreakdown(-cr / l ** 7, sign * 6.0 / 23.0 * cr / l ** 7, -cr / l ** 7)
    if case == "plate_nonretarded_general":
        num = 4 * X ** 4 - 2 * Z * Z * zp * zp + X * X * (zp * zp + Z * Z)
        u1 = sign * num / (3.0 * l ** 5 * lp ** 5) * cnr
        return PotentialBreakdown(-cnr / l ** 6, u1, -cnr / lp ** 6)
    if case == "plate_nonretarded_parallel":
        if Z != 0:
            raise ValueError("parallel case needs z_A == z_B")
        s2 = l * l + zp * zp
        u1 = sign * (4 * l * l + zp * zp) / (3.0 * l ** 3 * s2 ** 2.5) * cnr
        return PotentialBreakdown(-cnr / l ** 6, u1, -cnr / s2 ** 3)
    if case == "plate_nonretarded_vertical":
        if X != 0:
            raise ValueError("vertical case needs x_A == x_B")
        u1 = -sign * 2.0 / (3.0 * zp ** 3 * l ** 3) * cnr
        return PotentialBreakdown(-cnr / l ** 6, u1, -cnr / zp ** 6)
    if case in ("halfspace_retarded_u1", "halfspace_retarded_u2"):
        u1 = halfspace_retarded_u1(atoms, geom, body)
        u2 = halfspace_retarded_u2(atoms, geom, body, small_x=small)
        return PotentialBreakdown(-cr / l ** 7, u1, u2)
    if case == "halfspace_nonretarded_dielectric":
        if coeffs.c1_nr is None or coeffs.c2_nr is None:
            raise ValueError("dielectric coefficients are missing")
        if small:
            u1 = (X * X - 2 * Z * Z) * coeffs.c1_nr / (l ** 5 * zp ** 3)
            return PotentialBreakdown(-cnr / l ** 6, u1, 0.0)
        num = 4 * X ** 4 - 2 * Z * Z * zp * zp + X * X * (Z * Z + zp * zp)
        return PotentialBreakdown(-cnr / l ** 6, num * coeffs.c1_nr / (l ** 5 * lp ** 5),
                                  -coeffs.c2_nr / lp ** 6)
    # halfspace_nonretarded_magnetic
    if coeffs.c3_nr is None:
        raise ValueError("the magnetic coefficient needs a pointwise permeability")
    if small:
        u1 = (2 * Z * Z - X * X) * coeffs.c3_nr / (2.0 * l ** 5 * zp)
    else:
        # l+ - Z+ written as X^2/(l+ + Z+)
        u1 = (Z * Z - 2 * X * X + 3 * zp * X * X / (lp + zp)) * coeffs.c3_nr / (l ** 5 * lp)
    return PotentialBreakdown(-cnr / l ** 6, u1, 0.0)


def u_asymptotic(case: str, atoms: AtomsLike, geom: Geometry, body: MaterialModel,
                 coeffs: Optional[AsymptoticCoefficients] = None,
                 small: bool = False) -> float:
    """Closed-form energy for ``case``.

    The ``halfspace_retarded_u1`` and ``halfspace_retarded_u2`` cases
    return only the named part; every other case returns the total.
    """
    atoms = _pair(atoms)
    if case == "halfspace_retarded_u1":
        return halfspace_retarded_u1(atoms, geom, body)
    if case == "halfspace_retarded_u2":
        return halfspace_retarded_u2(atoms, geom, body, small_x=small)
    return asymptotic_breakdown(case, atoms, geom, body, coeffs, small).total


def locate_sign_change(fn: Callable[[float], float], lo: float, hi: float,
                       rtol: float = 1e-4, max_iter: int = 100) -> float:
    """Bisect for a sign change of ``fn`` in ``[lo, hi]``.

    Raises
    ------
    ValueError
        If ``fn`` has the same sign at both ends.
    """
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError("no sign change in the bracket")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= rtol * abs(mid):
            break
    return 0.5 * (lo + hi)
