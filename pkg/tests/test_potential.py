import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from conftest import scattering_oracle
from vdwbody import potential
from vdwbody.greens import Geometry, LayerStack
from vdwbody.materials import AtomModel, MaterialModel, polarizability_iu
from vdwbody.potential import (CASES, ConvergenceError, PotentialBreakdown, asymptotic_breakdown,
                               asymptotic_coefficients, force, force_estimate,
                               halfspace_retarded_u1, halfspace_retarded_u2, locate_sign_change,
                               permeable_vertical_threshold, u0_free, u_asymptotic, u_bulk,
                               u_single_atom, u_total)

ATOM = AtomModel.two_level()
VAC = MaterialModel.vacuum()
PC = MaterialModel.perfect_conductor()
PM = MaterialModel.perfect_permeable()
DIEL = MaterialModel.drude_lorentz(3.0, 1.0, 0.001)
MAGN = MaterialModel.drude_lorentz(0.0, 1.0, 0.0, 3.0, 1.0, 0.001)


def free_u2g(d, u):
    """Vacuum u^2 G0 for separation vector d, written out independently."""
    r = np.linalg.norm(d)
    rr = np.outer(d, d) / r ** 2
    a = (u * u * r * r + u * r + 1) / r ** 2
    b = (u * u * r * r + 3 * u * r + 3) / r ** 2
    return math.exp(-u * r) / (4 * math.pi * r) * (a * np.eye(3) - b * rr)


# ------------------------------------------------------------ coefficients
def test_two_level_coefficients_closed_form():
    c = asymptotic_coefficients(ATOM)
    assert c.c_nr == pytest.approx(1.0 / (48.0 * math.pi ** 2), rel=1e-12)
    assert c.c_r == pytest.approx(23.0 / (64.0 * math.pi ** 3) * 4.0 / 9.0, rel=1e-15)
    assert c.c1_nr is None and c.c3_nr is None


def test_perfect_conductor_coefficients():
    c = asymptotic_coefficients(ATOM, body=PC)
    assert c.c1_nr == pytest.approx(c.c_nr / 3, rel=1e-12)
    assert c.c2_nr == pytest.approx(c.c_nr, rel=1e-12)
    assert c.c3_nr is None


def test_magnetic_coefficient_sign():
    # (mu-1)(mu-3) < 0 for 1 < mu < 3, so a weakly magnetic body gives C3 < 0
    weak = MaterialModel.constant(1.0, 2.0)
    strong = MaterialModel.constant(1.0, 5.0)
    assert asymptotic_coefficients(ATOM, body=weak).c3_nr < 0
    assert asymptotic_coefficients(ATOM, body=strong).c3_nr > 0
    assert asymptotic_coefficients(ATOM, body=DIEL).c3_nr == 0.0


# -------------------------------------------------------------------- bulk
@pytest.mark.parametrize("l", [1e-2, 0.3, 1.0, 5.0])
def test_bulk_against_green_tensor_oracle(l):
    d = np.array([l, 0.0, 0.0])
    f = lambda u: polarizability_iu(ATOM, u) ** 2 * np.sum(free_u2g(d, u) ** 2)
    ref = -1.0 / (2 * math.pi) * integrate.quad(f, 0, np.inf, epsabs=0, epsrel=1e-12, limit=500)[0]
    assert u_bulk(VAC, ATOM, l, tol=1e-10) == pytest.approx(ref, rel=1e-9)


def test_bulk_medium_reduction_retarded():
    r = u_bulk(MaterialModel.constant(4.0, 1.0), ATOM, 1e4) / u_bulk(VAC, ATOM, 1e4)
    assert r == pytest.approx(1.0 / 32.0, rel=1e-3)


def test_bulk_magnetic_medium_uses_inverse_square_permittivity():
    # mu^2/n^4 = 1/eps^2: a purely magnetic medium only slows the field
    m = MaterialModel.constant(1.0, 4.0)
    r = u_bulk(m, ATOM, 1e4) / u_bulk(VAC, ATOM, 1e4)
    assert r == pytest.approx(1.0 / 2.0, rel=1e-3)


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e3))
def test_bulk_is_attractive_and_between_limits(l):
    c = asymptotic_coefficients(ATOM)
    u = u_bulk(VAC, ATOM, l)
    assert u < 0
    assert abs(u) <= c.c_nr / l ** 6 * (1 + 1e-8)


def test_bulk_validation():
    with pytest.raises(ValueError):
        u_bulk(VAC, ATOM, 0.0)
    with pytest.raises(ValueError):
        u_bulk(PC, ATOM, 1.0)


# ------------------------------------------------------------- full model
def test_body_terms_against_scipy_oracle():
    g = Geometry(0.0, 0.2, 0.3, 0.25)
    d = g.r_a - g.r_b

    def dens(u):
        s = scattering_oracle(DIEL, g.X, g.zplus, u, rtol=1e-10)
        g1 = np.array([[s[0], 0, s[3]], [0, s[1], 0], [-s[3], 0, s[2]]])
        a2 = polarizability_iu(ATOM, u) ** 2
        return a2 * np.sum(free_u2g(d, u) * g1), a2 * np.sum(g1 * g1)

    kw = dict(epsabs=0, epsrel=1e-8, limit=200)
    u1 = -1 / math.pi * integrate.quad(lambda u: dens(u)[0], 0, np.inf, **kw)[0]
    u2 = -1 / (2 * math.pi) * integrate.quad(lambda u: dens(u)[1], 0, np.inf, **kw)[0]
    b = u_total(LayerStack.half_space(DIEL), ATOM, g)
    assert b.u1 == pytest.approx(u1, rel=1e-6)
    assert b.u2 == pytest.approx(u2, rel=1e-6)


def test_breakdown_bookkeeping():
    b = PotentialBreakdown(-2.0, 0.5, 0.25, 1e-9, 1e-9, 1e-9)
    assert b.total == -1.25 and b.body == 0.75 and b.ratio == pytest.approx(0.625)
    assert b.ratio_error > 0


def test_vacuum_stack_gives_free_potential():
    g = Geometry(0.0, 0.4, 0.3, 0.5)
    b = u_total(LayerStack.vacuum(), ATOM, g)
    assert b.u1 == b.u2 == 0.0
    assert b.total == u0_free(ATOM, g)


@pytest.mark.parametrize("body", [PC, PM])
@pytest.mark.parametrize("g", [Geometry(0.0, 1e-4, 3e-4, 2e-4), Geometry.vertical(1e-4, 5e-4),
                               Geometry.parallel(2e-4, 1e-4)])
def test_perfect_plate_nonretarded_limit(body, g):
    b = u_total(LayerStack.half_space(body), ATOM, g)
    a = asymptotic_breakdown("plate_nonretarded_general", ATOM, g, body)
    assert b.u1 == pytest.approx(a.u1, rel=2e-3)
    assert b.u2 == pytest.approx(a.u2, rel=2e-3)


@pytest.mark.parametrize("body", [PC, PM])
def test_perfect_plate_retarded_limit(body):
    g = Geometry(0.0, 200.0, 150.0, 300.0)
    b = u_total(LayerStack.half_space(body), ATOM, g)
    a = asymptotic_breakdown("plate_retarded_general", ATOM, g, body)
    assert b.u1 == pytest.approx(a.u1, rel=2e-2)
    assert b.u2 == pytest.approx(a.u2, rel=2e-2)


@pytest.mark.parametrize("body", [PC, PM, MaterialModel.constant(4.0, 1.0), MaterialModel.constant(1.0, 5.0)])
def test_retarded_halfspace_v_integrals(body):
    g = Geometry(0.0, 50.0, 0.0, 120.0)
    b = u_total(LayerStack.half_space(body), ATOM, g)
    assert halfspace_retarded_u1(ATOM, g, body) == pytest.approx(b.u1, rel=2e-2)
    assert halfspace_retarded_u2(ATOM, g, body, small_x=True) == pytest.approx(b.u2, rel=2e-2)


def test_dielectric_nonretarded_closed_form():
    g = Geometry.parallel(1e-4, 5e-4)
    b = u_total(LayerStack.half_space(DIEL), ATOM, g)
    a = asymptotic_breakdown("halfspace_nonretarded_dielectric", ATOM, g, DIEL)
    assert b.body == pytest.approx(a.body, rel=1e-3)


def test_magnetic_nonretarded_closed_form_converges_with_scale():
    coeffs = asymptotic_coefficients(ATOM, body=MAGN)
    devs = []
    for s in (1e-1, 1e-2):
        g = Geometry.parallel(1e-3 * s, 5e-3 * s)
        b = u_total(LayerStack.half_space(MAGN), ATOM, g)
        a = asymptotic_breakdown("halfspace_nonretarded_magnetic", ATOM, g, MAGN, coeffs)
        devs.append(abs(b.body / a.body - 1))
    assert devs[1] < 0.2 * devs[0] and devs[1] < 2e-3


def test_ratio_independent_of_dipole_scale():
    g = Geometry.parallel(0.05, 0.01)
    stack = LayerStack.half_space(DIEL)
    r1 = u_total(stack, ATOM, g).ratio
    r2 = u_total(stack, AtomModel.two_level(1.0, 3.7), g).ratio
    assert r2 == pytest.approx(r1, rel=1e-12)


def test_exchange_symmetry_distinct_atoms():
    a, b_atom = AtomModel.two_level(), AtomModel.from_pairs([(2.0, 0.4)])
    stack = LayerStack.half_space(MAGN)
    g = Geometry(0.0, 0.1, 0.2, 0.4)
    b1 = u_total(stack, (a, b_atom), g)
    b2 = u_total(stack, (b_atom, a), g.swapped())
    assert b1.total == pytest.approx(b2.total, rel=1e-8)


def test_nonconvergence_strict_and_lenient(monkeypatch):
    # a requested tolerance below roundoff is floored, so starve the panel budget instead
    monkeypatch.setattr(potential, "MAX_PANELS", 0)
    g = Geometry.parallel(1e-3, 0.01)
    stack = LayerStack.half_space(DIEL)
    with pytest.raises(ConvergenceError) as info:
        u_total(stack, ATOM, g, tol=1e-12)
    assert isinstance(info.value.partial, PotentialBreakdown)
    b = u_total(stack, ATOM, g, tol=1e-12, strict=False)
    assert not b.converged and math.isfinite(b.ratio)


def test_layered_geometry_required():
    with pytest.raises(ValueError):
        u_total(LayerStack.half_space(DIEL), ATOM, Geometry(0.0, -1.0, 1.0, 1.0))


# -------------------------------------------------------------- one atom
def test_single_atom_casimir_polder_limits():
    stack = LayerStack.half_space(PC)
    z = 1e3
    cp = -3.0 * ATOM.static_polarizability / (32.0 * math.pi ** 2 * z ** 4)
    assert u_single_atom(stack, ATOM, z) == pytest.approx(cp, rel=2e-3)
    r = u_single_atom(stack, ATOM, 1e-3) / u_single_atom(stack, ATOM, 2e-3)
    assert r == pytest.approx(8.0, rel=2e-3)


def test_single_atom_signs():
    assert u_single_atom(LayerStack.half_space(DIEL), ATOM, 0.1) < 0
    assert u_single_atom(LayerStack.half_space(PM), ATOM, 0.1) > 0
    assert u_single_atom(LayerStack.half_space(DIEL), ATOM, (3.0, 0.1)) == \
        u_single_atom(LayerStack.half_space(DIEL), ATOM, 0.1)


# ---------------------------------------------------------------- forces
def test_free_forces_are_opposite_and_scale():
    g = Geometry(0.0, 1.0, 1e-3, 1.0)
    c = asymptotic_coefficients(ATOM)
    fa = force("A", LayerStack.vacuum(), ATOM, g, parts="pair")
    fb = force("B", LayerStack.vacuum(), ATOM, g, parts="pair")
    assert np.allclose(fa + fb, 0.0, atol=1e-9 * abs(fa[0]))
    assert fa[0] == pytest.approx(6 * c.c_nr / 1e-3 ** 7, rel=1e-3)
    assert fa[1] == 0.0


def test_force_matches_closed_form_derivative():
    # vertical pair above a conductor: d/dz_A of the nonretarded closed form
    g = Geometry.vertical(1e-4, 2e-4)
    stack = LayerStack.half_space(PC)
    est = force_estimate("A", stack, ATOM, g, parts="pair")
    h = 1e-9
    e = lambda dz: asymptotic_breakdown("plate_nonretarded_general", ATOM, g.moved("A", 2, dz), PC).total
    ref = -(e(h) - e(-h)) / (2 * h)
    assert est.value[2] == pytest.approx(ref, rel=5e-3)
    assert np.all(est.error >= 0)


def test_force_validation():
    g = Geometry(0.0, 1.0, 1e-3, 1.0)
    with pytest.raises(ValueError):
        force("C", LayerStack.vacuum(), ATOM, g)
    with pytest.raises(ValueError):
        force("A", LayerStack.vacuum(), ATOM, g, parts="everything")
    with pytest.raises(ValueError):
        force("A", LayerStack.vacuum(), ATOM, g, step=0.0)


# -------------------------------------------------------- closed forms
def test_threshold_constant():
    assert permeable_vertical_threshold() == pytest.approx(14.82, abs=5e-3)


def test_closed_form_vertical_threshold_is_exact():
    za = 1.0
    f = lambda r: asymptotic_breakdown("plate_nonretarded_vertical", ATOM, Geometry(0.0, za, 0.0, r * za), PM).body
    assert locate_sign_change(f, 10.0, 20.0, rtol=1e-12) == pytest.approx(permeable_vertical_threshold(), rel=1e-10)


def test_parallel_and_vertical_specialise_general_form():
    for body in (PC, PM):
        gp = Geometry.parallel(0.3, 0.2)
        gv = Geometry.vertical(0.2, 0.3)
        gen = lambda g: asymptotic_breakdown("plate_nonretarded_general", ATOM, g, body)
        par = asymptotic_breakdown("plate_nonretarded_parallel", ATOM, gp, body)
        ver = asymptotic_breakdown("plate_nonretarded_vertical", ATOM, gv, body)
        assert par.total == pytest.approx(gen(gp).total, rel=1e-13)
        assert ver.total == pytest.approx(gen(gv).total, rel=1e-13)


def test_retarded_far_source_limit():
    g = Geometry.vertical(1.0, 1e5)
    gen = asymptotic_breakdown("plate_retarded_general", ATOM, g, PC)
    lim = asymptotic_breakdown("plate_retarded_zA_ll_zB", ATOM, g, PC)
    assert gen.ratio == pytest.approx(lim.ratio, rel=1e-4)
    assert lim.ratio == pytest.approx(40.0 / 23.0, rel=1e-12)
    lim_m = asymptotic_breakdown("plate_retarded_zA_ll_zB", ATOM, g, PM)
    assert lim_m.ratio == pytest.approx(52.0 / 23.0, rel=1e-12)


def test_small_offset_forms():
    g = Geometry(0.0, 1.0, 1e-3, 1.0)
    full = asymptotic_breakdown("halfspace_nonretarded_dielectric", ATOM, g, DIEL)
    small = asymptotic_breakdown("halfspace_nonretarded_dielectric", ATOM, g, DIEL, small=True)
    assert small.u1 == pytest.approx(full.u1, rel=1e-4)
    fm = asymptotic_breakdown("halfspace_nonretarded_magnetic", ATOM, g, MAGN)
    sm = asymptotic_breakdown("halfspace_nonretarded_magnetic", ATOM, g, MAGN, small=True)
    assert sm.u1 == pytest.approx(fm.u1, rel=1e-4)


def test_case_validation():
    g = Geometry(0.0, 1.0, 0.3, 1.2)
    assert len(CASES) == 9
    with pytest.raises(ValueError):
        asymptotic_breakdown("nope", ATOM, g, PC)
    with pytest.raises(ValueError):
        asymptotic_breakdown("plate_nonretarded_parallel", ATOM, g, PC)
    with pytest.raises(ValueError):
        asymptotic_breakdown("plate_nonretarded_general", ATOM, g, DIEL)
    with pytest.raises(ValueError):
        asymptotic_breakdown("halfspace_nonretarded_dielectric", ATOM, g, VAC)
    assert u_asymptotic("plate_nonretarded_general", ATOM, g, PC) == \
        asymptotic_breakdown("plate_nonretarded_general", ATOM, g, PC).total


def test_locate_sign_change_requires_bracket():
    with pytest.raises(ValueError):
        locate_sign_change(lambda x: x * x + 1, -1.0, 1.0)
    assert locate_sign_change(lambda x: x - 0.25, 0.0, 1.0, rtol=1e-12) == pytest.approx(0.25)
