"""Acceptance criteria, one test per measurable part.

Each test records a pass/fail line that is printed in the
``acceptance criteria`` section of the pytest terminal summary, and then
asserts at the stated tolerance. Some parts fail by design of the
physics (finite-ratio corrections at the probe geometry, or an identity
that does not hold); they are kept as honest failing checks.
"""
from __future__ import annotations

import math
import os
import random
import time

import numpy as np
import pytest

from conftest import record_criterion
from vdwbody import cli, ptverify, specfun
from vdwbody.greens import Geometry, LayerStack, scattering_elements_u2, scattering_green
from vdwbody.materials import AtomModel, MaterialModel
from vdwbody.potential import (asymptotic_breakdown, asymptotic_coefficients,
                               locate_sign_change, u_bulk, u_total)

ATOM = AtomModel.two_level()
VAC = MaterialModel.vacuum()
PC = MaterialModel.perfect_conductor()
PM = MaterialModel.perfect_permeable()
DIEL = MaterialModel.drude_lorentz(3.0, 1.0, 0.001)
MAGN = MaterialModel.drude_lorentz(0.0, 1.0, 0.0, 3.0, 1.0, 0.001)


def check(number, part, passed, detail):
    record_criterion(number, part, bool(passed), detail)
    print(f"criterion {number} [{part}]: {'pass' if passed else 'FAIL'} ({detail})")
    assert passed, detail


def rel(a, b):
    return abs(a / b - 1.0)


@pytest.fixture(scope="module")
def free_coeffs():
    return asymptotic_coefficients(ATOM)


# --------------------------------------------------------------------- 1
@pytest.mark.parametrize("l, kind, tol", [(1e-3, "nonretarded", 0.01), (1e3, "retarded", 0.03)])
def test_c1_bulk_limits(free_coeffs, l, kind, tol):
    t0 = time.perf_counter()
    u = u_bulk(VAC, ATOM, l)
    dt = time.perf_counter() - t0
    ref = -free_coeffs.c_nr / l ** 6 if kind == "nonretarded" else -free_coeffs.c_r / l ** 7
    d = rel(u, ref)
    check(1, f"{kind} l={l:g}", d <= tol and dt < 1.0,
          f"U/U_ref={u / ref:.7f}, tol {tol:.0%}, {dt * 1e3:.1f} ms")


# --------------------------------------------------------------------- 2
def test_c2_medium_reduction():
    r = u_bulk(MaterialModel.constant(4.0, 1.0), ATOM, 1e3) / u_bulk(VAC, ATOM, 1e3)
    check(2, "eps=4 retarded", rel(r, 1 / 32) <= 0.03, f"ratio {r:.7f} vs 1/32 = 0.03125")


# --------------------------------------------------------------------- 3
@pytest.mark.parametrize("body, target, name", [(PC, 40 / 23, "conductor"), (PM, 52 / 23, "permeable")])
def test_c3_perfect_plate_retarded(body, target, name):
    # Full numerics agree with the general retarded plate formula to ~1e-6 here;
    # the 40/23 and 52/23 limits need z_A/z_B -> 0 and are ~6.5% away at 0.01.
    g = Geometry.vertical(20.0, 1980.0)
    b = u_total(LayerStack.half_space(body), ATOM, g)
    general = asymptotic_breakdown("plate_retarded_general", ATOM, g, body).ratio
    check(3, name, rel(b.ratio, target) <= 0.05,
          f"ratio {b.ratio:.6f} vs {target:.6f} (general-position closed form {general:.6f})")


# --------------------------------------------------------------------- 4
@pytest.mark.parametrize("body, target, name", [(PC, 2 / 3, "conductor"), (PM, 10 / 3, "permeable")])
def test_c4_perfect_plate_nonretarded_on_surface(body, target, name):
    g = Geometry.parallel(1e-2, 1e-3)
    b = u_total(LayerStack.half_space(body), ATOM, g)
    closed = asymptotic_breakdown("plate_nonretarded_parallel", ATOM, g, body).ratio
    check(4, name, rel(b.ratio, target) <= 0.02,
          f"ratio {b.ratio:.6f} vs {target:.6f} (closed form at this geometry {closed:.6f})")


# --------------------------------------------------------------------- 5
def test_c5a_permeable_vertical_threshold():
    stack = LayerStack.half_space(PM)
    za = 1e-4
    r = locate_sign_change(lambda q: u_total(stack, ATOM, Geometry(0.0, za, 0.0, q * za)).body,
                           10.0, 20.0, rtol=1e-5)
    check(5, "permeable nonretarded vertical", rel(r, 14.82) <= 0.05, f"z_B/z_A = {r:.5f} vs 14.82")


def test_c5b_conductor_retarded_vertical_threshold():
    stack = LayerStack.half_space(PC)
    za = 20.0
    r = locate_sign_change(lambda q: u_total(stack, ATOM, Geometry(0.0, za, 0.0, q * za)).body,
                           3.0, 8.0, rtol=1e-4)
    check(5, "conductor retarded vertical", 4.4 <= r <= 5.4, f"z_B/z_A = {r:.4f}, window [4.4, 5.4]")


# --------------------------------------------------------------------- 6
@pytest.mark.parametrize("body, case, name", [
    (DIEL, "halfspace_nonretarded_dielectric", "dielectric"),
    (MAGN, "halfspace_nonretarded_magnetic", "magnetic"),
])
def test_c6_halfspace_nonretarded(body, case, name):
    # the free part is common to both sides, so the body-induced part is compared
    g = Geometry.parallel(1e-3, 5e-3)
    coeffs = asymptotic_coefficients(ATOM, body=body)
    b = u_total(LayerStack.half_space(body), ATOM, g)
    a = asymptotic_breakdown(case, ATOM, g, body, coeffs)
    check(6, name, rel(b.body, a.body) <= 0.05,
          f"U1+U2 numeric {b.body:.6e} vs closed form {a.body:.6e} ({b.body / a.body:.5f}); "
          f"total ratio {b.total / a.total:.7f}")


def test_c6_perfect_conductor_limit():
    cpc = asymptotic_coefficients(ATOM, body=PC)
    worst = max(rel(cpc.c1_nr, cpc.c_nr / 3), rel(cpc.c2_nr, cpc.c_nr))
    for g in (Geometry(0.0, 1e-3, 2e-3, 3e-3), Geometry.parallel(1e-3, 5e-3), Geometry.vertical(1e-3, 4e-3)):
        a = asymptotic_breakdown("halfspace_nonretarded_dielectric", ATOM, g, PC, cpc)
        p = asymptotic_breakdown("plate_nonretarded_general", ATOM, g, PC, cpc)
        worst = max(worst, rel(a.total, p.total), abs(a.u1 - p.u1) / abs(p.u1), rel(a.u2, p.u2))
    check(6, "eps -> inf algebra", worst <= 1e-10, f"max relative deviation {worst:.1e}")


# --------------------------------------------------------------------- 7
@pytest.fixture(scope="module")
def figures():
    t0 = time.perf_counter()
    out = {}
    workers = os.cpu_count() or 1
    for name in cli.FIGURES:
        rows = cli.run_sweep(cli.figure_scenario(name), workers=workers)
        out[name] = {z: np.array([r.ratio for r in rows if r.z == z]) for z in cli.FIGURE_Z}
        out[name]["converged"] = all(r.converged for r in rows)
    out["elapsed"] = time.perf_counter() - t0
    return out


def _interior(arr, fn):
    k = int(fn(arr))
    return 0 < k < len(arr) - 1


def test_c7_fig5a_reduction_with_minimum(figures):
    r = figures["fig5a"][0.01]
    ok = bool(np.all(r < 1.0)) and _interior(r, np.argmin)
    check(7, "fig5a", ok and figures["fig5a"]["converged"],
          f"z=0.01: max {r.max():.4f}, min {r.min():.4f} at l index {int(np.argmin(r))}/{len(r) - 1}")


def test_c7_fig5b_enhancement_increasing(figures):
    r = figures["fig5b"][0.01]
    ok = bool(np.all(r > 1.0)) and bool(np.all(np.diff(r) > 0))
    check(7, "fig5b", ok and figures["fig5b"]["converged"],
          f"z=0.01: {r[0]:.4f} -> {r[-1]:.4f}, monotone {bool(np.all(np.diff(r) > 0))}")


def test_c7_fig6a_enhancement_with_maximum(figures):
    r = figures["fig6a"][0.01]
    ok = bool(np.all(r > 1.0)) and _interior(r, np.argmax)
    check(7, "fig6a", ok and figures["fig6a"]["converged"],
          f"z=0.01: min {r.min():.4f}, max {r.max():.4f} at l index {int(np.argmax(r))}/{len(r) - 1}")


def test_c7_fig6b_inset_reduction(figures):
    # only the sign of ratio - 1 is checked: a dip below 1 at small l, enhancement at large l
    r = figures["fig6b"][0.01]
    ok = bool(r.min() < 1.0) and int(np.argmin(r)) < int(np.argmax(r)) and r[-1] > 1.0
    check(7, "fig6b inset", ok and figures["fig6b"]["converged"],
          f"z=0.01: min {r.min():.6f} at l index {int(np.argmin(r))}, last {r[-1]:.4f}")


def test_c7_far_from_surface(figures):
    worst = max(abs(figures[f][1.0][0] - 1.0) for f in ("fig5a", "fig5b", "fig6a", "fig6b"))
    check(7, "z = c/w10, small l", worst <= 1e-3, f"max |ratio - 1| = {worst:.2e} at l = 1e-3")


def test_c7_runtime(figures):
    check(7, "sweep runtime", figures["elapsed"] < 1800.0,
          f"all six figures in {figures['elapsed']:.0f} s on {os.cpu_count()} worker(s)")


# --------------------------------------------------------------------- 8
def test_c8_sum_identity_random():
    rng = random.Random(2024)
    records = ptverify.verify_many([ptverify.random_quadruple(rng) for _ in range(500)])
    failed = [r for r in records if not r.passed]
    check(8, "sum identity", not failed, f"{500 - len(failed)}/500 quadruples exact")


def test_c8_ab_closed_forms():
    worst = 0.0
    for a, beta in cli.AB_GRID:
        p = specfun.ABParams(a, beta)
        for n in (3, 4, 5):
            for which in ("+", "-", "B"):
                exact = specfun.b_integral(n, p) if which == "B" else specfun.a_integral(n, which, p)
                oracle = specfun.ab_quadrature_oracle(n, which, p, tol=1e-11)
                scale = abs(exact) if exact != 0.0 else math.factorial(n) / a ** (n + 1)
                worst = max(worst, abs(exact - oracle) / scale)
    check(8, "A/B moments", worst <= 1e-8, f"worst relative deviation {worst:.1e} on {len(cli.AB_GRID)} (a, beta)")


XS = np.linspace(0.01, 60.0, 1000)


def test_c8_bessel_identity_as_stated():
    # J1/x = (J0 - J2)/2 is not an identity; the recurrence gives (J0 + J2)/2.
    j0, j1, j2 = (specfun.bessel_j(n, XS) for n in (0, 1, 2))
    dev = float(np.max(np.abs(j1 / XS - 0.5 * (j0 - j2))))
    check(8, "J1/x = (J0-J2)/2", dev <= 1e-12, f"max deviation {dev:.2e} on 1000 points")


def test_c8_bessel_recurrence():
    j0, j1, j2 = (specfun.bessel_j(n, XS) for n in (0, 1, 2))
    dev = float(np.max(np.abs(j1 / XS - 0.5 * (j0 + j2))))
    check(8, "J1/x = (J0+J2)/2", dev <= 1e-12, f"max deviation {dev:.2e} on 1000 points")


# --------------------------------------------------------------------- 9
def test_c9_reciprocity():
    worst = 0.0
    stacks = (LayerStack.half_space(DIEL), LayerStack.half_space(MAGN),
              LayerStack.from_layers(MaterialModel.constant(4.0, 1.0), [(MAGN, 0.05)]))
    for stack in stacks:
        for g in (Geometry(0.1, 0.02, 0.35, 0.3), Geometry(-0.2, 0.5, 0.1, 0.05)):
            for u in (0.1, 1.0, 7.0):
                ga = scattering_green(stack, g, u, tol=1e-13)
                gb = scattering_green(stack, g.swapped(), u, tol=1e-13)
                worst = max(worst, float(np.max(np.abs(ga - gb.T)) / np.max(np.abs(ga))))
    check(9, "reciprocity", worst <= 1e-12, f"max |G(rA,rB) - G(rB,rA)^T| / max|G| = {worst:.1e}")


def test_c9_vacuum_null():
    el = scattering_elements_u2(LayerStack.vacuum(), 0.3, 0.5, 1.0)
    b = u_total(LayerStack.vacuum(), ATOM, Geometry(0.0, 0.2, 0.3, 0.5))
    ok = (el.xx, el.yy, el.zz, el.xz) == (0.0, 0.0, 0.0, 0.0) and b.u1 == 0.0 and b.u2 == 0.0
    check(9, "vacuum null", ok, "scattering tensor and body terms exactly zero")


def test_c9_total_is_sum():
    b = u_total(LayerStack.half_space(DIEL), ATOM, Geometry(0.0, 0.05, 0.2, 0.1))
    check(9, "total = u0+u1+u2", b.total == b.u0 + b.u1 + b.u2, f"total {b.total:.17g}")


def test_c9_exchange_symmetry():
    a_atom = AtomModel.two_level()
    b_atom = AtomModel.from_pairs([(1.7, 0.6), (4.0, 0.2)])
    stack = LayerStack.half_space(DIEL)
    g = Geometry(0.1, 0.02, 0.35, 0.3)
    b1 = u_total(stack, (a_atom, b_atom), g)
    b2 = u_total(stack, (b_atom, a_atom), g.swapped())
    tol = b1.err0 + b1.err1 + b1.err2 + b2.err0 + b2.err1 + b2.err2
    diff = abs(b1.total - b2.total)
    check(9, "exchange symmetry", diff <= tol, f"|dU| = {diff:.2e} vs combined error {tol:.2e}")


def test_c9_image_sign_pattern():
    probes = [(PC, Geometry.parallel(1e-3, 2e-4), +1), (PC, Geometry.vertical(2e-4, 1e-3), -1),
              (PM, Geometry.parallel(1e-3, 2e-4), -1), (PM, Geometry.vertical(2e-4, 1e-3), +1)]
    got = []
    for body, g, want in probes:
        u1 = u_total(LayerStack.half_space(body), ATOM, g).u1
        got.append(int(np.sign(u1)) == want)
    check(9, "image-dipole signs", all(got), f"{sum(got)}/4 probes match (+,-,-,+)")
