"""Command-line front end: ``vdwbody eval | sweep | figure | verify``.

Scenarios are described in INI files (read with :mod:`configparser`)::

    [atom]            ; atom A, also used for B unless [atom_b] is given
    omega10 = 1.0
    d2 = 1.0          ; or: transitions = 1.0:1.0, 2.5:0.3

    [material]        ; substrate / half-space / host medium
    kind = drude_lorentz        ; vacuum | constant | drude_lorentz |
                                ; perfect_conductor | perfect_permeable
    omega_pe = 3.0
    omega_te = 1.0
    gamma_e = 0.001

    [scene]
    type = halfspace            ; vacuum | bulk | halfspace | stack
    films = coat:0.05           ; stack only: [material.coat] of thickness 0.05

    [geometry]
    arrangement = parallel      ; parallel | vertical | explicit
    l = 0.01
    z = 0.01                    ; height (parallel) or z_A (vertical)
    ; explicit: x_a, z_a, x_b, z_b

    [quad]
    rel_tol = 1e-8

    [sweep]
    quantity = potential        ; potential | force_a_z
    l_start = 0.001
    l_stop = 10
    l_num = 41
    spacing = log               ; log | linear; or l_values = 0.1, 0.2
    z_values = 0.01, 0.2, 1.0

    [output]
    asymptotic = halfspace_nonretarded_dielectric   ; eval only, optional

CSV files have the header ``l_over_c_omega10,z_label,ratio,err,converged``
and numbers written with 17 significant digits, so identical inputs give
byte-identical files. Exit status: 0 success, 1 usage or configuration
error, 2 numerical non-convergence, 3 verification failure.
"""
from __future__ import annotations

import argparse
import configparser
import io
import math
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .greens import Geometry, LayerStack
from .materials import AtomModel, MaterialModel
from .potential import (CASES, DEFAULT_TOL, ConvergenceError, asymptotic_breakdown,
                        force_estimate, u_bulk_result, u_total)
from .quadrature import QuadratureError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NONCONVERGED = 2
EXIT_VERIFY = 3

CSV_HEADER = ("l_over_c_omega10", "z_label", "ratio", "err", "converged")
QUANTITIES = ("potential", "force_a_z")
SCENES = ("vacuum", "bulk", "halfspace", "stack")


class ConfigError(ValueError):
    """Invalid or incomplete scenario description."""


# ---------------------------------------------------------------------------
# scenario
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    """Everything needed to evaluate one configuration or a sweep."""

    atoms: Tuple[AtomModel, AtomModel]
    scene: str
    material: MaterialModel
    stack: Optional[LayerStack]
    geometry: Optional[Geometry] = None
    arrangement: str = "parallel"
    rel_tol: float = DEFAULT_TOL
    quantity: str = "potential"
    l_values: Tuple[float, ...] = ()
    z_values: Tuple[float, ...] = ()
    asymptotic: Tuple[str, ...] = ()


FIGURES: Dict[str, Dict[str, object]] = {
    "fig5a": dict(body="dielectric", arrangement="parallel", quantity="potential"),
    "fig5b": dict(body="magnetic", arrangement="parallel", quantity="potential"),
    "fig6a": dict(body="dielectric", arrangement="vertical", quantity="potential"),
    "fig6b": dict(body="magnetic", arrangement="vertical", quantity="potential"),
    "fig7a": dict(body="dielectric", arrangement="vertical", quantity="force_a_z"),
    "fig7b": dict(body="magnetic", arrangement="vertical", quantity="force_a_z"),
}
FIGURE_Z = (0.01, 0.2, 1.0)
FIGURE_L = (1e-3, 10.0, 41)
PLASMA, RESONANCE, DAMPING = 3.0, 1.0, 0.001


def figure_material(body: str) -> MaterialModel:
    if body == "dielectric":
        return MaterialModel.drude_lorentz(PLASMA, RESONANCE, DAMPING)
    return MaterialModel.drude_lorentz(0.0, 1.0, 0.0, PLASMA, RESONANCE, DAMPING)


def figure_scenario(name: str) -> Scenario:
    """Preset for one of the figure reproductions (two identical atoms)."""
    if name not in FIGURES:
        raise ConfigError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    spec = FIGURES[name]
    mat = figure_material(str(spec["body"]))
    atom = AtomModel.two_level()
    lo, hi, num = FIGURE_L
    return Scenario((atom, atom), "halfspace", mat, LayerStack.half_space(mat),
                    arrangement=str(spec["arrangement"]), quantity=str(spec["quantity"]),
                    l_values=tuple(float(x) for x in np.geomspace(lo, hi, num)),
                    z_values=FIGURE_Z)


def _float(sec: configparser.SectionProxy, key: str, default=None) -> float:
    if key not in sec:
        if default is None:
            raise ConfigError(f"[{sec.name}] missing required key '{key}'")
        return float(default)
    raw = sec[key]
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{sec.name}] {key} = {raw!r} is not a number") from None


def _floats(sec: configparser.SectionProxy, key: str) -> Tuple[float, ...]:
    raw = sec[key]
    try:
        vals = tuple(float(x) for x in raw.replace(";", ",").split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"[{sec.name}] {key} = {raw!r} is not a list of numbers") from None
    if not vals:
        raise ConfigError(f"[{sec.name}] {key} is empty")
    return vals


def _atom(sec: configparser.SectionProxy) -> AtomModel:
    try:
        if "transitions" in sec:
            pairs = []
            for item in sec["transitions"].split(","):
                w, d2 = item.split(":")
                pairs.append((float(w), float(d2)))
            return AtomModel.from_pairs(pairs)
        return AtomModel.two_level(_float(sec, "omega10", 1.0), _float(sec, "d2", 1.0))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[{sec.name}] invalid atom: {exc}") from None


def _material(sec: configparser.SectionProxy) -> MaterialModel:
    kind = sec.get("kind", "").strip()
    if not kind:
        raise ConfigError(f"[{sec.name}] missing required key 'kind'")
    try:
        if kind == "vacuum":
            return MaterialModel.vacuum()
        if kind == "constant":
            return MaterialModel.constant(_float(sec, "eps", 1.0), _float(sec, "mu", 1.0))
        if kind == "drude_lorentz":
            return MaterialModel.drude_lorentz(
                _float(sec, "omega_pe", 0.0), _float(sec, "omega_te", 1.0),
                _float(sec, "gamma_e", 0.0), _float(sec, "omega_pm", 0.0),
                _float(sec, "omega_tm", 1.0), _float(sec, "gamma_m", 0.0))
        if kind == "perfect_conductor":
            return MaterialModel.perfect_conductor()
        if kind == "perfect_permeable":
            return MaterialModel.perfect_permeable()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[{sec.name}] invalid material: {exc}") from None
    raise ConfigError(f"[{sec.name}] unknown material kind {kind!r}")


def _geometry(sec: configparser.SectionProxy) -> Tuple[str, Optional[Geometry]]:
    arr = sec.get("arrangement", "explicit").strip()
    try:
        if arr == "parallel":
            return arr, Geometry.parallel(_float(sec, "l"), _float(sec, "z"))
        if arr == "vertical":
            return arr, Geometry.vertical(_float(sec, "z"), _float(sec, "l"))
        if arr == "explicit":
            return arr, Geometry(_float(sec, "x_a", 0.0), _float(sec, "z_a"),
                                 _float(sec, "x_b"), _float(sec, "z_b"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[{sec.name}] invalid geometry: {exc}") from None
    raise ConfigError(f"[{sec.name}] unknown arrangement {arr!r}")


def _grid(sec: configparser.SectionProxy) -> Tuple[float, ...]:
    if "l_values" in sec:
        vals = _floats(sec, "l_values")
    else:
        start, stop = _float(sec, "l_start"), _float(sec, "l_stop")
        num = int(_float(sec, "l_num"))
        spacing = sec.get("spacing", "log").strip()
        if num < 1:
            raise ConfigError(f"[{sec.name}] l_num must be at least 1")
        if spacing == "log":
            if not (start > 0 and stop > 0):
                raise ConfigError(f"[{sec.name}] log spacing needs positive limits")
            vals = tuple(float(x) for x in np.geomspace(start, stop, num))
        elif spacing == "linear":
            vals = tuple(float(x) for x in np.linspace(start, stop, num))
        else:
            raise ConfigError(f"[{sec.name}] spacing must be 'log' or 'linear'")
    arr = np.asarray(vals)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0) or np.any(np.diff(arr) <= 0):
        raise ConfigError(f"[{sec.name}] the l grid must be finite, positive and strictly increasing")
    return vals


def parse_config(text: str, base: Optional[Scenario] = None, source: str = "<config>") -> Scenario:
    """Build a :class:`Scenario` from INI text, optionally on top of ``base``."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    sc = base
    if "atom" in cp:
        a = _atom(cp["atom"])
        b = _atom(cp["atom_b"]) if "atom_b" in cp else a
        atoms = (a, b)
    elif sc is not None:
        atoms = sc.atoms
    else:
        raise ConfigError("missing required section [atom]")
    if "material" in cp:
        mat = _material(cp["material"])
    elif sc is not None:
        mat = sc.material
    else:
        mat = MaterialModel.vacuum()
    scene = sc.scene if sc is not None else "vacuum"
    films: List[Tuple[MaterialModel, float]] = []
    if "scene" in cp:
        s = cp["scene"]
        scene = s.get("type", scene).strip()
        if scene not in SCENES:
            raise ConfigError(f"[scene] type must be one of {', '.join(SCENES)}")
        if scene == "stack":
            for item in s.get("films", "").split(","):
                if not item.strip():
                    continue
                try:
                    name, thick = item.split(":")
                    thickness = float(thick)
                except ValueError:
                    raise ConfigError(f"[scene] films entry {item.strip()!r} is not name:thickness") from None
                key = f"material.{name.strip()}"
                if key not in cp:
                    raise ConfigError(f"[scene] films refers to missing section [{key}]")
                films.append((_material(cp[key]), thickness))
    try:
        if scene == "vacuum":
            stack: Optional[LayerStack] = LayerStack.vacuum()
        elif scene == "bulk":
            stack = None
            if mat.is_perfect:
                raise ConfigError("[material] a bulk host cannot be a perfect reflector")
        elif scene == "halfspace":
            stack = LayerStack.half_space(mat)
        else:
            stack = LayerStack.from_layers(mat, films)
    except ValueError as exc:
        raise ConfigError(f"[scene] {exc}") from None
    arrangement = sc.arrangement if sc is not None else "parallel"
    geom = sc.geometry if sc is not None else None
    if "geometry" in cp:
        arrangement, geom = _geometry(cp["geometry"])
    rel_tol = sc.rel_tol if sc is not None else DEFAULT_TOL
    if "quad" in cp:
        rel_tol = _float(cp["quad"], "rel_tol", rel_tol)
    quantity = sc.quantity if sc is not None else "potential"
    l_values = sc.l_values if sc is not None else ()
    z_values = sc.z_values if sc is not None else ()
    if "sweep" in cp:
        sw = cp["sweep"]
        quantity = sw.get("quantity", quantity).strip()
        if quantity not in QUANTITIES:
            raise ConfigError(f"[sweep] quantity must be one of {', '.join(QUANTITIES)}")
        if any(k in sw for k in ("l_values", "l_start")):
            l_values = _grid(sw)
        if "z_values" in sw:
            z_values = _floats(sw, "z_values")
        if "arrangement" in sw:
            arrangement = sw["arrangement"].strip()
    asym: Tuple[str, ...] = sc.asymptotic if sc is not None else ()
    if "output" in cp and "asymptotic" in cp["output"]:
        asym = tuple(x.strip() for x in cp["output"]["asymptotic"].split(",") if x.strip())
        for case in asym:
            if case not in CASES:
                raise ConfigError(f"[output] unknown asymptotic case {case!r}")
    return Scenario(atoms, scene, mat, stack, geom, arrangement, rel_tol, quantity,
                    l_values, z_values, asym)


def load_config(path: str, base: Optional[Scenario] = None) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, base, source=path)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Row:
    l: float
    z: float
    ratio: float
    err: float
    converged: bool
    message: str = ""

    def csv(self) -> str:
        return "%.17g,%.17g,%.17g,%.17g,%s" % (self.l, self.z, self.ratio, self.err,
                                               "true" if self.converged else "false")


def _sweep_geometry(arrangement: str, l: float, z: float) -> Geometry:
    if arrangement == "parallel":
        return Geometry.parallel(l, z)
    if arrangement == "vertical":
        return Geometry.vertical(z, l)
    raise ConfigError("sweeps need arrangement = parallel or vertical")


def evaluate_point(sc: Scenario, l: float, z: float) -> Row:
    """One sweep row: ratio of the quantity to its free-space value."""
    g = _sweep_geometry(sc.arrangement, l, z)
    if sc.scene == "bulk":
        num = u_bulk_result(sc.material, sc.atoms, l, sc.rel_tol)
        den = u_bulk_result(MaterialModel.vacuum(), sc.atoms, l, sc.rel_tol)
        ratio = num.value / den.value
        err = abs(ratio) * (num.error_estimate / abs(num.value) + den.error_estimate / abs(den.value))
        return Row(l, z, ratio, err, num.converged and den.converged)
    stack = sc.stack
    try:
        if sc.quantity == "potential":
            b = u_total(stack, sc.atoms, g, sc.rel_tol)
            return Row(l, z, b.ratio, b.ratio_error, True)
        body = force_estimate("A", stack, sc.atoms, g, sc.rel_tol, parts="body")
        free = force_estimate("A", stack, sc.atoms, g, sc.rel_tol, parts="free")
        f0 = free.value[2]
        ratio = 1.0 + body.value[2] / f0
        err = body.error[2] / abs(f0) + abs(body.value[2]) * free.error[2] / f0 ** 2
        return Row(l, z, ratio, err, True)
    except ConvergenceError as exc:
        part = exc.partial
        if hasattr(part, "ratio"):
            return Row(l, z, part.ratio, part.ratio_error, False, str(exc))
        return Row(l, z, math.nan, math.nan, False, str(exc))


def _point_task(args):
    sc, l, z = args
    return evaluate_point(sc, l, z)


def run_sweep(sc: Scenario, workers: int = 1) -> List[Row]:
    """Evaluate the grid ``z_values x l_values``; rows come back in input order."""
    if not sc.l_values:
        raise ConfigError("[sweep] no l grid given")
    zs = sc.z_values
    if not zs:
        if sc.geometry is None:
            raise ConfigError("[sweep] give z_values or a [geometry] section")
        zs = (sc.geometry.z_a,)
    tasks = [(sc, l, z) for z in zs for l in sc.l_values]
    if workers <= 1 or len(tasks) == 1:
        return [_point_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_point_task, tasks, chunksize=1))


def rows_to_csv(rows: Sequence[Row]) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_HEADER) + "\n")
    for r in rows:
        buf.write(r.csv() + "\n")
    return buf.getvalue()


def _write(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def eval_report(sc: Scenario) -> Tuple[str, bool]:
    """Text report of one configuration and whether everything converged."""
    g = sc.geometry
    if g is None:
        raise ConfigError("missing required section [geometry]")
    lines = [f"scene      {sc.scene}", f"material   {sc.material.kind} {sc.material.params}",
             f"geometry   X={g.X:.17g} Z={g.Z:.17g} Z+={g.zplus:.17g} l={g.l:.17g}"]
    if sc.scene == "bulk":
        r = u_bulk_result(sc.material, sc.atoms, g.l, sc.rel_tol)
        lines.append(f"u_bulk     {r.value:.17g}  err {r.error_estimate:.3g}")
        return "\n".join(lines) + "\n", r.converged
    b = u_total(sc.stack, sc.atoms, g, sc.rel_tol, strict=False)
    lines += [f"u0         {b.u0:.17g}  err {b.err0:.3g}",
              f"u1         {b.u1:.17g}  err {b.err1:.3g}",
              f"u2         {b.u2:.17g}  err {b.err2:.3g}",
              f"total      {b.total:.17g}",
              f"ratio      {b.ratio:.17g}  err {b.ratio_error:.3g}",
              f"converged  {str(b.converged).lower()}"]
    if b.detail:
        lines.append(f"detail     {b.detail}")
    for case in sc.asymptotic:
        try:
            a = asymptotic_breakdown(case, sc.atoms, g, sc.material)
            lines.append(f"asymptotic {case}: u1 {a.u1:.17g} u2 {a.u2:.17g} ratio {a.ratio:.17g}")
        except (ValueError, QuadratureError) as exc:
            lines.append(f"asymptotic {case}: not applicable ({exc})")
    return "\n".join(lines) + "\n", b.converged


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

AB_GRID = tuple((a, b) for a in (0.5, 1.0, 2.0, 5.0) for b in (0.0, 0.5, 1.0, 3.0))


def verify_report(seed: int, trials: int, corrupt: Optional[str] = None) -> Tuple[str, bool]:
    """Run the exact-identity and special-function checks; return text and status."""
    from . import ptverify, specfun

    lines = []
    rng = random.Random(seed)
    table = ptverify.corrupted_table(corrupt) if corrupt else None
    bad = None
    for _ in range(trials):
        q = ptverify.random_quadruple(rng)
        rec = ptverify.verify_sum_identity(*q, table=table)
        if not rec.passed:
            bad = (q, rec.first_failure)
            break
    ok_sum = bad is None
    lines.append(f"{'pass' if ok_sum else 'FAIL'}  denominator sum identity ({trials} exact trials)")
    if bad is not None:
        q, chk = bad
        lines.append(f"      first failure {chk.name} at {tuple(str(x) for x in q)}: "
                     f"lhs={chk.lhs} rhs={chk.rhs}")
    worst = 0.0
    for a, beta in AB_GRID:
        p = specfun.ABParams(a, beta)
        for n in (3, 4, 5):
            for which in ("+", "-", "B"):
                exact = specfun.b_integral(n, p) if which == "B" else specfun.a_integral(n, which, p)
                oracle = specfun.ab_quadrature_oracle(n, which, p, tol=1e-11)
                # moments that vanish by cancellation are judged on the envelope scale
                scale = abs(exact) if exact != 0.0 else math.factorial(n) / a ** (n + 1)
                worst = max(worst, abs(exact - oracle) / scale)
    ok_ab = worst <= 1e-8
    lines.append(f"{'pass' if ok_ab else 'FAIL'}  exponential-Bessel moments vs quadrature "
                 f"(worst relative deviation {worst:.2e})")
    xs = np.linspace(0.01, 60.0, 1000)
    j0, j1, j2 = (specfun.bessel_j(n, xs) for n in (0, 1, 2))
    dev = float(np.max(np.abs(j1 / xs - 0.5 * (j0 + j2))))
    ok_bes = dev <= 1e-12
    lines.append(f"{'pass' if ok_bes else 'FAIL'}  Bessel recurrence J1(x)/x = (J0+J2)/2 "
                 f"(max deviation {dev:.2e})")
    return "\n".join(lines) + "\n", ok_sum and ok_ab and ok_bes


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vdwbody",
                                description="Van der Waals potentials of two atoms near planar bodies.")
    p.add_argument("--version", action="version", version=f"vdwbody {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required):
        sp.add_argument("--config", required=config_required, metavar="PATH",
                        help="scenario file (INI)")
        sp.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        sp.add_argument("--rel-tol", type=float, metavar="X",
                        help="relative tolerance of the frequency integrals")
        sp.add_argument("--workers", type=int, default=1, metavar="N",
                        help="parallel worker processes for sweeps")

    common(sub.add_parser("eval", help="evaluate one configuration"), True)
    common(sub.add_parser("sweep", help="evaluate a grid of separations"), True)
    fig = sub.add_parser("figure", help="reproduce a figure's data as CSV")
    fig.add_argument("which", choices=sorted(FIGURES))
    common(fig, False)
    ver = sub.add_parser("verify", help="exact identity and special-function checks")
    ver.add_argument("--seed", type=int, default=0, metavar="N")
    ver.add_argument("--trials", type=int, default=500, metavar="N")
    ver.add_argument("--out", metavar="PATH")
    ver.add_argument("--corrupt", metavar="LABEL", help=argparse.SUPPRESS)
    return p


def _apply_overrides(sc: Scenario, args) -> Scenario:
    if getattr(args, "rel_tol", None) is not None:
        if not args.rel_tol > 0:
            raise ConfigError("--rel-tol must be positive")
        sc = replace(sc, rel_tol=args.rel_tol)
    return sc


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        if args.command == "verify":
            if args.trials < 1:
                raise ConfigError("--trials must be positive")
            text, ok = verify_report(args.seed, args.trials, args.corrupt)
            _write(text, args.out)
            return EXIT_OK if ok else EXIT_VERIFY
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        if args.command == "figure":
            sc = figure_scenario(args.which)
            if args.config:
                sc = load_config(args.config, base=sc)
        else:
            sc = load_config(args.config)
        sc = _apply_overrides(sc, args)
        if args.command == "eval":
            text, ok = eval_report(sc)
            _write(text, args.out)
            return EXIT_OK if ok else EXIT_NONCONVERGED
        rows = run_sweep(sc, args.workers)
        _write(rows_to_csv(rows), args.out)
        for r in rows:
            if not r.converged:
                print(f"warning: l={r.l:g} z={r.z:g} did not converge: {r.message}",
                      file=sys.stderr)
        return EXIT_OK if all(r.converged for r in rows) else EXIT_NONCONVERGED
    except ConfigError as exc:
        print(f"vdwbody: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"vdwbody: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
