"""Exact bookkeeping of the fourth-order energy denominators.

The two-atom potential at fourth order in the atom-field coupling is a
sum over ten classes of intermediate states. Each class contributes one
or two energy denominators, products of three sums of atomic
frequencies (``A`` for atom A, ``B`` for atom B) and photon frequencies
(``w``, ``w'``). Their sum collapses, under the symmetric double
frequency integral, to

    4 (A + B + w) / ((A + B)(A + w)(B + w)) * (1/(w + w') - 1/(w - w')).

This module checks that reduction in exact rational arithmetic
(:class:`fractions.Fraction`), group by group and as a whole.

Examples
--------
>>> verify_sum_identity(1, 2, 3, 5).passed
True
"""
from __future__ import annotations

import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

Factor = Tuple[str, ...]
Product = Tuple[Factor, Factor, Factor]

SYMBOLS = ("A", "B", "w", "w'")
_SWAP_AB = {"A": "B", "B": "A", "w": "w", "w'": "w'"}
_SWAP_W = {"A": "A", "B": "B", "w": "w'", "w'": "w"}

ROMAN = ("i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x", "xi", "xii")


@dataclass(frozen=True)
class IntermediateCase:
    """One class of intermediate states.

    Attributes
    ----------
    case_id : int
        1 to 10.
    state_i, state_ii, state_iii : str
        Atomic excitations and photon content of the three intermediate
        states, e.g. ``"A*,B0 + 1 photon"``.
    denominators : tuple
        ``(label, product)`` pairs; ``product`` holds three factors, each a
        tuple of symbols from ``{"A", "B", "w", "w'"}`` that are summed.
    """

    case_id: int
    state_i: str
    state_ii: str
    state_iii: str
    denominators: Tuple[Tuple[str, Product], ...]


def _f(*symbols: str) -> Factor:
    return tuple(symbols)


# Cases 1-5 have atom A excited first; 6-10 are their A<->B mirror images.
_FIRST_HALF = (
    (1, "A*,B0 + 1 photon", "A0,B0 + 2 photons", "A0,B* + 1 photon",
     ((_f("A", "w'"), _f("w'", "w"), _f("B", "w'")),
      (_f("A", "w'"), _f("w'", "w"), _f("B", "w")))),
    (2, "A*,B0 + 1 photon", "A*,B* + 0 photons", "A0,B* + 1 photon",
     ((_f("A", "w'"), _f("A", "B"), _f("B", "w")),)),
    (3, "A*,B0 + 1 photon", "A*,B* + 0 photons", "A*,B0 + 1 photon",
     ((_f("A", "w'"), _f("A", "B"), _f("A", "w")),)),
    (4, "A*,B0 + 1 photon", "A*,B* + 2 photons", "A0,B* + 1 photon",
     ((_f("A", "w'"), _f("A", "B", "w'", "w"), _f("B", "w'")),)),
    (5, "A*,B0 + 1 photon", "A*,B* + 2 photons", "A*,B0 + 1 photon",
     ((_f("A", "w'"), _f("A", "B", "w'", "w"), _f("A", "w")),)),
)


def _swap_product(p: Product, table: Mapping[str, str]) -> Product:
    return tuple(tuple(table[s] for s in factor) for factor in p)  # type: ignore[return-value]


def _swap_text(s: str) -> str:
    return s.replace("A", "\0").replace("B", "A").replace("\0", "B")


def _build_cases() -> Tuple[IntermediateCase, ...]:
    cases: List[IntermediateCase] = []
    k = 0
    labelled = []
    for cid, s1, s2, s3, prods in _FIRST_HALF:
        dens = []
        for p in prods:
            dens.append((ROMAN[k], p))
            k += 1
        labelled.append((cid, s1, s2, s3, dens))
        cases.append(IntermediateCase(cid, s1, s2, s3, tuple(dens)))
    for cid, s1, s2, s3, dens in labelled:
        mirrored = []
        for label, p in dens:
            mirrored.append((ROMAN[k], _swap_product(p, _SWAP_AB)))
            k += 1
        # the A<->B image of "A*,B0" reads "B*,A0"; present it A first
        cases.append(IntermediateCase(cid + 5, _canon_state(_swap_text(s1)),
                                      _canon_state(_swap_text(s2)),
                                      _canon_state(_swap_text(s3)), tuple(mirrored)))
    return tuple(cases)


def _canon_state(s: str) -> str:
    atoms, photons = s.split(" + ")
    parts = sorted(atoms.split(","))
    return ",".join(parts) + " + " + photons


_CASES = _build_cases()


def enumerate_cases() -> Tuple[IntermediateCase, ...]:
    """The ten intermediate-state classes, with twelve denominators in all.

    Examples
    --------
    >>> cs = enumerate_cases()
    >>> len(cs), sum(len(c.denominators) for c in cs)
    (10, 12)
    """
    return _CASES


def mirror(case_id: int) -> int:
    """Case obtained by exchanging the roles of the two atoms.

    Examples
    --------
    >>> mirror(4)
    9
    """
    if case_id not in range(1, 11):
        raise ValueError("case_id must be between 1 and 10")
    return case_id + 5 if case_id <= 5 else case_id - 5


def denominator_table() -> Dict[str, Product]:
    """Mapping from label (``'i'`` ... ``'xii'``) to factor product."""
    return {label: p for c in _CASES for label, p in c.denominators}


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def as_rational(x) -> Fraction:
    """Convert an int, Fraction or decimal string to an exact :class:`Fraction`.

    Binary floats are refused so that no rounded value can slip in.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not frequencies")
    if isinstance(x, numbers.Rational):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def _env(wa, wb, w, wp) -> Dict[str, Fraction]:
    vals = [as_rational(v) for v in (wa, wb, w, wp)]
    if any(v <= 0 for v in vals):
        raise ValueError("all frequencies must be positive")
    return dict(zip(SYMBOLS, vals))


def product_value(p: Product, env: Mapping[str, Fraction]) -> Fraction:
    out = Fraction(1)
    for factor in p:
        out *= sum((env[s] for s in factor), Fraction(0))
    if out == 0:
        raise ZeroDivisionError("vanishing energy denominator")
    return out


def denominator_value(case_id: int, which: int, wa, wb, w, wp) -> Fraction:
    """Exact value of denominator ``which`` (0 or 1) of case ``case_id``.

    Examples
    --------
    >>> denominator_value(2, 0, 1, 2, 3, 5)
    Fraction(90, 1)
    >>> denominator_value(4, 0, 1, 2, 3, 5)
    Fraction(462, 1)
    """
    if case_id not in range(1, 11):
        raise ValueError("case_id must be between 1 and 10")
    dens = _CASES[case_id - 1].denominators
    if which not in range(len(dens)):
        raise ValueError(f"case {case_id} has {len(dens)} denominator(s)")
    return product_value(dens[which][1], _env(wa, wb, w, wp))


# ---------------------------------------------------------------------------
# the summation identity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityCheck:
    """One exact comparison: ``lhs == rhs``."""

    name: str
    lhs: Fraction
    rhs: Fraction

    @property
    def passed(self) -> bool:
        return self.lhs == self.rhs


@dataclass(frozen=True)
class ProofRecord:
    """All sub-identity checks for one frequency quadruple."""

    frequencies: Tuple[Fraction, Fraction, Fraction, Fraction]
    checks: Tuple[IdentityCheck, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def first_failure(self) -> Optional[IdentityCheck]:
        for c in self.checks:
            if not c.passed:
                return c
        return None

    def report(self) -> str:
        lines = []
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            lines.append(f"{status}  {c.name}" + ("" if c.passed else f"  lhs={c.lhs} rhs={c.rhs}"))
        return "\n".join(lines)


GROUP_ATOMIC = ("ii", "iii", "viii", "ix", "iv", "x")
GROUP_A = ("i", "v", "vi")
GROUP_B = ("vii", "xi", "xii")


def _sum_inv(labels: Iterable[str], table: Mapping[str, Product], env) -> Fraction:
    return sum((1 / product_value(table[k], env) for k in labels), Fraction(0))


def _plus_minus(env, sign: int) -> Fraction:
    w, wp = env["w"], env["w'"]
    return 1 / (w + wp) + sign / (w - wp)


def _swapped(env):
    return {k: env[_SWAP_W[k]] for k in env}


def _atomic_terms(env) -> Tuple[Fraction, Fraction]:
    """The two terms of the exact decomposition of the atomic group."""
    a, b, w, wp = env["A"], env["B"], env["w"], env["w'"]
    t1 = (1 / (a + w) + 1 / (b + w)) * _plus_minus(env, -1) / (a + b)
    t2 = (1 / (a + wp) + 1 / (b + wp)) * _plus_minus(env, +1) / (a + b)
    return t1, t2


def _single_terms(env, first: str) -> Tuple[Fraction, Fraction]:
    """Exact decomposition of group ``GROUP_A`` (first='A') or ``GROUP_B``."""
    a, b, w, wp = env["A"], env["B"], env["w"], env["w'"]
    lead = _plus_minus(env, +1) / ((a + wp) * (b + wp))
    if first == "A":
        tail = -1 / ((b + wp) * (a + w) * (w - wp))
    else:
        tail = -1 / ((a + wp) * (b + w) * (w - wp))
    return lead, tail


def closed_form(env) -> Fraction:
    """Right-hand side ``4(A+B+w)/((A+B)(A+w)(B+w)) * (1/(w+w') - 1/(w-w'))``."""
    a, b, w = env["A"], env["B"], env["w"]
    return 4 * (a + b + w) / ((a + b) * (a + w) * (b + w)) * _plus_minus(env, -1)


def verify_sum_identity(wa, wb, w, wp,
                        table: Optional[Mapping[str, Product]] = None) -> ProofRecord:
    """Check the denominator summation identity exactly.

    The sub-identities checked are

    1. ``atomic group exact``: the six denominators in which both atoms
       are excited once equal ``T1 + T2`` as a plain identity;
    2. ``atomic group symmetrised``: replacing ``T2`` by its
       ``w <-> w'`` image gives ``2 T1``;
    3. ``group A exact`` and ``group B exact``: the two remaining triples
       equal ``lead + tail`` as plain identities;
    4. ``tails cancel``: the group-A tail plus the ``w <-> w'`` image of
       the group-B tail vanishes;
    5. ``single groups symmetrised``: the two triples, after those swaps,
       equal ``2 (1/(w+w') - 1/(w-w')) / ((A+w)(B+w))``;
    6. ``grand total``: ``S(w,w') + S(w',w)`` equals the same
       symmetrisation of the closed form.

    Parameters
    ----------
    wa, wb, w, wp : int, Fraction or str
        Positive exact frequencies with ``w != wp``.
    table : mapping, optional
        Replacement denominator table (label to product), used to check
        that a corrupted table is detected.

    Raises
    ------
    ValueError
        For non-positive frequencies or ``w == wp`` (a principal-value pole).
    """
    env = _env(wa, wb, w, wp)
    if env["w"] == env["w'"]:
        raise ValueError("w == w' sits on the pole of 1/(w - w')")
    tab = dict(denominator_table() if table is None else table)
    swp = _swapped(env)
    checks: List[IdentityCheck] = []

    lhs_atomic = _sum_inv(GROUP_ATOMIC, tab, env)
    t1, t2 = _atomic_terms(env)
    checks.append(IdentityCheck("atomic group exact", lhs_atomic, t1 + t2))
    t2_swapped = _atomic_terms(swp)[1]
    checks.append(IdentityCheck("atomic group symmetrised", lhs_atomic - t2 + t2_swapped, 2 * t1))

    lhs_a = _sum_inv(GROUP_A, tab, env)
    lhs_b = _sum_inv(GROUP_B, tab, env)
    lead_a, tail_a = _single_terms(env, "A")
    lead_b, tail_b = _single_terms(env, "B")
    checks.append(IdentityCheck("group A exact", lhs_a, lead_a + tail_a))
    checks.append(IdentityCheck("group B exact", lhs_b, lead_b + tail_b))
    tail_b_swapped = _single_terms(swp, "B")[1]
    checks.append(IdentityCheck("tails cancel", tail_a + tail_b_swapped, Fraction(0)))
    lead_swapped = _single_terms(swp, "A")[0] + _single_terms(swp, "B")[0]
    a, b = env["A"], env["B"]
    rhs_single = 2 * _plus_minus(env, -1) / ((a + env["w"]) * (b + env["w"]))
    # swap both leads and the group-B tail, keep the group-A tail
    sym = lhs_a + lhs_b - (lead_a + lead_b + tail_b) + (lead_swapped + tail_b_swapped)
    checks.append(IdentityCheck("single groups symmetrised", sym, rhs_single))

    labels = [k for c in _CASES for k, _ in c.denominators]
    total = _sum_inv(labels, tab, env) + _sum_inv(labels, tab, swp)
    checks.append(IdentityCheck("grand total", total, closed_form(env) + closed_form(swp)))
    return ProofRecord(tuple(env[s] for s in SYMBOLS), tuple(checks))  # type: ignore[arg-type]


def corrupted_table(label: str = "v") -> Dict[str, Product]:
    """Denominator table with one factor of ``label`` altered (a test hook)."""
    tab = denominator_table()
    p = tab[label]
    tab[label] = (p[0], p[1] + ("A",), p[2])
    return tab


def random_quadruple(rng, max_num: int = 50, max_den: int = 12) -> Tuple[Fraction, ...]:
    """Draw four positive rationals with ``w != w'`` from a ``random.Random``."""
    while True:
        q = tuple(Fraction(rng.randint(1, max_num), rng.randint(1, max_den)) for _ in range(4))
        if q[2] != q[3]:
            return q


def verify_many(quadruples: Sequence[Sequence], table=None) -> List[ProofRecord]:
    return [verify_sum_identity(*q, table=table) for q in quadruples]
