"""Material response functions and atomic polarizabilities at imaginary frequency.

All quantities are dimensionless: frequencies are measured in units of a
reference frequency (normally the first atomic transition) and lengths in
units of ``c`` divided by that frequency, with hbar = c = eps0 = mu0 = 1.
On the positive imaginary axis every response function is real and
positive, so nothing in this module uses complex arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

VACUUM = "vacuum"
CONSTANT = "constant"
DRUDE_LORENTZ = "drude_lorentz"
PERFECT_CONDUCTOR = "perfect_conductor"
PERFECT_PERMEABLE = "perfect_permeable"

_KINDS = (VACUUM, CONSTANT, DRUDE_LORENTZ, PERFECT_CONDUCTOR, PERFECT_PERMEABLE)
PERFECT_KINDS = (PERFECT_CONDUCTOR, PERFECT_PERMEABLE)


@dataclass(frozen=True)
class MaterialModel:
    """Electric and magnetic response of a homogeneous, isotropic medium.

    Use the class-method constructors rather than building instances by
    hand; they validate the parameters.

    Attributes
    ----------
    kind : str
        One of ``vacuum``, ``constant``, ``drude_lorentz``,
        ``perfect_conductor`` or ``perfect_permeable``.
    params : tuple of float
        ``(eps, mu)`` for ``constant``; ``(omega_pe, omega_te, gamma_e,
        omega_pm, omega_tm, gamma_m)`` for ``drude_lorentz``; empty otherwise.
    """

    kind: str
    params: Tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown material kind {self.kind!r}")
        p = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", p)
        if self.kind == CONSTANT:
            if len(p) != 2:
                raise ValueError("constant material needs (eps, mu)")
            if not (p[0] >= 1.0 and p[1] >= 1.0):
                raise ValueError("constant material requires eps >= 1 and mu >= 1")
        elif self.kind == DRUDE_LORENTZ:
            if len(p) != 6:
                raise ValueError("drude_lorentz material needs six parameters")
            wpe, wte, ge, wpm, wtm, gm = p
            if wpe < 0 or wpm < 0 or ge < 0 or gm < 0:
                raise ValueError("plasma frequencies and dampings must be >= 0")
            if not (wte > 0 and wtm > 0):
                raise ValueError("transverse resonance frequencies must be > 0")
        elif p:
            raise ValueError(f"{self.kind} takes no parameters")

    # constructors -----------------------------------------------------
    @classmethod
    def vacuum(cls) -> "MaterialModel":
        return cls(VACUUM)

    @classmethod
    def constant(cls, eps: float = 1.0, mu: float = 1.0) -> "MaterialModel":
        return cls(CONSTANT, (eps, mu))

    @classmethod
    def drude_lorentz(
        cls,
        omega_pe: float = 0.0,
        omega_te: float = 1.0,
        gamma_e: float = 0.0,
        omega_pm: float = 0.0,
        omega_tm: float = 1.0,
        gamma_m: float = 0.0,
    ) -> "MaterialModel":
        """Single-resonance electric and magnetic Drude-Lorentz medium.

        A vanishing plasma frequency switches the corresponding response
        off, so ``drude_lorentz(omega_pe=3)`` is purely dielectric.
        """
        return cls(DRUDE_LORENTZ, (omega_pe, omega_te, gamma_e, omega_pm, omega_tm, gamma_m))

    @classmethod
    def perfect_conductor(cls) -> "MaterialModel":
        return cls(PERFECT_CONDUCTOR)

    @classmethod
    def perfect_permeable(cls) -> "MaterialModel":
        return cls(PERFECT_PERMEABLE)

    @property
    def is_perfect(self) -> bool:
        return self.kind in PERFECT_KINDS

    @property
    def is_vacuum(self) -> bool:
        if self.kind == VACUUM:
            return True
        if self.kind == CONSTANT:
            return self.params == (1.0, 1.0)
        if self.kind == DRUDE_LORENTZ:
            return self.params[0] == 0.0 and self.params[3] == 0.0
        return False


def _check_pointwise(m: MaterialModel) -> None:
    if m.is_perfect:
        raise ValueError(
            f"{m.kind} has no pointwise response; use it inside a LayerStack"
        )


def _as_output(u, value):
    if np.ndim(u) == 0:
        return float(value)
    return np.asarray(value, dtype=float)


def _lorentz(u, wp, wt, g):
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("imaginary frequency u must be non-negative")
    return 1.0 + wp * wp / (wt * wt + u * u + g * u)


def _response(m: MaterialModel, u: ArrayLike, magnetic: bool) -> ArrayLike:
    _check_pointwise(m)
    if m.kind == VACUUM:
        if np.any(np.asarray(u) < 0):
            raise ValueError("imaginary frequency u must be non-negative")
        return _as_output(u, np.ones_like(np.asarray(u, dtype=float)))
    if m.kind == CONSTANT:
        if np.any(np.asarray(u) < 0):
            raise ValueError("imaginary frequency u must be non-negative")
        val = m.params[1] if magnetic else m.params[0]
        return _as_output(u, np.full_like(np.asarray(u, dtype=float), val))
    wp, wt, g = m.params[3:6] if magnetic else m.params[0:3]
    return _as_output(u, _lorentz(u, wp, wt, g))


def permittivity_iu(m: MaterialModel, u: ArrayLike) -> ArrayLike:
    """Relative permittivity eps(iu) >= 1 on the imaginary frequency axis.

    Examples
    --------
    >>> permittivity_iu(MaterialModel.drude_lorentz(3.0, 1.0, 0.001), 0.0)
    10.0
    """
    return _response(m, u, magnetic=False)


def permeability_iu(m: MaterialModel, u: ArrayLike) -> ArrayLike:
    """Relative permeability mu(iu) >= 1 on the imaginary frequency axis."""
    return _response(m, u, magnetic=True)


def refractive_index_iu(m: MaterialModel, u: ArrayLike) -> ArrayLike:
    """Refractive index n(iu) = sqrt(eps(iu) mu(iu))."""
    eps = permittivity_iu(m, u)
    mu = permeability_iu(m, u)
    return _as_output(u, np.sqrt(np.asarray(eps) * np.asarray(mu)))


@dataclass(frozen=True)
class AtomModel:
    """Isotropic ground-state atom described by its dipole transitions.

    Attributes
    ----------
    transitions : tuple of (float, float)
        Pairs ``(omega_n, d_n^2)`` of transition frequency and squared
        dipole matrix element. A two-level atom has a single pair.
    """

    transitions: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        tr = tuple((float(w), float(d2)) for w, d2 in self.transitions)
        if not tr:
            raise ValueError("an atom needs at least one transition")
        for w, d2 in tr:
            if not (w > 0 and d2 > 0):
                raise ValueError("transition frequencies and dipoles must be > 0")
        object.__setattr__(self, "transitions", tr)

    @classmethod
    def two_level(cls, omega10: float = 1.0, d2: float = 1.0) -> "AtomModel":
        return cls(((omega10, d2),))

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[float, float]]) -> "AtomModel":
        return cls(tuple(pairs))

    @property
    def min_frequency(self) -> float:
        return min(w for w, _ in self.transitions)

    @property
    def static_polarizability(self) -> float:
        return polarizability_iu(self, 0.0)


def polarizability_iu(a: AtomModel, u: ArrayLike) -> ArrayLike:
    """Ground-state polarizability alpha(iu) = (2/3) sum_n w_n d_n^2 / (w_n^2 + u^2).

    Examples
    --------
    >>> polarizability_iu(AtomModel.two_level(), 1.0)
    0.3333333333333333
    """
    uu = np.asarray(u, dtype=float)
    if np.any(uu < 0):
        raise ValueError("imaginary frequency u must be non-negative")
    total = np.zeros_like(uu)
    for w, d2 in a.transitions:
        total = total + w * d2 / (w * w + uu * uu)
    return _as_output(u, 2.0 / 3.0 * total)
