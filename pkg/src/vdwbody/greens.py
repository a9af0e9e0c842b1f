"""Green tensors at imaginary frequency: bulk medium and planar layer stacks.

Conventions
-----------
The atoms sit in the top (vacuum) layer of a planar stack whose interfaces
are normal to z; both atoms lie in the xz-plane. With ``X = x_B - x_A``,
``Z = z_B - z_A`` and ``Z+ = z_A + z_B``, the scattering tensor
``G1(r_A, r_B, iu)`` has the non-zero elements xx, yy, zz, xz and zx, with
``G1_zx = -G1_xz``. Each element is a transverse-wavenumber integral of the
form

    G1_ij = int_0^inf dq  q e^{-b Z+} K_ij(q X) [r_s, r_p],  b = sqrt(u^2 + q^2),

which is evaluated by the adaptive kernel in :mod:`vdwbody._kernels`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from . import _kernels
from .materials import (PERFECT_CONDUCTOR, PERFECT_PERMEABLE, MaterialModel,
                        permeability_iu, permittivity_iu, refractive_index_iu)
from .quadrature import QuadratureError

DEFAULT_Q_REL_TOL = 1e-10
DEFAULT_Q_MAX_REFINE = 4000


@dataclass(frozen=True)
class Layer:
    """One homogeneous slab of a planar stack."""

    material: MaterialModel
    thickness: float = math.inf


@dataclass(frozen=True)
class LayerStack:
    """Planar layers ``j = 0..N``, bottom first; layer ``N`` is vacuum.

    Layer 0 and layer N are half spaces (their thickness is ignored); the
    interior layers need a finite positive thickness.

    Examples
    --------
    >>> s = LayerStack.half_space(MaterialModel.perfect_conductor())
    >>> s.n_interfaces
    1
    """

    layers: Tuple[Layer, ...]

    def __post_init__(self):
        layers = tuple(l if isinstance(l, Layer) else Layer(*l) for l in self.layers)
        object.__setattr__(self, "layers", layers)
        if len(layers) < 2:
            raise ValueError("a stack needs at least one layer below the vacuum region")
        if not layers[-1].material.is_vacuum:
            raise ValueError("the top layer (where the atoms live) must be vacuum")
        for j, layer in enumerate(layers[1:-1], start=1):
            if not (0 < layer.thickness < math.inf):
                raise ValueError(f"interior layer {j} needs a finite positive thickness")
        if len(layers) - 1 > 64:
            raise ValueError("at most 64 layers below the vacuum region are supported")

    @classmethod
    def half_space(cls, material: MaterialModel) -> "LayerStack":
        return cls((Layer(material), Layer(MaterialModel.vacuum())))

    @classmethod
    def from_layers(cls, substrate: MaterialModel,
                    films: Sequence[Tuple[MaterialModel, float]] = ()) -> "LayerStack":
        """Substrate half space covered by films listed bottom to top."""
        layers = [Layer(substrate)] + [Layer(m, d) for m, d in films]
        return cls(tuple(layers) + (Layer(MaterialModel.vacuum()),))

    @classmethod
    def vacuum(cls) -> "LayerStack":
        return cls.half_space(MaterialModel.vacuum())

    @property
    def n_interfaces(self) -> int:
        return len(self.layers) - 1

    @property
    def below(self) -> Tuple[Layer, ...]:
        return self.layers[:-1]

    @property
    def is_vacuum(self) -> bool:
        return all(l.material.is_vacuum for l in self.layers)

    def kernel_arrays(self, u: float):
        """Per-layer ``(eps, mu, thickness, kind)`` arrays at frequency ``u``."""
        n = len(self.layers) - 1
        eps = np.ones(n)
        mu = np.ones(n)
        thick = np.zeros(n)
        kind = np.zeros(n, dtype=np.int32)
        for j, layer in enumerate(self.below):
            m = layer.material
            if m.kind == PERFECT_CONDUCTOR:
                kind[j] = _kernels.KIND_CONDUCTOR
            elif m.kind == PERFECT_PERMEABLE:
                kind[j] = _kernels.KIND_PERMEABLE
            else:
                eps[j] = permittivity_iu(m, u)
                mu[j] = permeability_iu(m, u)
            if j > 0:
                thick[j] = layer.thickness
        return eps, mu, thick, kind


@dataclass(frozen=True)
class Geometry:
    """Positions of atoms A and B in the xz-plane."""

    x_a: float
    z_a: float
    x_b: float
    z_b: float

    def __post_init__(self):
        if self.x_a == self.x_b and self.z_a == self.z_b:
            raise ValueError("the two atoms must not coincide")

    @classmethod
    def parallel(cls, l: float, z: float) -> "Geometry":
        """Both atoms at height ``z``, a lateral distance ``l`` apart."""
        return cls(0.0, z, l, z)

    @classmethod
    def vertical(cls, z_a: float, l: float) -> "Geometry":
        """Atom B directly above atom A at distance ``l``."""
        return cls(0.0, z_a, 0.0, z_a + l)

    @property
    def X(self) -> float:
        return self.x_b - self.x_a

    @property
    def Z(self) -> float:
        return self.z_b - self.z_a

    @property
    def zplus(self) -> float:
        return self.z_a + self.z_b

    @property
    def l(self) -> float:
        return math.hypot(self.X, self.Z)

    @property
    def lplus(self) -> float:
        return math.hypot(self.X, self.zplus)

    @property
    def r_a(self) -> np.ndarray:
        return np.array([self.x_a, 0.0, self.z_a])

    @property
    def r_b(self) -> np.ndarray:
        return np.array([self.x_b, 0.0, self.z_b])

    def check_layered(self) -> None:
        if not (self.z_a > 0 and self.z_b > 0):
            raise ValueError("atoms must sit above the stack (z > 0)")

    def swapped(self) -> "Geometry":
        return Geometry(self.x_b, self.z_b, self.x_a, self.z_a)

    def shifted(self, dx: float = 0.0) -> "Geometry":
        return Geometry(self.x_a + dx, self.z_a, self.x_b + dx, self.z_b)

    def moved(self, which: str, axis: int, delta: float) -> "Geometry":
        """Displace atom ``which`` ('A' or 'B') along x (axis 0) or z (axis 2)."""
        xa, za, xb, zb = self.x_a, self.z_a, self.x_b, self.z_b
        if which == "A":
            if axis == 0:
                xa += delta
            else:
                za += delta
        else:
            if axis == 0:
                xb += delta
            else:
                zb += delta
        return Geometry(xa, za, xb, zb)


# ---------------------------------------------------------------------------
# bulk medium
# ---------------------------------------------------------------------------

def bulk_green_u2(medium: MaterialModel, r_a, r_b, u: float) -> np.ndarray:
    """``u^2 G0(r_A, r_B, iu)`` for a homogeneous medium; finite at ``u = 0``."""
    d = np.asarray(r_a, dtype=float) - np.asarray(r_b, dtype=float)
    dist = float(np.linalg.norm(d))
    if dist == 0.0:
        raise ValueError("bulk Green tensor is singular at coincident points")
    if u < 0:
        raise ValueError("u must be non-negative")
    n = refractive_index_iu(medium, u)
    mu = permeability_iu(medium, u)
    s = 1.0 / (n * dist)
    fu = u * u + u * s + s * s
    gu = u * u + 3.0 * u * s + 3.0 * s * s
    rr = np.outer(d, d) / (dist * dist)
    return mu / (4.0 * math.pi * dist) * (fu * np.eye(3) - gu * rr) * math.exp(-n * dist * u)


def bulk_green(medium: MaterialModel, r_a, r_b, u: float) -> np.ndarray:
    """Bulk Green tensor ``G0(r_A, r_B, iu)`` of a homogeneous medium.

    Examples
    --------
    >>> g = bulk_green(MaterialModel.vacuum(), [0, 0, 0], [1, 0, 0], 1.0)
    >>> bool(np.allclose(g, g.T))
    True
    """
    if not u > 0:
        raise ValueError("u must be positive; use bulk_green_u2 at u = 0")
    return bulk_green_u2(medium, r_a, r_b, u) / (u * u)


# ---------------------------------------------------------------------------
# layered media
# ---------------------------------------------------------------------------

def reflection_coefficients(stack: LayerStack, q: float, u: float) -> Tuple[float, float]:
    """Reflection coefficients ``(r_s, r_p)`` of the stack seen from the vacuum layer.

    Examples
    --------
    >>> reflection_coefficients(LayerStack.half_space(MaterialModel.perfect_conductor()), 1.0, 1.0)
    (-1.0, 1.0)
    """
    if q < 0 or u < 0 or (q == 0 and u == 0):
        raise ValueError("need q >= 0, u >= 0, not both zero")
    eps, mu, thick, kind = stack.kernel_arrays(u)
    rs, rp = _kernels.reflection(np.array([float(q)]), float(u), eps, mu, thick, kind)
    return float(rs[0]), float(rp[0])


@dataclass(frozen=True)
class ScatteringElements:
    """u^2-scaled scattering tensor elements for lateral offset ``|X|``."""

    xx: float
    yy: float
    zz: float
    xz: float
    error: float
    evaluations: int
    converged: bool

    def tensor(self, sign_x: float) -> np.ndarray:
        xz = math.copysign(1.0, sign_x) * self.xz if sign_x != 0 else 0.0
        return np.array([[self.xx, 0.0, xz], [0.0, self.yy, 0.0], [-xz, 0.0, self.zz]])


def scattering_elements_u2(stack: LayerStack, x: float, zplus: float, u: float,
                           rel_tol: float = DEFAULT_Q_REL_TOL, abs_tol: float = 0.0,
                           max_refine: int = DEFAULT_Q_MAX_REFINE) -> ScatteringElements:
    """Evaluate ``u^2 G1`` elements by adaptive q-quadrature (``u >= 0``)."""
    if not zplus > 0:
        raise ValueError("Z+ must be positive")
    if stack.is_vacuum:
        return ScatteringElements(0.0, 0.0, 0.0, 0.0, 0.0, 0, True)
    eps, mu, thick, kind = stack.kernel_arrays(u)
    vals, err, nev, ok = _kernels.scattering_u2g(float(u), abs(float(x)), float(zplus),
                                                 eps, mu, thick, kind,
                                                 rel_tol, abs_tol, int(max_refine))
    return ScatteringElements(float(vals[0]), float(vals[1]), float(vals[2]), float(vals[3]),
                              float(err), int(nev), bool(ok))


def scattering_green(stack: LayerStack, geom: Geometry, u: float,
                     tol: float = DEFAULT_Q_REL_TOL,
                     max_refine: int = DEFAULT_Q_MAX_REFINE) -> np.ndarray:
    """Scattering Green tensor ``G1(r_A, r_B, iu)`` above a planar stack.

    Raises
    ------
    QuadratureError
        If the transverse-wavenumber integral misses ``tol``; the achieved
        error estimate is attached to the exception.
    """
    if not u > 0:
        raise ValueError("u must be positive")
    geom.check_layered()
    el = scattering_elements_u2(stack, geom.X, geom.zplus, u, tol, 0.0, max_refine)
    if not el.converged:
        raise QuadratureError(
            f"q-integral did not converge (error estimate {el.error:.3g})", None)
    return el.tensor(geom.X) / (u * u)


REGIMES = ("retarded_smallX_perfect", "nonretarded_perfect",
           "nonretarded_dielectric", "nonretarded_magnetic")


def _material_of(obj: Union[LayerStack, MaterialModel]) -> MaterialModel:
    if isinstance(obj, MaterialModel):
        return obj
    if isinstance(obj, LayerStack):
        if obj.n_interfaces != 1:
            raise ValueError("asymptotic tensors are defined for a single half space")
        return obj.layers[0].material
    raise TypeError("expected a LayerStack or MaterialModel")


def _perfect_rp(m: MaterialModel) -> Tuple[float, float]:
    if m.kind == PERFECT_CONDUCTOR:
        return -1.0, 1.0
    if m.kind == PERFECT_PERMEABLE:
        return 1.0, -1.0
    raise ValueError(f"regime requires a perfect reflector, got {m.kind}")


def scattering_green_asymptotic(regime: str, body: Union[LayerStack, MaterialModel],
                                geom: Geometry, u: float) -> np.ndarray:
    """Closed-form limits of the scattering Green tensor above a half space.

    Parameters
    ----------
    regime : str
        ``retarded_smallX_perfect`` (perfect mirror, ``X << Z+``),
        ``nonretarded_perfect``, ``nonretarded_dielectric`` or
        ``nonretarded_magnetic``.
    body : LayerStack or MaterialModel
        The half-space material (a single-interface stack is accepted).
    geom : Geometry
    u : float
        Imaginary frequency, > 0.
    """
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    if not u > 0:
        raise ValueError("u must be positive")
    m = _material_of(body)
    X, zp, lp = geom.X, geom.zplus, geom.lplus
    four_pi = 4.0 * math.pi
    if regime == "retarded_smallX_perfect":
        rs, rp = _perfect_rp(m)
        w = 1.0 / (zp * u)
        env = math.exp(-zp * u)
        xx = (rs - (1.0 + 2.0 * w + 2.0 * w * w) * rp) * env / (2.0 * four_pi * zp)
        zz = -(w + w * w) * rp * env / (2.0 * math.pi * zp)
        return np.array([[xx, 0.0, 0.0], [0.0, xx, 0.0], [0.0, 0.0, zz]])
    if regime in ("nonretarded_perfect", "nonretarded_dielectric"):
        if regime == "nonretarded_perfect":
            _, rho = _perfect_rp(m)
        else:
            if m.is_perfect:
                raise ValueError("nonretarded_dielectric needs a pointwise material")
            eps = permittivity_iu(m, u)
            rho = (eps - 1.0) / (eps + 1.0)
        pre = rho / (four_pi * u * u)
        lp5 = lp ** 5
        xx = pre * (2.0 * X * X - zp * zp) / lp5
        yy = -pre / lp ** 3
        xz = -pre * 3.0 * X * zp / lp5
        zz = pre * (X * X - 2.0 * zp * zp) / lp5
        return np.array([[xx, 0.0, xz], [0.0, yy, 0.0], [-xz, 0.0, zz]])
    # nonretarded_magnetic
    if m.is_perfect:
        raise ValueError("nonretarded_magnetic needs a pointwise material")
    mu = permeability_iu(m, u)
    chi = mu - 1.0
    rho = chi / (mu + 1.0)
    w = 1.0 / (lp + zp)          # (l+ - Z+)/X^2 written without cancellation
    xx = w * rho / four_pi + zp * w * chi / (4.0 * four_pi * lp)
    yy = w * chi / (4.0 * four_pi) + zp * w * rho / (four_pi * lp)
    xz = X * w * chi / (4.0 * four_pi * lp)
    zz = chi / (4.0 * four_pi * lp)
    return np.array([[xx, 0.0, xz], [0.0, yy, 0.0], [-xz, 0.0, zz]])
