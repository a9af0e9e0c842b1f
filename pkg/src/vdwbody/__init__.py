"""Body-assisted van der Waals interaction between two ground-state atoms.

The package evaluates the two-atom potential above planar magnetodielectric
stacks on the imaginary frequency axis, together with its closed-form
asymptotic limits, single-atom potentials and finite-difference forces.
"""
__version__ = "0.1.0"

from ._kernels import BACKEND
from .greens import (Geometry, Layer, LayerStack, bulk_green, bulk_green_u2,
                     reflection_coefficients, scattering_elements_u2, scattering_green,
                     scattering_green_asymptotic)
from .materials import (AtomModel, MaterialModel, permeability_iu, permittivity_iu,
                        polarizability_iu, refractive_index_iu)
from .potential import (AsymptoticCoefficients, ConvergenceError, PotentialBreakdown,
                        asymptotic_breakdown, asymptotic_coefficients, force,
                        force_estimate, permeable_vertical_threshold, u0_free, u1_cross,
                        u2_scatter, u_asymptotic, u_bulk, u_single_atom, u_total)
from .quadrature import QuadResult, QuadratureError

__all__ = [
    "BACKEND", "Geometry", "Layer", "LayerStack", "bulk_green", "bulk_green_u2",
    "reflection_coefficients", "scattering_elements_u2", "scattering_green",
    "scattering_green_asymptotic", "AtomModel", "MaterialModel", "permeability_iu",
    "permittivity_iu", "polarizability_iu", "refractive_index_iu",
    "AsymptoticCoefficients", "ConvergenceError", "PotentialBreakdown",
    "asymptotic_breakdown", "asymptotic_coefficients", "force", "force_estimate",
    "permeable_vertical_threshold", "u0_free", "u1_cross", "u2_scatter", "u_asymptotic",
    "u_bulk", "u_single_atom", "u_total", "QuadResult", "QuadratureError",
]
