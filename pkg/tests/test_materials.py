import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vdwbody.materials import (AtomModel, MaterialModel, permeability_iu, permittivity_iu,
                               polarizability_iu, refractive_index_iu)

pos = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)
freq = st.floats(min_value=0.0, max_value=1e4, allow_nan=False)


def test_drude_lorentz_static_value():
    assert permittivity_iu(MaterialModel.drude_lorentz(3.0, 1.0, 0.001), 0.0) == pytest.approx(10.0)


def test_magnetic_only_model_has_unit_permittivity():
    m = MaterialModel.drude_lorentz(0.0, 1.0, 0.0, 3.0, 1.0, 0.001)
    assert permittivity_iu(m, 2.0) == 1.0
    assert permeability_iu(m, 0.0) == pytest.approx(10.0)


def test_refractive_index_of_constant_medium():
    assert refractive_index_iu(MaterialModel.constant(4.0, 2.25), 3.0) == pytest.approx(3.0)


def test_array_input_gives_array():
    u = np.array([0.0, 1.0, 10.0])
    out = permittivity_iu(MaterialModel.constant(2.0, 1.0), u)
    assert isinstance(out, np.ndarray) and out.shape == (3,)


@given(pos, pos, st.floats(min_value=0, max_value=10), freq)
def test_response_at_least_one_and_decreasing(wp, wt, g, u):
    m = MaterialModel.drude_lorentz(wp, wt, g)
    e = permittivity_iu(m, u)
    assert e >= 1.0
    assert permittivity_iu(m, u + 1.0) <= e


@given(pos, pos, freq)
def test_polarizability_matches_definition(w, d2, u):
    a = AtomModel.two_level(w, d2)
    assert polarizability_iu(a, u) == pytest.approx(2.0 / 3.0 * w * d2 / (w * w + u * u), rel=1e-14)


def test_multilevel_polarizability_adds():
    a = AtomModel.from_pairs([(1.0, 1.0), (2.0, 0.5)])
    assert polarizability_iu(a, 1.0) == pytest.approx(1 / 3 + 2 / 3 * 1.0 / 5.0)
    assert a.min_frequency == 1.0
    assert a.static_polarizability == pytest.approx(2 / 3 * 1.25)


def test_perfect_materials_have_no_pointwise_response():
    with pytest.raises(ValueError, match="LayerStack"):
        permittivity_iu(MaterialModel.perfect_conductor(), 1.0)


@pytest.mark.parametrize("bad", [
    lambda: MaterialModel.constant(0.5, 1.0),
    lambda: MaterialModel.drude_lorentz(-1.0),
    lambda: MaterialModel.drude_lorentz(1.0, 0.0),
    lambda: MaterialModel("plasma"),
    lambda: MaterialModel("vacuum", (1.0,)),
    lambda: AtomModel(()),
    lambda: AtomModel.two_level(-1.0),
])
def test_invalid_models_rejected(bad):
    with pytest.raises(ValueError):
        bad()


def test_negative_frequency_rejected():
    with pytest.raises(ValueError):
        permittivity_iu(MaterialModel.constant(2.0, 1.0), -1.0)
    with pytest.raises(ValueError):
        polarizability_iu(AtomModel.two_level(), -0.1)


def test_vacuum_detection():
    assert MaterialModel.vacuum().is_vacuum
    assert MaterialModel.constant(1.0, 1.0).is_vacuum
    assert MaterialModel.drude_lorentz(0.0).is_vacuum
    assert not MaterialModel.perfect_conductor().is_vacuum
