"""Agreement between the compiled and the numpy kernel backends."""
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vdwbody import _kernels
from vdwbody.greens import LayerStack
from vdwbody.materials import MaterialModel

compiled = _kernels.compiled
pure = _kernels.pure
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")

DIEL = MaterialModel.drude_lorentz(3.0, 1.0, 0.001)
MAGN = MaterialModel.drude_lorentz(0.0, 1.0, 0.0, 3.0, 1.0, 0.001)
STACKS = {
    "dielectric": LayerStack.half_space(DIEL),
    "magnetic": LayerStack.half_space(MAGN),
    "conductor": LayerStack.half_space(MaterialModel.perfect_conductor()),
    "permeable": LayerStack.half_space(MaterialModel.perfect_permeable()),
    "coated": LayerStack.from_layers(MaterialModel.perfect_conductor(),
                                     [(MaterialModel.constant(4.0, 1.0), 0.3), (MAGN, 0.05)]),
}


@needs_compiled
def test_bessel_backends_agree():
    x = np.concatenate([np.linspace(0, 40, 40001), np.geomspace(40, 1e7, 1000)])
    for jc, jp in zip(compiled.bessel_j012(x), pure.bessel_j012(x)):
        assert np.max(np.abs(jc - jp)) < 1e-14


@needs_compiled
@pytest.mark.parametrize("name", list(STACKS))
def test_reflection_backends_agree(name):
    q = np.geomspace(1e-4, 1e4, 301)
    for u in (0.0, 1e-3, 1.0, 30.0):
        args = STACKS[name].kernel_arrays(u)
        qq = q if u > 0 else q[q > 0]
        rc = compiled.reflection(qq, u, *args)
        rp = pure.reflection(qq, u, *args)
        assert np.allclose(rc, rp, rtol=1e-13, atol=1e-15)


@needs_compiled
@settings(max_examples=30, deadline=None)
@given(st.sampled_from(list(STACKS)), st.floats(min_value=0.0, max_value=10.0),
       st.floats(min_value=0.0, max_value=2.0), st.floats(min_value=0.01, max_value=2.0))
def test_scattering_backends_agree(name, u, x, zp):
    args = STACKS[name].kernel_arrays(u)
    vc, ec, nc, okc = compiled.scattering_u2g(u, x, zp, *args, 1e-10, 0.0, 4000)
    vp, ep, npt, okp = pure.scattering_u2g(u, x, zp, *args, 1e-10, 0.0, 4000)
    assert okc == okp
    scale = np.max(np.abs(vp))
    assert np.max(np.abs(np.asarray(vc) - np.asarray(vp))) <= 1e-9 * scale + 1e-300


def test_environment_variable_forces_pure_backend():
    env = dict(os.environ, VDWBODY_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import vdwbody; print(vdwbody.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_backend_name_reported():
    assert _kernels.BACKEND in ("cython", "python")
    assert (_kernels.BACKEND == "cython") == (compiled is not None)
