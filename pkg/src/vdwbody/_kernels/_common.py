"""Pieces shared by the compiled and the pure-Python kernels.

The 15-point Kronrod / 7-point Gauss pair below is the standard QUADPACK
rule. ``XGK`` holds the non-negative Kronrod abscissae in decreasing
order; the Gauss abscissae are ``XGK[1::2]`` (including the centre).
"""
import math

import numpy as np

XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full 15-node layout on [-1, 1], ordered left to right, with the matching
# Kronrod weights and Gauss weights (zero at Kronrod-only nodes).
NODES = np.concatenate([-XGK[:-1], [0.0], XGK[:-1][::-1]])
KWEIGHTS = np.concatenate([WGK[:-1], [WGK[-1]], WGK[:-1][::-1]])
_g = np.zeros(8)
_g[1::2] = WG
GWEIGHTS = np.concatenate([_g[:-1], [_g[-1]], _g[:-1][::-1]])

EPS = np.finfo(float).eps
UFLOW = np.finfo(float).tiny

# The exponential envelope exp(-(b - u) Z+) is followed out to this many
# e-folds, which leaves ~1e-22 of the peak and room for polynomial prefactors.
ENVELOPE_EFOLDS = 50.0

# Oscillation-driven subdivision starts once the cutoff spans this many
# half-periods of J_n(qX).
MIN_HALF_PERIODS = 4


def gk_error(resk, resg, resabs, resasc, half):
    """QUADPACK error heuristic for one panel (array-friendly)."""
    err = np.abs((resk - resg) * half)
    resasc = resasc * half
    resabs = resabs * half
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    floor = 50.0 * EPS * resabs
    err = np.where(resabs > UFLOW / (50.0 * EPS), np.maximum(err, floor), err)
    return err


def envelope_point(u, zplus, efolds):
    """Transverse wavenumber where (b - u) Z+ equals ``efolds``."""
    kappa = efolds / zplus
    return math.sqrt(kappa * (2.0 * u + kappa))


def q_panel_edges(u, x, zplus, indices, thicknesses):
    """Initial panel edges for the transverse-wavenumber integral.

    Parameters
    ----------
    u : float
        Imaginary frequency (>= 0).
    x : float
        Lateral separation ``|X|``.
    zplus : float
        Sum of the atom heights, > 0.
    indices : sequence of float
        Refractive indices n_j(iu) of the layers below the vacuum region.
    thicknesses : sequence of float
        Finite layer thicknesses (non-positive or infinite entries ignored).

    Returns
    -------
    numpy.ndarray
        Strictly increasing edges starting at 0 and ending at the cutoff.
    """
    qmax = envelope_point(u, zplus, ENVELOPE_EFOLDS)
    pts = [0.0, qmax]
    for e in (1.0, 5.0, 15.0):
        pts.append(envelope_point(u, zplus, e))
    if u > 0:
        pts.append(u)
        for n in indices:
            if n > 1.0:
                pts.append(u * n)
                pts.append(u * math.sqrt(n * n - 1.0))
    for d in thicknesses:
        if 0 < d < math.inf:
            pts.append(1.0 / d)
    pts = np.array([p for p in pts if 0.0 <= p <= qmax])
    if x > 0:
        nhalf = int(math.floor(qmax * x / math.pi))
        if nhalf >= MIN_HALF_PERIODS:
            pts = np.concatenate([pts, math.pi / x * np.arange(1, nhalf + 1)])
    pts = np.unique(pts)
    keep = np.concatenate([[True], np.diff(pts) > 1e-9 * qmax])
    pts = pts[keep]
    if pts[-1] < qmax:
        pts[-1] = qmax
    return pts
