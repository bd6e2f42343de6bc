"""Maximal surfaces in Lorentz-Minkowski space."""

from ._core import (
    MaxsurfError,
    SurfaceGrid,
    WeierstrassData,
    gauss_curvature,
    harmonic_h,
    integrate_immersion,
    level_curvature,
    lorentz_inner,
    make_catenoid,
    make_riemann,
    metric_factor,
    shiffman_u,
    slab_scan,
    stereographic,
    stereographic_infinity,
)

__all__ = [
    "MaxsurfError",
    "SurfaceGrid",
    "WeierstrassData",
    "gauss_curvature",
    "harmonic_h",
    "integrate_immersion",
    "level_curvature",
    "lorentz_inner",
    "make_catenoid",
    "make_riemann",
    "metric_factor",
    "shiffman_u",
    "slab_scan",
    "stereographic",
    "stereographic_infinity",
]
