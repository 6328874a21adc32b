"""Spectral geometry of the nine-dimensional example with a cubic determinant.

Run with ``python3 demos/example2_regions.py``.
"""
import numpy as np

from nilband import load_fixture, validate
from nilband.frames import intertwining_regression
from nilband.poly import format_poly, homogeneity_degree
from nilband.representation import Grid, GridFunction
from nilband.spectra import jump_indices, lambda_grid, measure_of_I, region_flags

spec = load_fixture("example2")
det_s = validate(spec).det_s
print(f"det S = {format_poly(det_s)} (homogeneous of degree {homogeneity_degree(det_s)})")

lams = lambda_grid(spec, 16)
flags = [region_flags(spec, lam) for lam in lams]
for name in ("in_E", "in_K", "in_Q", "in_I"):
    share = np.mean([getattr(fl, name) for fl in flags])
    print(f"share of the q=16 lambda grid {name[3:]}: {share:.3f}")
for q in (16, 32):
    print(f"q={q}: {measure_of_I(spec, q)}")

lam = next(l for l, fl in zip(lams, flags) if fl.in_I)
print(f"jump indices at lambda={lam}: {jump_indices(spec, lam)}")

# The Gamma_1 orbit of a vector under pi_lambda is exactly a Gabor family.
grid = Grid(spec.d, T=8, q=4)
rng = np.random.default_rng(0)
values = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
v = GridFunction(grid, np.where(grid.cube_indicator(), values, 0))
print(f"orbit vs Gabor family, box 2: max deviation {intertwining_regression(spec, lam, v, 2):.2e}")
