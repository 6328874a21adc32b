"""Walk through the full pipeline on the three-dimensional Heisenberg group.

Run with ``python3 demos/heisenberg_walkthrough.py``. Each step prints what it
computed; nothing is written to disk.
"""
import numpy as np

from nilband import load_fixture, validate
from nilband.bandlimited import (constant_u_field, default_probes, parseval_LGamma_check,
                                 random_band_limited, reconstruction_error,
                                 spectral_quadrature, synthesize_admissible_f)
from nilband.frames import density_check, parseval_certify
from nilband.poly import format_poly
from nilband.representation import Grid
from nilband.spectra import measure_of_I, region_flags

spec = load_fixture("heisenberg")
report = validate(spec)
print(f"algebra: n={spec.n}, d={spec.d}, checks passed: {report.passed}")
print(f"det S(lambda) = {format_poly(report.det_s)}")

# Where does a single Gabor system with the chirped window work?
for lam in (0.3, 0.5, 0.8, 2.0):
    flags = region_flags(spec, [lam])
    print(f"lambda={lam}: in I {flags.in_I}, |det S| = {abs(flags.det_value):g}")
print(f"measure of I on a q=64 grid: {measure_of_I(spec, 64)}")

# Inside I the window gives a Parseval frame; outside E the density check bites.
rep = parseval_certify(spec, [0.3], Grid(1))
print(f"frame bounds at lambda=0.3: A={rep.A:.12f}, B={rep.B:.12f} ({rep.verdict})")
dens = density_check(spec, [2.0])
print(f"lambda=2.0: |det B| = {dens['abs_det_B']:g}, worst span residual {dens['max_residual']:.3f}")

# The band-limited space: ||f||^2 matches mu(I), translates of f form a Parseval frame.
grid = Grid(1, T=8, q=16)
quad = spectral_quadrature(spec, 64)
f = synthesize_admissible_f(spec, quad, constant_u_field(quad, grid))
print(f"||f||^2 = {f.norm_sq():.6f}")
g = random_band_limited(f, np.random.default_rng(0))
for R in (1, 2, 4, 8):
    print(f"  Parseval ratio over Gamma radius {R}: {parseval_LGamma_check(f, g, R):.4f}")

# Sampling: rebuild V_f g off the lattice from its values on Gamma.
curve = reconstruction_error(g, f, [2, 4, 8], default_probes(spec, grid))
for R, err in zip(curve["radii"], curve["errors"]):
    print(f"  reconstruction radius {R}: relative error {err:.4f}")
