"""Acceptance suite: one check per criterion, at the stated tolerances.

Each test records a single PASS/FAIL line (with the measured numbers and
runtime); the lines are printed together at the end of the pytest run.
"""
import itertools
import time
from fractions import Fraction

import numpy as np
from scipy import integrate

from nilband import load_fixture
from nilband.algebra import (GroupElement, gamma_enumerate, group_multiply, s_matrix_symbolic,
                             validate)
from nilband.bandlimited import (constant_u_field, default_probes, isometry_sum,
                                 left_translate, parseval_LGamma_check, random_band_limited,
                                 reconstruction_error, spectral_quadrature,
                                 synthesize_admissible_f)
from nilband.frames import density_check, intertwining_regression, parseval_certify
from nilband.poly import det_of_central_matrix, evaluate, format_poly
from nilband.representation import Grid, GridFunction
from nilband.spectra import b_matrix, jump_indices, m_matrix, region_flags

from conftest import WORKED_FIXTURES

RESULTS: dict[int, str] = {}


def record(number: int, ok: bool, summary: str, seconds: float, limit: float) -> None:
    within = seconds < limit
    verdict = "PASS" if ok and within else "FAIL"
    RESULTS[number] = (f"{verdict} criterion {number}: {summary}; "
                       f"{seconds:.1f}s (limit {limit:g}s)")
    assert ok, RESULTS[number]
    assert within, RESULTS[number]


def band_setup(name, q_lambda=64, T=8, q=16):
    spec = load_fixture(name)
    grid = Grid(spec.d, T=T, q=q)
    quad = spectral_quadrature(spec, q_lambda)
    return spec, grid, synthesize_admissible_f(spec, quad, constant_u_field(quad, grid))


def test_criterion_1_symbolic_determinants():
    t0 = time.perf_counter()
    want = {"example1": {(2, 0): 1, (0, 2): -1},
            "example2": {(2, 0, 1): 1, (1, 2, 0): 1, (0, 3, 0): 1, (0, 2, 1): 1,
                         (0, 1, 2): -1, (0, 0, 3): 1}}
    got = {}
    for name in want:
        spec = load_fixture(name)
        got[name] = det_of_central_matrix(s_matrix_symbolic(spec), nvars=spec.c)
    ok = all(got[k].terms == {e: Fraction(c) for e, c in v.items()} for k, v in want.items())
    record(1, ok, "det S: example1 = " + format_poly(got["example1"]) + ", example2 = "
           + format_poly(got["example2"]), time.perf_counter() - t0, 1)


def test_criterion_2_seven_dim_B():
    t0 = time.perf_counter()
    spec = load_fixture("seven_dim")
    rng = np.random.default_rng(0)
    bad = 0
    for _ in range(100):
        l1, l2, l3 = (Fraction(int(a), int(b)) for a, b in zip(rng.integers(-99, 100, 3),
                                                               rng.integers(1, 50, 3)))
        want = [[1, 0, 0, 0], [0, 1, 0, 0], [0, -l3, -l1, -l2], [0, 0, -l2, -l1]]
        bad += b_matrix(spec, [l1, l2, l3], exact=True) != want
    record(2, bad == 0, f"B(lambda) exact at 100 rational lambda, {bad} mismatches",
           time.perf_counter() - t0, 1)


def test_criterion_3_intertwining():
    t0 = time.perf_counter()
    devs = {}
    for name, q in (("heisenberg", 16), ("example1", 8), ("example2", 4)):
        spec = load_fixture(name)
        grid = Grid(spec.d, T=8, q=q)
        rng = np.random.default_rng(1)
        vals = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
        v = GridFunction(grid, np.where(grid.cube_indicator(), vals, 0))
        lam = rng.uniform(-1, 1, spec.c)
        devs[name] = intertwining_regression(spec, lam, v, 3)
    worst = max(devs.values())
    record(3, worst <= 1e-11, "max deviation " + ", ".join(f"{k} {v:.1e}" for k, v in
                                                          devs.items()) + " (tol 1e-11)",
           time.perf_counter() - t0, 10)


def test_criterion_4_parseval_window():
    t0 = time.perf_counter()
    worst = {16: 0.0, 32: 0.0}
    counts = {}
    for name in ("heisenberg", "example1", "five_dim", "seven_dim", "seven_dim_sampling"):
        spec = load_fixture(name)
        nodes = spectral_quadrature(spec, 16).nodes
        pick = nodes[np.linspace(0, len(nodes) - 1, 10).round().astype(int)]
        counts[name] = len(pick)
        for lam in pick:
            for q in (16, 32):
                rep = parseval_certify(spec, lam, Grid(spec.d, T=8, q=q))
                worst[q] = max(worst[q], abs(rep.A - 1), abs(rep.B - 1))
    ok = worst[16] <= 2e-2 and worst[32] <= 5e-3 and min(counts.values()) >= 10
    record(4, ok, f"max |A-1|,|B-1| = {worst[16]:.1e} at q=16 (tol 2e-2), {worst[32]:.1e} "
           f"at q=32 (tol 5e-3), 10 lambda in I for each of {len(counts)} fixtures with d<=2",
           time.perf_counter() - t0, 120)


def test_criterion_5_density_falsification():
    t0 = time.perf_counter()
    cases = [("heisenberg", [2.0]), ("heisenberg", [4.0]), ("five_dim", [2.0]),
             ("example1", [0.0, 2.0])]
    res = [density_check(load_fixture(n), lam) for n, lam in cases]
    ok = all(r["abs_det_B"] >= 2 and r["max_residual"] >= 0.1 for r in res)
    record(5, ok, "span residuals " + ", ".join(f"{n}{tuple(l)} |det B|={r['abs_det_B']:g}: "
                                                f"{r['max_residual']:.3f}"
                                                for (n, l), r in zip(cases, res)) + " (need >= 0.1)",
           time.perf_counter() - t0, 30)


def test_criterion_6_norm_identity():
    t0 = time.perf_counter()
    lines, ok = [], True
    for name in ("heisenberg", "five_dim"):
        spec = load_fixture(name)

        def density(x, spec=spec):
            flags = region_flags(spec, [x])
            return abs(flags.det_value) if flags.in_I else 0.0

        mu, _ = integrate.quad(density, -0.5, 0.5, points=[0.0], limit=200)
        gaps = []
        for q_lambda in (16, 32, 64):
            f = band_setup(name, q_lambda, T=4, q=8)[2]
            gaps.append(abs(f.norm_sq() - mu) / mu)
        ok &= gaps[-1] <= 1e-2 and all(b <= a + 1e-15 for a, b in zip(gaps, gaps[1:]))
        lines.append(f"{name} mu(I)={mu:.6f}, rel gap {gaps[-1]:.1e} at q_lambda=64")
    record(6, ok, "; ".join(lines), time.perf_counter() - t0, 30)


def test_criterion_7_parseval_frame_of_translates():
    t0 = time.perf_counter()
    _, _, f = band_setup("heisenberg")
    finals, monotone = [], True
    for seed in range(10):
        g = random_band_limited(f, np.random.default_rng(seed))
        ratios = [parseval_LGamma_check(f, g, R) for R in range(0, 9)]
        monotone &= all(b >= a - 1e-12 for a, b in zip(ratios, ratios[1:]))
        finals.append(ratios[-1])
    ok = monotone and min(finals) >= 0.95
    below = sum(r < 0.95 for r in finals)
    record(7, ok, f"ratio at R=8 over 10 random g: min {min(finals):.4f}, max {max(finals):.4f},"
           f" {below} below 0.95; monotone {monotone}", time.perf_counter() - t0, 120)


def test_criterion_8_sampling_reconstruction():
    t0 = time.perf_counter()
    radii = [2, 4, 6, 8]
    parts, ok = [], True
    for name, tol, seeds in (("heisenberg", 5e-2, range(10)), ("five_dim", 1e-1, range(3))):
        spec, grid, f = band_setup(name)
        probes = default_probes(spec, grid)
        hs = [("f", f)] + [(f"g{s}", random_band_limited(f, np.random.default_rng(s)))
                           for s in seeds]
        finals = []
        for label, h in hs:
            errs = reconstruction_error(h, f, radii, probes)["errors"]
            ok &= all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))
            finals.append(errs[-1])
        ok &= max(finals) <= tol
        parts.append(f"{name} R=8 error h=f {finals[0]:.3f}, random h max {max(finals[1:]):.3f}"
                     f" ({sum(e > tol for e in finals)} of {len(finals)} above {tol:g})")
    record(8, ok, "; ".join(parts), time.perf_counter() - t0, 300)


def random_unshifted(f, rng, terms=3):
    """Random member of span L(Gamma) f using only central and Y translates,
    so its support matches f's and the d=2 sums stay affordable."""
    spec = f.spec
    parts = [left_translate(f, GroupElement(tuple(rng.integers(-1, 2, spec.c).astype(float)),
                                            tuple(rng.integers(-1, 2, spec.d).astype(float)),
                                            (0.0,) * spec.d)) for _ in range(terms)]
    return f.combine([complex(*rng.normal(size=2)) for _ in range(terms)], parts)


def test_criterion_9_isometry():
    t0 = time.perf_counter()
    parts, ok = [], True
    ranges, grids = (4, 8, 16), (24, 32)
    for name in ("heisenberg", "five_dim"):
        raw = {}
        for q in grids:
            # q >= 24 keeps the l-modulations up to 16 below the grid Nyquist limit
            _, _, f = band_setup(name, q=q)
            for label, h in (("f", f), ("g", random_unshifted(f, np.random.default_rng(0)))):
                raw[label, q] = np.array([abs(isometry_sum(h, f, L) - h.norm_sq()) / h.norm_sq()
                                          for L in ranges])
        for label in ("f", "g"):
            # the grid error is O(1/q^2); extrapolate it away so the tail is measured
            lo, hi = grids
            errs = (hi ** 2 * raw[label, hi] - lo ** 2 * raw[label, lo]) / (hi ** 2 - lo ** 2)
            ok &= errs[-1] <= 5e-2 and errs[0] > errs[1] > errs[2]
            parts.append(f"{name}/{label} " + "/".join(f"{e:.4f}" for e in errs)
                         + f" (q=32 raw {raw[label, hi][-1]:.4f})")
    record(9, ok, "rel error at l-range 4/8/16, grid-extrapolated: " + ", ".join(parts)
           + " (tol 5e-2 at 16)", time.perf_counter() - t0, 120)


def test_criterion_10_structural_suite():
    t0 = time.perf_counter()
    failures = []
    rng = np.random.default_rng(10)
    for name in WORKED_FIXTURES:
        spec = load_fixture(name)
        if not dict(validate(spec).as_dict())["jacobi"]["pass"]:
            failures.append(f"{name} jacobi")

        def rand():
            v = [Fraction(int(a), int(b)) for a, b in zip(rng.integers(-9, 10, spec.n),
                                                          rng.integers(1, 6, spec.n))]
            return GroupElement(tuple(v[:spec.c]), tuple(v[spec.c:spec.c + spec.d]),
                                tuple(v[spec.c + spec.d:]))

        for _ in range(1000):
            a, b, c = rand(), rand(), rand()
            if group_multiply(spec, group_multiply(spec, a, b), c) != \
                    group_multiply(spec, a, group_multiply(spec, b, c)):
                failures.append(f"{name} associativity")
                break
        generic = tuple(range(spec.c + 1, spec.n + 1))
        det_s = validate(spec).det_s
        for lam in rng.uniform(-1, 1, size=(1000, spec.c)):
            if abs(evaluate(det_s, list(lam))) < 1e-9:
                continue
            if m_matrix(spec, lam)[1] != spec.c or jump_indices(spec, lam) != generic:
                failures.append(f"{name} nullity/jumps at {lam}")
                break
        # some X-order changes Gamma exactly when [a, a] != 0; Y and Z orders never do
        canon = set(gamma_enumerate(spec, 1))
        a_abelian = all(not any(v) for row in spec.xx for v in row)
        x_same = [set(gamma_enumerate(spec, 1, x_order=list(p))) == canon
                  for p in itertools.permutations(range(1, spec.d + 1))]
        if all(x_same) != a_abelian:
            failures.append(f"{name} X-order")
        for kw, size in (("y_order", spec.d), ("z_order", spec.c)):
            if size > 1 and set(gamma_enumerate(spec, 1, **{kw: list(range(1, size + 1))})) != canon:
                failures.append(f"{name} {kw} reversed")
    record(10, not failures, f"{len(WORKED_FIXTURES)} fixtures: associativity on 1000 exact "
           f"triples, Jacobi, nullity and jump indices at 1000 lambda, Gamma order checks; "
           f"failures: {failures or 'none'}", time.perf_counter() - t0, 30)
