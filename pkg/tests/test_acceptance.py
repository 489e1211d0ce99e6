"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete.
"""

import math
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

import drsplit as d
from drsplit import cli
from conftest import (
    descriptor_zoo,
    random_linear_instance,
    sample_point,
)

GRID_STEPS = 41
GRID_LO, GRID_HI = -100.0, 100.0


@contextmanager
def criterion(num, text):
    try:
        yield
    except Exception:
        print(f"FAIL  criterion {num}: {text}")
        raise
    print(f"PASS  criterion {num}: {text}")


@pytest.fixture(scope="module")
def reference_sets():
    return d.Affine([[1.0, 5.0]], [6.0]), d.Orthant(2)


@pytest.fixture(scope="module")
def grid_points():
    axis = np.linspace(GRID_LO, GRID_HI, GRID_STEPS)
    return [np.array([x, y]) for x in axis for y in axis]


@pytest.fixture(scope="module")
def grid_runs(reference_sets, grid_points):
    """One full-grid run per method, shared by criteria 1 and 8."""
    set_a, set_b = reference_sets
    out = {}
    for method, rules in (
        (d.MethodKind.DRA, [d.ExactFixedPoint(1e-14), d.MaxIter(100_000)]),
        (d.MethodKind.MAP, [d.Feasibility(1e-4), d.MaxIter(100_000)]),
        (d.MethodKind.MRP, [d.Feasibility(1e-4), d.MaxIter(100_000)]),
    ):
        out[method] = [
            d.run(set_a, set_b, method, z0, rules) for z0 in grid_points
        ]
    return out


def test_criterion_1_finite_convergence_on_grid(reference_sets, grid_runs):
    set_a, set_b = reference_sets
    with criterion(1, "DRA terminates exactly from every grid point, in A cap B"):
        traces = grid_runs[d.MethodKind.DRA]
        assert len(traces) == GRID_STEPS * GRID_STEPS
        for tr in traces:
            assert tr.termination.exact
            assert tr.termination.reason is d.Reason.EXACT_FIXED_POINT
            assert tr.iterations < 100_000
            assert set_a.distance(tr.final_point) <= 1e-9
            assert set_b.distance(tr.final_point) <= 1e-9


def test_criterion_2_one_step_instance(reference_sets):
    set_a, set_b = reference_sets
    with criterion(2, "one application reaches (3/13, 15/13), next certifies"):
        expected = np.array([float(Fraction(3, 13)), float(Fraction(15, 13))])
        tr = d.run(set_a, set_b, d.MethodKind.DRA, [0.0, 0.0],
                   d.ExactFixedPoint(1e-14))
        assert tr.iterations == 2
        assert tr.termination.exact
        assert np.linalg.norm(tr.z[1] - expected) <= 1e-12
        assert np.linalg.norm(tr.z[2] - tr.z[1]) <= 1e-14 * (
            1 + np.linalg.norm(tr.z[1])
        )
        assert np.linalg.norm(tr.final_point - expected) <= 1e-12


def test_criterion_3_spingarn_equivalence():
    with criterion(3, "Spingarn pairs track the DR governing sequence"):
        rng = np.random.default_rng(1003)
        worst = 0.0
        for _ in range(50):
            set_a, set_b = random_linear_instance(rng)
            a0 = sample_point(set_a, rng)
            w = rng.normal(size=set_a.dim) * 3
            b0 = w - set_a.project(w)
            z0 = a0 - b0
            tr_d = d.run(set_a, set_b, d.MethodKind.DRA, z0, d.MaxIter(100))
            tr_s = d.run(set_a, set_b, d.MethodKind.SPINGARN, z0, d.MaxIter(100))
            scale = 1.0 + np.linalg.norm(z0)
            gap = max(
                np.linalg.norm(zd - zs) / scale
                for zd, zs in zip(tr_d.z, tr_s.z)
            )
            worst = max(worst, gap)
        assert worst <= 1e-9


def test_criterion_4_epigraph_finite_convergence():
    with criterion(4, "epigraph runs end exactly on the axis with f <= 0"):
        rng = np.random.default_rng(1004)
        for f in (d.quadratic(1.0, 0.0, -1.0), d.absshift(1.0, -1.0)):
            for _ in range(100):
                z0 = rng.uniform(-10, 10, 2)
                tr = d.run_epi(f, z0)
                assert tr.termination.exact
                x, rho = tr.final_point
                assert rho == 0.0
                assert f(x) <= 1e-10


def test_criterion_5_projection_cubic():
    with criterion(5, "witness projections solve the cubic inside (1, 1+eps]"):
        f = d.quadratic(1.0, 0.0, -1.0)
        for eps in (0.1, 0.01):
            # at the witness (1+eps, -eps) the DR step projects the
            # x-axis reflection (1+eps, +eps) onto the epigraph
            p, fp = d.project_epigraph(f, (1.0 + eps, eps))
            assert abs(2 * p**3 - (1 + 2 * eps) * p - (1 + eps)) <= 1e-10
            assert 1.0 < p <= 1.0 + eps
            z_next, _ = d.dr_step_epi(f, (1.0 + eps, -eps))
            assert z_next.x == p
            assert z_next.rho == -eps + fp


def test_criterion_6_luque_failure_witnesses():
    with criterion(6, "step residuals vanish while images stay off the fix set"):
        eps_values = (0.1, 0.01, 0.001)
        for family in (d.WitnessFamily.ABS_SHIFT, d.WitnessFamily.QUADRATIC):
            steps, fixes = [], []
            for eps in eps_values:
                step, fix = d.luque_witness(family, eps)
                steps.append(step)
                fixes.append(fix)
            assert steps[0] > steps[1] > steps[2] > 0
            assert all(fix > 0 for fix in fixes)
        for eps in eps_values:
            step, _ = d.luque_witness(d.WitnessFamily.ABS_SHIFT, eps)
            assert abs(step - eps) <= 1e-12


def test_criterion_7_property_suites(reference_sets):
    set_a, set_b = reference_sets
    zoo = descriptor_zoo()
    rng = np.random.default_rng(1007)

    with criterion(7, "property suites at >= 1000 randomized cases each"):
        # projector idempotence: 1000 points per descriptor
        for _, s in zoo:
            for _ in range(1000):
                x = rng.uniform(-8, 8, s.dim)
                p = s.project(x)
                assert np.linalg.norm(s.project(p) - p) <= 1e-12 * (
                    1 + np.linalg.norm(x)
                )

        # firm nonexpansiveness: 100 pairs per descriptor (1400 cases)
        for _, s in zoo:
            for _ in range(100):
                x = rng.uniform(-8, 8, s.dim)
                y = rng.uniform(-8, 8, s.dim)
                px, py = s.project(x), s.project(y)
                assert float((px - py) @ (px - py)) <= float(
                    (px - py) @ (x - y)
                ) + 1e-10

        # variational inequality: 100 (x, c) pairs per descriptor (1400)
        for _, s in zoo:
            for _ in range(10):
                x = rng.uniform(-8, 8, s.dim)
                px = s.project(x)
                for _ in range(10):
                    c = sample_point(s, rng)
                    assert float((x - px) @ (c - px)) <= 1e-10

        # step inner-product identity, cross-step monotonicity, and the
        # shadow recursions, on DR traces over random linear instances
        identity_cases = 0
        while identity_cases < 1000:
            lin_a, lin_b = random_linear_instance(rng)
            z0 = rng.normal(size=lin_a.dim) * 10
            a_pt = sample_point(lin_a, rng)
            tr = d.run(lin_a, lin_b, d.MethodKind.DRA, z0, d.MaxIter(60))
            scale = 1 + float(np.linalg.norm(z0)) ** 2
            m = len(tr.z) - 1
            for n in range(m):
                lhs = float((tr.z[n] - tr.z[n + 1]) @ (tr.z[n + 1] - a_pt))
                rhs = float((tr.r[n] - tr.pbr[n]) @ (tr.pbr[n] - a_pt))
                assert abs(lhs - rhs) <= 1e-9 * scale
                assert np.linalg.norm(
                    tr.a[n + 1] - lin_a.project(tr.pbr[n])
                ) <= 1e-12 * scale
                assert np.linalg.norm(
                    (tr.a[n] - tr.a[n + 1]) - lin_a.project(tr.r[n] - tr.pbr[n])
                ) <= 1e-12 * scale
            diffs = [tr.z[n] - tr.z[n + 1] for n in range(m)]
            for n in range(min(m, 25)):
                for k in range(min(m, 25)):
                    val = float(
                        (tr.z[n + 1] - tr.z[k + 1]) @ (diffs[n] - diffs[k])
                    )
                    assert val >= -1e-9 * scale
            identity_cases += m

        # Fejer monotonicity toward (3/13, 15/13) on the reference instance
        target = np.array([3 / 13, 15 / 13])
        fejer_cases = 0
        while fejer_cases < 1000:
            z0 = rng.uniform(-100, 100, 2)
            tr = d.run(set_a, set_b, d.MethodKind.DRA, z0, d.ExactFixedPoint())
            dist = [np.linalg.norm(z - target) for z in tr.z]
            for before, after in zip(dist, dist[1:]):
                assert after <= before + 1e-10
            fejer_cases += len(dist) - 1

        # closed-form DR step against the generic two-set step
        axis = d.Hyperplane([0.0, 1.0], 0.0)
        for f in (d.quadratic(1.0, 0.0, -1.0), d.absshift(1.0, -1.0)):
            epi = d.Epigraph1D(f)
            for _ in range(1000):
                z = rng.uniform(-8, 8, 2)
                generic = d.dra_step(axis, epi, z)[0]
                closed, _ = d.dr_step_epi(f, (z[0], z[1]))
                assert np.linalg.norm(generic - np.asarray(closed)) <= 1e-10


def test_criterion_8_map_mrp_eps_feasibility(reference_sets, grid_runs):
    set_a, set_b = reference_sets
    with criterion(8, "MAP and MRP reach 1e-4 feasibility, never exactly"):
        for method in (d.MethodKind.MAP, d.MethodKind.MRP):
            for tr in grid_runs[method]:
                assert tr.termination.reason is d.Reason.FEASIBILITY
                assert not tr.termination.exact
                assert set_b.distance(tr.final_point) < 1e-4
                assert tr.iterations < 100_000
