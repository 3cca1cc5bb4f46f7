"""Measure construction, ball statistics, and regularity diagnostics."""

import math

import numpy as np
import pytest

import spectralab as sl
from spectralab.errors import (
    BudgetError,
    DegenerateSystemError,
    DimensionMismatchError,
    InvalidRatioError,
    LipschitzBoundError,
    ResolutionError,
    ScenarioError,
)
from spectralab.measures import Component, nearest_neighbor_spacing

LN2_LN3 = math.log(2) / math.log(3)


# -- IFS dimension -----------------------------------------------------------


def test_ifs_dimension_closed_forms():
    cantor = [sl.Similitude.scaling(1 / 3, [0.0]), sl.Similitude.scaling(1 / 3, [2 / 3])]
    assert sl.ifs_dimension(cantor) == pytest.approx(LN2_LN3, abs=1e-12)

    triple = [sl.Similitude.scaling(1 / 2, [float(j)]) for j in range(3)]
    assert sl.ifs_dimension(triple) == pytest.approx(math.log(3) / math.log(2), abs=1e-12)

    # x + x^2 = 1 with x = 2^-d gives d = log2((sqrt 5 + 1) / 2)
    mixed = [sl.Similitude.scaling(1 / 2, [0.0]), sl.Similitude.scaling(1 / 4, [1.0])]
    expected = math.log2((math.sqrt(5) + 1) / 2)
    assert sl.ifs_dimension(mixed) == pytest.approx(expected, abs=1e-12)


def test_ifs_dimension_residual_property():
    rng = np.random.default_rng(7)
    for _ in range(20):
        ratios = rng.uniform(0.2, 0.8, size=rng.integers(2, 5))
        maps = [sl.Similitude.scaling(h, [0.0]) for h in ratios]
        d = sl.ifs_dimension(maps)
        assert abs(np.sum(ratios**d) - 1.0) <= 1e-12


def test_ifs_dimension_errors():
    with pytest.raises(DegenerateSystemError):
        sl.ifs_dimension([sl.Similitude.scaling(0.5, [0.0])])
    with pytest.raises(InvalidRatioError):
        sl.Similitude.scaling(1.2, [0.0])


# -- self-similar measures ----------------------------------------------------


def test_cantor_depth_one_atoms_at_fixed_points():
    mu = sl.ifs_self_similar_measure(sl.cantor_system(), depth=1)
    assert mu.atom_count == 2
    assert np.allclose(np.sort(mu.positions.ravel()), [0.0, 1.0])
    assert np.allclose(mu.weights, 0.5)


def test_cantor_depth_eight():
    mu = sl.ifs_self_similar_measure(sl.cantor_system(), depth=8)
    assert mu.atom_count == 256
    assert np.allclose(mu.weights, 2.0**-8)
    assert mu.positions.min() >= 0.0 and mu.positions.max() <= 1.0
    assert mu.total_mass == pytest.approx(1.0, abs=1e-10)


def test_unequal_ratio_weights_are_products():
    maps = [sl.Similitude.scaling(1 / 2, [0.0]), sl.Similitude.scaling(1 / 4, [0.75])]
    system = sl.SimilitudeSystem.from_maps(maps)
    mu = sl.ifs_self_similar_measure(system, depth=2)
    x = 2.0 ** -system.similarity_dim
    # direct product enumeration over the four words
    expected = sorted([x * x, x * x**2, x**2 * x, x**2 * x**2])
    assert np.allclose(sorted(mu.weights), expected, rtol=1e-12)
    assert mu.weights.sum() == pytest.approx(1.0, abs=1e-10)
    assert x == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-10)


def test_atom_budget():
    with pytest.raises(BudgetError):
        sl.ifs_self_similar_measure(sl.cantor_system(), depth=10, atom_budget=512)


def test_weights_normalized_at_every_depth():
    maps = [sl.Similitude.scaling(0.3, [0.0]), sl.Similitude.scaling(0.45, [1.0])]
    system = sl.SimilitudeSystem.from_maps(maps)
    for depth in range(1, 7):
        mu = sl.ifs_self_similar_measure(system, depth)
        assert mu.weights.sum() == pytest.approx(1.0, abs=1e-10)


# -- surface measures ----------------------------------------------------------


def _flat_patch(cells):
    return sl.LipschitzPatch(
        param_dim=1,
        codim=1,
        box_lo=[0.0],
        box_hi=[1.0],
        resolution=(cells,),
        phi=lambda x: np.zeros((len(x), 1)),
        lipschitz_estimate=0.1,
    )


def test_flat_patch_mass():
    mu = sl.surface_measure(_flat_patch(100))
    assert mu.total_mass == pytest.approx(1.0, abs=1e-12)


def test_diagonal_graph_mass():
    patch = sl.LipschitzPatch(
        param_dim=1,
        codim=1,
        box_lo=[0.0],
        box_hi=[1.0],
        resolution=(200,),
        phi=lambda x: x.copy(),
        lipschitz_estimate=1.0,
    )
    mu = sl.surface_measure(patch)
    assert mu.total_mass == pytest.approx(math.sqrt(2.0), abs=1e-6)


def _circle_patches(cells):
    lim = 1 / math.sqrt(2)

    def upper(x):
        return np.sqrt(1 - x**2)

    def lower(x):
        return -np.sqrt(1 - x**2)

    patches = []
    for f in (upper, lower):
        patches.append(
            sl.LipschitzPatch(
                param_dim=1,
                codim=1,
                box_lo=[-lim],
                box_hi=[lim],
                resolution=(cells,),
                phi=lambda x, f=f: f(x),
                lipschitz_estimate=1.2,
            )
        )
    return patches


def test_circle_from_patches():
    # four graph patches cover the circle: two as y(x), two as x(y); by
    # symmetry the x(y) pair has the same mass as the y(x) pair.
    mass = 2 * sum(sl.surface_measure(p).total_mass for p in _circle_patches(400))
    assert mass == pytest.approx(2 * math.pi, abs=1e-3)


def test_circle_patch_refinement_order():
    # halving the cell size should at least halve the mass error
    quarter = 2 * math.pi / 4  # exact arc length of one patch pair member, times 2
    errs = []
    for cells in (100, 200, 400):
        mass = 2 * sum(sl.surface_measure(p).total_mass for p in _circle_patches(cells))
        errs.append(abs(mass - 2 * math.pi))
    assert errs[1] <= errs[0] / 2 * 1.05
    assert errs[2] <= errs[1] / 2 * 1.05


def test_lipschitz_violation_detected():
    patch = sl.LipschitzPatch(
        param_dim=1,
        codim=1,
        box_lo=[0.0],
        box_hi=[1.0],
        resolution=(50,),
        phi=lambda x: 3.0 * x,
        lipschitz_estimate=1.0,
    )
    with pytest.raises(LipschitzBoundError):
        sl.surface_measure(patch)


# -- scenario catalog ----------------------------------------------------------


def test_builtin_circle_mass():
    mu, v = sl.builtin_measure("circle", {"radius": 1.0, "atoms": 2000})
    assert mu.total_mass == pytest.approx(2 * math.pi, abs=1e-4)
    assert np.all(v.values == 1.0)


def test_builtin_two_circles():
    mu, _ = sl.builtin_measure("two_circles", {"r1": 1.0, "r2": 0.5, "gap": 1.0, "atoms": 3000})
    assert mu.total_mass == pytest.approx(3 * math.pi, abs=1e-3)
    assert len(mu.components) == 2


def test_builtin_half_signed_circle():
    mu, v = sl.builtin_measure("half_signed_circle", {"radius": 1.0, "atoms": 2000})
    signed = float(np.sum(mu.weights * v.values))
    plus = float(np.sum(mu.weights * v.positive_part))
    assert abs(signed) <= 1e-6
    assert plus == pytest.approx(math.pi, abs=1e-3)


def test_builtin_circle_plus_square_dims():
    mu, _ = sl.builtin_measure("circle_plus_square", {})
    dims = sorted(c.nominal_dim for c in mu.components)
    assert dims == [1.0, 2.0]
    assert mu.total_mass == pytest.approx(2 * math.pi + 1.0, abs=1e-3)


def test_builtin_unknown_and_missing():
    with pytest.raises(ScenarioError):
        sl.builtin_measure("nonagon", {})


def test_builtin_sphere_mass():
    mu, _ = sl.builtin_measure("sphere", {"atoms": 500})
    assert mu.ambient_dim == 3
    assert mu.total_mass == pytest.approx(4 * math.pi, rel=1e-12)


# -- unions ---------------------------------------------------------------------


def test_union_identity():
    mu, v = sl.builtin_measure("circle", {"atoms": 100})
    out, vout = sl.union_measure([(mu, v)])
    assert np.array_equal(out.positions, mu.positions)
    assert out.total_mass == mu.total_mass


def test_union_mass_additive():
    a, va = sl.builtin_measure("circle", {"atoms": 100})
    b, vb = sl.builtin_measure("segment", {"atoms": 50})
    out, _ = sl.union_measure([(a, va), (b, vb)])
    assert out.total_mass == pytest.approx(a.total_mass + b.total_mass, rel=1e-12)
    assert [c.nominal_dim for c in out.components] == [1.0, 1.0]


def test_union_dimension_mismatch():
    a, va = sl.builtin_measure("circle", {"atoms": 50})
    b, vb = sl.builtin_measure("sphere", {"atoms": 50})
    with pytest.raises(DimensionMismatchError):
        sl.union_measure([(a, va), (b, vb)])


# -- ball mass -------------------------------------------------------------------


def test_ball_mass_whole_measure():
    mu, _ = sl.builtin_measure("circle", {"atoms": 500})
    assert sl.ball_mass(mu, [0.0, 0.0], 10.0) == pytest.approx(mu.total_mass)


def test_ball_mass_single_atom():
    mu = sl.PointCloudMeasure.from_atoms(np.zeros((1, 2)), np.ones(1), 1.0)
    assert sl.ball_mass(mu, [0.0, 0.0], 0.1) == 1.0


def test_ball_mass_segment_oracle():
    mu, _ = sl.builtin_measure("segment", {"atoms": 2000})
    center = [0.5, 0.0]
    r = 0.05
    # independent brute-force oracle
    dist = np.abs(mu.positions[:, 0] - 0.5)
    expected = float(mu.weights[dist <= r].sum())
    got = sl.ball_mass(mu, center, r)
    assert got == pytest.approx(expected, abs=0.0)
    assert got == pytest.approx(0.1, abs=2e-3)


def test_ball_mass_monotone_in_radius():
    mu, _ = sl.builtin_measure("cantor_line", {"depth": 7})
    center = mu.positions[13]
    radii = np.geomspace(1e-3, 2.0, 25)
    masses = [sl.ball_mass(mu, center, r) for r in radii]
    assert np.all(np.diff(masses) >= 0)


# -- regularity diagnostics -------------------------------------------------------


def test_ahlfors_uniform_segment():
    mu, _ = sl.builtin_measure("segment", {"atoms": 2000})
    radii = np.geomspace(0.01, 0.2, 6)
    band = sl.ahlfors_constants(mu, s=1.0, radii=radii, sample_count=2000)
    assert band.c_lower >= 1.0 - 1e-9
    assert band.c_upper <= 2.2
    assert band.is_regular


def test_ahlfors_cantor_band():
    mu, _ = sl.builtin_measure("cantor_line", {"depth": 10})
    radii = [3.0**-j for j in range(2, 8)]
    band = sl.ahlfors_constants(mu, s=LN2_LN3, radii=radii, sample_count=64, seed=3)
    assert band.ratio <= 10.0
    assert band.is_regular


def test_ahlfors_wrong_exponent_flagged():
    mu, _ = sl.builtin_measure("segment", {"atoms": 2000})
    small = sl.ahlfors_constants(mu, s=0.5, radii=[0.01, 0.02], sample_count=100)
    large = sl.ahlfors_constants(mu, s=0.5, radii=[0.01, 0.4], sample_count=100)
    # r^1 / r^0.5 shrinks with r: the band ratio grows as radii spread
    assert large.ratio > small.ratio

    # at a fine enough resolution the spread crosses the regularity threshold
    fine, _ = sl.builtin_measure("segment", {"atoms": 20_000})
    wide = sl.ahlfors_constants(
        fine, s=0.5, radii=[2.5e-4, 0.45], sample_count=20_000
    )
    assert not wide.is_regular
    assert wide.ratio > 50.0


def test_ahlfors_resolution_floor():
    mu, _ = sl.builtin_measure("segment", {"atoms": 100})
    with pytest.raises(ResolutionError):
        sl.ahlfors_constants(mu, s=1.0, radii=[1e-5], sample_count=10)


def test_density_bounds_segment_interior_and_endpoint():
    mu, _ = sl.builtin_measure("segment", {"atoms": 2000})
    radii = np.geomspace(0.01, 0.09, 8)
    interior = sl.density_bounds(mu, 1.0, [0.5, 0.0], radii)
    assert interior.lower == pytest.approx(2.0, rel=0.05)
    assert interior.upper == pytest.approx(2.0, rel=0.05)
    endpoint = sl.density_bounds(mu, 1.0, [0.0, 0.0], radii)
    assert endpoint.lower == pytest.approx(1.0, rel=0.05)
    assert endpoint.upper == pytest.approx(1.0, rel=0.05)
    assert interior.mat_cond_ok and interior.preiss_ok


def test_density_bounds_cantor_oscillates_but_bounded():
    mu, _ = sl.builtin_measure("cantor_line", {"depth": 10})
    center = mu.positions[np.argmin(mu.positions[:, 0])]  # near the fixed point 0
    radii = [3.0**-j for j in range(2, 8)]
    est = sl.density_bounds(mu, LN2_LN3, center, radii)
    assert est.upper / est.lower <= 10.0


def test_density_bounds_interior_brackets_two():
    mu, _ = sl.builtin_measure("segment", {"atoms": 4000})
    radii = np.geomspace(0.005, 0.09, 10)
    est = sl.density_bounds(mu, 1.0, [0.47, 0.0], radii)
    assert est.lower <= 2.0 <= est.upper or abs(est.lower - 2.0) / 2.0 < 0.05


# -- type invariants ---------------------------------------------------------------


def test_component_partition_enforced():
    with pytest.raises(ValueError):
        sl.PointCloudMeasure(
            positions=np.zeros((3, 2)),
            weights=np.ones(3),
            components=(Component(0, 2, 1.0),),
            total_mass=3.0,
        )


def test_total_mass_consistency_enforced():
    with pytest.raises(ValueError):
        sl.PointCloudMeasure(
            positions=np.zeros((2, 2)),
            weights=np.ones(2),
            components=(Component(0, 2, 1.0),),
            total_mass=3.0,
        )


def test_measure_immutable():
    mu, _ = sl.builtin_measure("circle", {"atoms": 10})
    with pytest.raises(ValueError):
        mu.positions[0, 0] = 99.0


# -- serialization ------------------------------------------------------------------


def test_measure_text_round_trip(tmp_path):
    mu, v = sl.builtin_measure("circle_plus_square", {"atoms": 64, "cells": 5})
    path = tmp_path / "m.txt"
    sl.save_measure_text(mu, path, v)
    back, vback = sl.load_measure_text(path)
    assert np.array_equal(back.positions, mu.positions)
    assert np.array_equal(back.weights, mu.weights)
    assert np.array_equal(vback.values, v.values)
    assert [c.nominal_dim for c in back.components] == [
        c.nominal_dim for c in mu.components
    ]


def test_nn_spacing_circle():
    mu, _ = sl.builtin_measure("circle", {"atoms": 1000})
    expected = 2 * math.sin(math.pi / 1000)  # chord between adjacent atoms
    assert nearest_neighbor_spacing(mu) == pytest.approx(expected, rel=1e-9)
