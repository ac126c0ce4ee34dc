import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ltlab import potentials


def test_simpson_weights_exact_for_cubic():
    h = 0.01
    w = potentials.simpson_weights(101, h)
    x = h * np.arange(101)
    assert_allclose(w @ x**3, 0.25, rtol=1e-13)


def test_simpson_weights_even_count_falls_back_to_trapezoid():
    w = potentials.simpson_weights(4, 0.5)
    assert_allclose(w, [0.25, 0.5, 0.5, 0.25])
    # trapezoid is still exact on linear integrands
    x = 0.5 * np.arange(4)
    assert_allclose(w @ x, 1.5**2 / 2.0, rtol=1e-14)


def test_poschl_teller_moment_integrals(pt1):
    # closed forms: int sech^2 = 2, int sech^4 = 4/3, int sech^6 = 16/15
    assert_allclose(potentials.signed_trace_power_integral(pt1, 1), -4.0, atol=1e-10)
    assert_allclose(potentials.signed_trace_power_integral(pt1, 2), 16.0 / 3.0, rtol=1e-10)
    assert_allclose(potentials.signed_trace_power_integral(pt1, 3), -128.0 / 15.0, rtol=1e-10)


def test_poschl_teller_derivative_square(pt1):
    # V = -2 sech^2 x gives int (V')^2 = 16 (4/3 - 16/15) = 64/15
    assert_allclose(potentials.derivative_square_integral(pt1), 64.0 / 15.0, rtol=1e-10)


def test_gaussian_derivative_square_closed_form():
    depth, width = 3.0, 1.4
    pot = potentials.build_family("gaussian", depth=depth, width=width)
    expected = depth**2 * math.sqrt(math.pi / 2.0) / width
    assert_allclose(potentials.derivative_square_integral(pot), expected, rtol=1e-9)


def test_gaussian_fractional_moment():
    depth, width = 2.0, 0.9
    pot = potentials.build_family("gaussian", depth=depth, width=width)
    got = potentials.trace_power_integral(pot, "minus", 1.5)
    expected = depth**1.5 * width * math.sqrt(math.pi / 1.5)
    assert_allclose(got, expected, rtol=1e-9)
    assert potentials.trace_power_integral(pot, "plus", 1.5) == 0.0


def test_trace_power_integral_rejects_small_power(pt1):
    with pytest.raises(ValueError):
        potentials.trace_power_integral(pt1, "minus", 0.25)
    with pytest.raises(ValueError):
        potentials.part_eigenvalues(pt1, "negative")


def test_split_parts_reconstruct_and_annihilate(random_2x2):
    split = potentials.split_parts(random_2x2)
    vp = split.positive_part.values
    vm = split.negative_part.values
    assert_allclose(vp - vm, random_2x2.values, atol=1e-12)
    assert np.linalg.eigvalsh(vp).min() >= -1e-12
    assert np.linalg.eigvalsh(vm).min() >= -1e-12
    # spectral parts commute and multiply to zero pointwise
    prod = np.einsum("xij,xjk->xik", vp, vm)
    assert np.abs(prod).max() < 1e-12


def test_square_well_profile():
    pot = potentials.build_family("square-well", depth=3.0, half_width=1.5)
    vals = pot.sample_at(np.array([0.0, 1.0, 1.5, 2.0]))[:, 0, 0].real
    assert_allclose(vals, [-3.0, -3.0, -1.5, 0.0])


def test_rank_one_narrow_projector_structure():
    pot = potentials.build_family("rank-one-narrow", integral=2.0, width=0.1)
    v0 = pot.sample_at(np.array([0.05]))[0]
    mu = np.linalg.eigvalsh(v0)
    assert_allclose(mu[0], -20.0, rtol=1e-12)
    assert_allclose(mu[1], 0.0, atol=1e-12)
    assert_allclose(potentials.trace_power_integral(pot, "minus", 1.0), 2.0, rtol=1e-12)


def test_random_smooth_is_seeded_and_hermitian():
    a = potentials.build_family("random-smooth", matrix_dim=2, seed=7)
    b = potentials.build_family("random-smooth", matrix_dim=2, seed=7)
    c = potentials.build_family("random-smooth", matrix_dim=2, seed=8)
    assert_allclose(a.values, b.values)
    assert np.abs(a.values - c.values).max() > 1e-3
    herm = np.abs(a.values - np.conj(np.swapaxes(a.values, 1, 2))).max()
    assert herm < 1e-12


def test_scale_and_negate(pt1):
    doubled = potentials.scale(pt1, 2.0)
    assert_allclose(doubled.values, 2.0 * pt1.values)
    assert_allclose(doubled.sample_at(np.array([0.3])), 2.0 * pt1.sample_at(np.array([0.3])))
    flipped = potentials.negate(pt1)
    assert_allclose(flipped.values, -pt1.values)


def test_direct_sum_blocks(pt1):
    well = potentials.build_family("gaussian", depth=1.0, width=1.0)
    both = potentials.direct_sum(pt1, well)
    assert both.matrix_dim == 2
    x = np.array([0.0, 0.5])
    samp = both.sample_at(x)
    assert_allclose(samp[:, 0, 0], pt1.sample_at(x)[:, 0, 0])
    assert_allclose(samp[:, 1, 1], well.sample_at(x)[:, 0, 0])
    assert np.abs(samp[:, 0, 1]).max() == 0.0


def test_serialization_round_trip():
    pot = potentials.build_family("gaussian", depth=2.5, width=1.1)
    clone = potentials.from_json(potentials.to_json(pot))
    assert_allclose(clone.values, pot.values)
    assert clone.family_tag == pot.family_tag
    # sampled payloads survive without the analytic evaluator
    full = potentials.from_json(potentials.to_json(pot, include_samples=True))
    assert_allclose(full.values, pot.values)


def test_derivative_fallback_matches_analytic():
    pot = potentials.build_family("gaussian", depth=2.0, width=1.0)
    rec = potentials.to_record(pot, include_samples=True)
    del rec["derivative_samples"]
    sampled = potentials.from_record(rec)
    fd = sampled.derivative_samples()
    assert_allclose(fd, pot.analytic_derivative, atol=1e-6)


def test_unknown_family_raises():
    with pytest.raises(ValueError, match="unknown family"):
        potentials.build_family("morse", depth=1.0)


def test_resolution_guard():
    with pytest.raises(ValueError, match="resolve"):
        potentials.build_family("gaussian", depth=1.0, width=1.0, grid_step=0.5)


def test_support_must_sit_inside_window():
    vals = np.zeros((5, 1, 1))
    with pytest.raises(ValueError, match="support"):
        potentials.SampledPotential(
            grid_start=0.0,
            grid_step=0.1,
            values=vals,
            support=(0.0, 2.0),
            family_tag="zero",
        )


def test_hermiticity_guard():
    vals = np.zeros((5, 2, 2), dtype=complex)
    vals[:, 0, 1] = 1.0j
    vals[:, 1, 0] = 1.0j
    with pytest.raises(ValueError, match="Hermitian"):
        potentials.SampledPotential(
            grid_start=-1.0,
            grid_step=0.5,
            values=vals,
            support=(-1.0, 1.0),
            family_tag="bad",
        )
