import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ltlab import bounds, potentials


def test_classical_constant_closed_forms():
    assert_allclose(bounds.classical_constant(0.5, 1), 0.25, rtol=1e-15)
    assert_allclose(bounds.classical_constant(1.5, 1), 3.0 / 16.0, rtol=1e-15)
    assert_allclose(bounds.classical_constant(2.5, 1), 5.0 / 32.0, rtol=1e-15)
    assert_allclose(bounds.classical_constant(1.0, 1), 2.0 / (3.0 * math.pi), rtol=1e-14)
    assert_allclose(bounds.classical_constant(0.0, 1), 1.0 / math.pi, rtol=1e-14)
    assert_allclose(bounds.classical_constant(1.5, 2), 1.0 / (10.0 * math.pi), rtol=1e-14)
    assert_allclose(bounds.classical_constant(1.0, 3), 1.0 / (15.0 * math.pi**2), rtol=1e-14)
    with pytest.raises(ValueError):
        bounds.classical_constant(-0.1, 1)
    with pytest.raises(ValueError):
        bounds.classical_constant(1.0, 0)


def test_constant_factor_table():
    assert bounds.constant_factor(1.5, 1) == 1.0
    assert bounds.constant_factor(2.0, 3) == 1.0
    assert bounds.constant_factor(1.0, 1) == 2.0
    assert bounds.constant_factor(1.25, 5) == 2.0
    assert bounds.constant_factor(0.5, 1) == 2.0
    assert bounds.constant_factor(0.75, 1) == 2.0
    assert bounds.constant_factor(0.5, 2) == 4.0
    assert bounds.constant_factor(0.75, 3) == 4.0
    with pytest.raises(ValueError):
        bounds.constant_factor(0.3, 1)
    with pytest.raises(ValueError):
        bounds.constant_factor(0.4, 2)


def test_classical_constant_audit_passes():
    reports = bounds.classical_constant_audit()
    assert len(reports) == 4
    assert all(r.passed for r in reports)
    printed = reports[-1]
    assert printed.rhs == 0.013509
    assert printed.residual < 5e-7


def test_product_identity():
    for gamma in (0.5, 1.0, 1.7, 2.5):
        for d in (2, 3, 5, 8):
            rep = bounds.product_identity_check(gamma, d)
            assert rep.passed
            assert rep.residual < 1e-13
    with pytest.raises(ValueError):
        bounds.product_identity_check(0.25, 3)
    worst = bounds.product_identity_audit()
    assert worst.passed


def test_constant_ordering():
    ordering, convexity = bounds.constant_ordering_audit()
    assert ordering.passed
    assert ordering.lhs < 1.0
    assert convexity.passed


def test_lifting_identity_quadrature():
    # gamma = 1 has normalizer 1/B(1/2, 3/2) = 2/pi and the u-integral is pi/4
    rep = bounds.lifting_identity_check(1.0, -2.0)
    assert rep.passed
    assert_allclose(rep.lhs, 2.0, rtol=1e-10)
    vac = bounds.lifting_identity_check(0.8, 1.5)
    assert vac.passed and vac.provenance["vacuous"]
    with pytest.raises(ValueError):
        bounds.lifting_identity_check(0.5, -1.0)
    sweep = bounds.lifting_identity_sweep()
    assert len(sweep) == 20
    assert all(r.passed for r in sweep)


def test_sharp_half_poschl_teller(pt1, pt1_spectrum):
    # single level at -1 against half of int 2 sech^2 * 2 = 2
    rep = bounds.sharp_half_audit(pt1, pt1_spectrum)
    assert rep.passed
    assert_allclose(rep.lhs, 1.0, atol=1e-6)
    assert_allclose(rep.rhs, 2.0, rtol=1e-9)
    assert_allclose(rep.ratio, 0.5, atol=1e-6)


def test_sharp_half_rejects_indefinite_potential(random_2x2, pt1_spectrum):
    with pytest.raises(ValueError, match="positive part"):
        bounds.sharp_half_audit(random_2x2, pt1_spectrum)


def test_lifted_moment_saturates_for_poschl_teller(pt2, pt2_spectrum):
    # 8 + 1 against (3/16) * 36 * (4/3) = 9: the bound is exact here
    rep = bounds.lifted_moment_audit(pt2, pt2_spectrum, 1.5)
    assert rep.passed
    assert_allclose(rep.lhs, 9.0, atol=1e-5)
    assert_allclose(rep.rhs, 9.0, rtol=1e-9)
    with pytest.raises(ValueError):
        bounds.lifted_moment_audit(pt2, pt2_spectrum, 0.25)


def test_half_moment_sandwich_equality_case(pt2, pt2_spectrum):
    lower, upper = bounds.half_moment_sandwich(pt2, pt2_spectrum)
    assert lower.passed and upper.passed
    # sum sqrt(E) = 3 meets the lower estimate (1/4) * 12 exactly
    assert_allclose(lower.lhs, 3.0, atol=1e-5)
    assert_allclose(lower.rhs, 3.0, rtol=1e-9)
    assert_allclose(upper.rhs, 6.0, rtol=1e-9)


def test_sharpness_sweep_small():
    reports, rows = bounds.sharpness_sweep(widths=(1e-1, 2e-2))
    assert all(r.passed for r in reports)
    ratios = rows["ratio"]
    assert ratios[1] > ratios[0]
    assert ratios[1] <= 1.0 + 1e-3
    assert all(n == 1 for n in rows["levels"])


def test_sharpness_sweep_rejects_misaligned_grid():
    with pytest.raises(ValueError, match="integer multiple"):
        bounds.sharpness_sweep(widths=(0.3,))


def test_coupling_sweep_validation(pt1):
    with pytest.raises(ValueError, match="at least 6"):
        bounds.coupling_sweep(pt1, couplings=(1.0, 2.0))
    with pytest.raises(ValueError, match="positive"):
        bounds.coupling_sweep(pt1, couplings=(1.0, 2.0, 3.0, 4.0, 5.0, -6.0))
    lifted = potentials.negate(pt1)
    with pytest.raises(ValueError, match="positive part"):
        bounds.coupling_sweep(lifted, couplings=tuple(np.geomspace(1, 10, 6)))


@pytest.fixture(scope="module")
def gaussian_sweep():
    g = potentials.build_family("gaussian", depth=1.0, width=2.0)
    return g, bounds.coupling_sweep(g, couplings=np.geomspace(1.0, 100.0, 7))


def test_remainder_sweep(gaussian_sweep):
    g, sweep = gaussian_sweep
    reports, rows = bounds.remainder_sweep(g, sweep=sweep)
    tags = [r.audit_tag for r in reports]
    assert tags == ["remainder-nonnegative", "remainder-cap", "remainder-slope"]
    assert all(r.passed for r in reports)
    assert min(rows["remainder"]) > -1e-9
    assert all(r <= c for r, c in zip(rows["remainder"], rows["cap"]))


def test_weyl_ratio_sweep(gaussian_sweep):
    g, sweep = gaussian_sweep
    reports, rows = bounds.weyl_ratio_sweep(g, gamma=1.5, sweep=sweep)
    assert [r.audit_tag for r in reports] == ["weyl-ratio-cap", "weyl-ratio-limit"]
    assert all(r.passed for r in reports)
    # strong coupling pushes the ratio onto the phase-space value
    assert abs(rows["ratio"][-1] - 1.0) < 0.02
    low_gamma, _ = bounds.weyl_ratio_sweep(g, gamma=1.0, sweep=sweep)
    assert len(low_gamma) == 1
    assert low_gamma[0].passed


def test_holder_chain(pt1, pt1_scattering):
    reports = bounds.holder_chain_audit(pt1, pt1_scattering)
    assert [r.audit_tag for r in reports] == [
        "holder-chain-zeroth",
        "holder-chain-middle",
        "holder-chain-fourth",
    ]
    assert all(r.passed for r in reports)
