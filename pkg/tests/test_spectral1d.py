import numpy as np
import pytest
from numpy.testing import assert_allclose

from ltlab import potentials, spectral1d


def test_poschl_teller_2_bound_states(pt2):
    # nu = 2 well binds exactly two states at -4 and -1
    box = spectral1d.default_box(pt2)
    spec = spectral1d.refined_negative_spectrum(pt2, box, 800)
    assert spec.count == 2
    assert_allclose(spec.energies, [4.0, 1.0], atol=1e-5)


def test_square_well_transcendental_oracle():
    # roots of q tan(qa) = sqrt(V0 - q^2) and q cot(qa) = -sqrt(V0 - q^2)
    # for V0 = 3, a = 1.5, solved independently by bisection to 1e-14
    oracle = np.array([2.438925967752, 0.926401891943])
    well = potentials.build_family("square-well", depth=3.0, half_width=1.5)
    box = spectral1d.default_box(well)
    spec = spectral1d.refined_negative_spectrum(well, box, 1200)
    assert spec.count == 2
    # jump edges limit the scheme order, so the tolerance is looser here
    assert_allclose(spec.energies, oracle, atol=5e-3)


def test_richardson_pair_formula():
    def mk(energies, m):
        return spectral1d.NegativeSpectrum(
            energies=np.asarray(energies, dtype=float),
            box_radius=10.0,
            num_interior=m,
            grid_step=20.0 / (m + 1),
        )

    coarse = mk([4.03, 1.02], 400)
    fine = mk([4.01, 1.01, 0.2], 801)
    out = spectral1d.richardson_pair(coarse, fine)
    assert_allclose(out.energies[:2], [4.01 - 0.02 / 3.0, 1.01 - 0.01 / 3.0])
    assert_allclose(out.energies[2], 0.2)
    assert out.count_mismatch == 1
    assert out.extrapolated
    assert_allclose(out.error_estimates, [0.02 / 3.0, 0.01 / 3.0, 0.2])
    # levels extrapolating below the threshold are dropped
    trimmed = spectral1d.richardson_pair(mk([1.0], 400), mk([1.0, 5e-9], 801))
    assert trimmed.count == 1


def test_negative_spectrum_validation_and_moments():
    with pytest.raises(ValueError, match="descending"):
        spectral1d.NegativeSpectrum(
            energies=np.array([1.0, 2.0]),
            box_radius=5.0,
            num_interior=100,
            grid_step=0.1,
        )
    spec = spectral1d.NegativeSpectrum(
        energies=np.array([4.0, 1.0]),
        box_radius=5.0,
        num_interior=100,
        grid_step=0.1,
        error_estimates=np.array([1e-3, 1e-4]),
    )
    assert spec.riesz_mean(0.0) == 2.0
    assert_allclose(spec.riesz_mean(1.5), 8.0 + 1.0)
    assert_allclose(spec.riesz_mean_error(1.0), 1.1e-3)
    with pytest.raises(ValueError):
        spec.riesz_mean(-0.5)


def test_direct_sum_spectrum_is_union(pt1, pt2):
    # block-diagonal potential: the discrete operator is permutation-similar
    # to the two scalar problems, so levels agree to solver precision; the
    # 2x2 case also exercises the sparse shift-invert path (size > 4096)
    box = 26.0
    m = 2049
    both = potentials.direct_sum(pt1, pt2)
    op = spectral1d.discretize(both, box, m)
    assert op.size > spectral1d.DENSE_SIZE_CAP
    joint = spectral1d.negative_spectrum(op)
    single = [
        spectral1d.negative_spectrum(spectral1d.discretize(p, box, m))
        for p in (pt1, pt2)
    ]
    union = np.sort(np.concatenate([s.energies for s in single]))[::-1]
    assert joint.count == 3
    assert_allclose(joint.energies, union, atol=1e-9)


def test_dense_and_tridiagonal_paths_agree(pt1):
    op = spectral1d.discretize(pt1, 20.0, 300)
    d, e = op.tridiagonal_bands()
    dense = np.linalg.eigvalsh(op.to_dense().real)
    from scipy.linalg import eigh_tridiagonal

    tri = eigh_tridiagonal(d, e)[0]
    assert_allclose(dense, tri, atol=1e-10)
    sparse = op.to_sparse().toarray()
    assert_allclose(sparse, op.to_dense(), atol=1e-14)


def test_spectrum_shift_sits_below_ground_level(pt2):
    op = spectral1d.discretize(pt2, 20.0, 400)
    assert op.spectrum_shift() < -4.0
    # deep narrow well: pointwise floor is far below the ground state but the
    # half-moment bound keeps the shift near the physical scale
    narrow = potentials.build_family("rank-one-narrow", integral=2.0, width=1e-2)
    opn = spectral1d.discretize(narrow, 9.0, 1024)
    shift = opn.spectrum_shift()
    assert shift < -1.0
    assert shift > -10.0


def test_discretize_rejects_support_outside_box(pt1):
    with pytest.raises(ValueError, match="inside the box"):
        spectral1d.discretize(pt1, 0.5 * pt1.support_radius, 200)


def test_operator_validation():
    with pytest.raises(ValueError, match="interior points"):
        spectral1d.DiscretizedOperator1D(
            box_radius=5.0, num_interior=8, potential_blocks=np.zeros((8, 1, 1))
        )
    with pytest.raises(ValueError, match="shape"):
        spectral1d.DiscretizedOperator1D(
            box_radius=5.0, num_interior=20, potential_blocks=np.zeros((19, 1, 1))
        )


def test_default_box_scales_with_binding_energy(pt1):
    box = spectral1d.default_box(pt1)
    # shallowest level of the nu = 1 well sits at -1, so the margin is ~8
    assert box == pytest.approx(pt1.support_radius + 8.0, rel=1e-3)
    spec = spectral1d.negative_spectrum(spectral1d.discretize(pt1, box, 900))
    assert spec.count == 1
