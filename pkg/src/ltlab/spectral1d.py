"""Dirichlet finite-difference spectra for -d^2/dx^2 + V on a symmetric box."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import eigh_tridiagonal

from .potentials import SampledPotential

DENSE_SIZE_CAP = 4096
ENERGY_EDGE_THRESHOLD = 1e-8
MIN_INTERIOR_POINTS = 16


@dataclass(frozen=True)
class DiscretizedOperator1D:
    """Second-order 3-point scheme with Dirichlet walls at x = +-box_radius.

    Interior nodes x_i = -box_radius + grid_step*(i+1), i = 0..num_interior-1,
    grid_step = 2*box_radius/(num_interior+1).  potential_blocks holds V(x_i).
    """

    box_radius: float
    num_interior: int
    potential_blocks: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.potential_blocks, dtype=complex)
        object.__setattr__(self, "potential_blocks", v)
        if v.ndim != 3 or v.shape[0] != self.num_interior or v.shape[1] != v.shape[2]:
            raise ValueError("potential_blocks must have shape (num_interior, n, n)")
        if self.num_interior < MIN_INTERIOR_POINTS:
            raise ValueError(f"need at least {MIN_INTERIOR_POINTS} interior points")

    @property
    def grid_step(self) -> float:
        return 2.0 * self.box_radius / (self.num_interior + 1)

    @property
    def matrix_dim(self) -> int:
        return self.potential_blocks.shape[1]

    @property
    def size(self) -> int:
        return self.num_interior * self.matrix_dim

    @property
    def interior_grid(self) -> np.ndarray:
        h = self.grid_step
        return -self.box_radius + h * (1 + np.arange(self.num_interior))

    def gershgorin_floor(self) -> float:
        """Lower bound on the spectrum: kinetic part is PSD."""
        mu = np.linalg.eigvalsh(self.potential_blocks)
        return float(min(mu.min(), 0.0))

    def spectrum_shift(self) -> float:
        """A point strictly below the lowest eigenvalue but near its scale.

        Uses the tighter of the pointwise floor and the square of the
        half-moment bound sum(sqrt(E_j)) <= (1/2) int tr V_minus, which keeps
        shift-invert well separated even for deep narrow wells whose
        pointwise depth is orders of magnitude below the ground level.
        """
        mu = np.linalg.eigvalsh(self.potential_blocks)
        floor = float(min(mu.min(), 0.0))
        mass = self.grid_step * float(np.maximum(-mu, 0.0).sum())
        moment_floor = -((0.5 * mass) ** 2)
        tight = max(floor, moment_floor)
        return 1.15 * tight - 0.05

    def to_dense(self) -> np.ndarray:
        m, n = self.num_interior, self.matrix_dim
        inv_h2 = 1.0 / self.grid_step**2
        a = np.zeros((m * n, m * n), dtype=complex)
        for i in range(m):
            a[i * n : (i + 1) * n, i * n : (i + 1) * n] = self.potential_blocks[i]
        diag = np.arange(m * n)
        a[diag, diag] += 2.0 * inv_h2
        off = np.arange((m - 1) * n)
        a[off, off + n] -= inv_h2
        a[off + n, off] -= inv_h2
        return a

    def to_sparse(self) -> sp.csc_matrix:
        m, n = self.num_interior, self.matrix_dim
        inv_h2 = 1.0 / self.grid_step**2
        shifted = self.potential_blocks + 2.0 * inv_h2 * np.eye(n)
        main = sp.block_diag(list(shifted), format="csc")
        ones = np.ones(m - 1)
        hop = sp.kron(sp.diags([ones, ones], [-1, 1]), -inv_h2 * sp.identity(n))
        return (main + hop).tocsc()

    def tridiagonal_bands(self) -> tuple[np.ndarray, np.ndarray]:
        if self.matrix_dim != 1:
            raise ValueError("tridiagonal form needs a scalar potential")
        inv_h2 = 1.0 / self.grid_step**2
        d = self.potential_blocks[:, 0, 0].real + 2.0 * inv_h2
        e = np.full(self.num_interior - 1, -inv_h2)
        return d, e


@dataclass(frozen=True)
class NegativeSpectrum:
    """Magnitudes E_j > 0 of the negative eigenvalues, sorted descending."""

    energies: np.ndarray
    box_radius: float
    num_interior: int
    grid_step: float
    threshold: float = ENERGY_EDGE_THRESHOLD
    dimension: int = 1
    extrapolated: bool = False
    error_estimates: np.ndarray | None = None
    count_mismatch: int = 0

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        object.__setattr__(self, "energies", e)
        if e.size and (np.diff(e) > 1e-12).any():
            raise ValueError("energies must be sorted descending")
        if self.error_estimates is not None:
            object.__setattr__(
                self, "error_estimates", np.asarray(self.error_estimates, dtype=float)
            )

    @property
    def count(self) -> int:
        return self.energies.size

    def riesz_mean(self, gamma: float) -> float:
        if gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.energies.size == 0:
            return 0.0
        if gamma == 0:
            return float(self.energies.size)
        return float((self.energies**gamma).sum())

    def riesz_mean_error(self, gamma: float) -> float:
        """First-order propagation of the per-level error estimates."""
        if self.error_estimates is None or self.energies.size == 0:
            return 0.0
        if gamma == 0:
            return 0.0
        return float(
            gamma * (self.energies ** max(gamma - 1.0, 0.0) * self.error_estimates).sum()
        )

    def to_record(self) -> dict:
        return {
            "energies": self.energies.tolist(),
            "box_radius": self.box_radius,
            "num_interior": self.num_interior,
            "grid_step": self.grid_step,
            "threshold": self.threshold,
            "dimension": self.dimension,
            "extrapolated": self.extrapolated,
            "error_estimates": (
                None
                if self.error_estimates is None
                else self.error_estimates.tolist()
            ),
            "count_mismatch": self.count_mismatch,
        }


def discretize(
    potential: SampledPotential, box_radius: float, num_interior: int
) -> DiscretizedOperator1D:
    a, b = potential.support
    if a <= -box_radius or b >= box_radius:
        raise ValueError("support must lie strictly inside the box")
    h = 2.0 * box_radius / (num_interior + 1)
    x = -box_radius + h * (1 + np.arange(num_interior))
    blocks = potential.sample_at(x)
    blocks = 0.5 * (blocks + np.conj(np.swapaxes(blocks, 1, 2)))
    return DiscretizedOperator1D(
        box_radius=box_radius, num_interior=num_interior, potential_blocks=blocks
    )


def _negative_eigenvalues(op: DiscretizedOperator1D, threshold: float) -> np.ndarray:
    floor = op.gershgorin_floor()
    if op.matrix_dim == 1:
        d, e = op.tridiagonal_bands()
        vals = eigh_tridiagonal(
            d, e, select="v", select_range=(floor - 1.0, -threshold)
        )[0]
        return vals
    if op.size <= DENSE_SIZE_CAP:
        vals = np.linalg.eigvalsh(op.to_dense())
        return vals[vals <= -threshold]
    mat = op.to_sparse()
    shift = op.spectrum_shift()
    v0 = np.full(op.size, 1.0 / math.sqrt(op.size))
    k = 16
    while True:
        k_eff = min(k, op.size - 2)
        vals = spla.eigsh(
            mat,
            k=k_eff,
            sigma=shift,
            which="LM",
            v0=v0,
            return_eigenvectors=False,
        )
        vals = np.sort(vals)
        if vals.max() > -threshold or k_eff == op.size - 2:
            break
        k *= 2
    return vals[vals <= -threshold]


def negative_spectrum(
    op: DiscretizedOperator1D, threshold: float = ENERGY_EDGE_THRESHOLD
) -> NegativeSpectrum:
    vals = _negative_eigenvalues(op, threshold)
    energies = np.sort(-vals)[::-1]
    return NegativeSpectrum(
        energies=energies,
        box_radius=op.box_radius,
        num_interior=op.num_interior,
        grid_step=op.grid_step,
        threshold=threshold,
    )


def richardson_pair(
    coarse: NegativeSpectrum, fine: NegativeSpectrum
) -> NegativeSpectrum:
    """Extrapolate two spectra whose grid steps differ by exactly a factor 2.

    The second-order scheme extrapolates as E + (E_fine - E_coarse)/3.
    Levels are paired in descending order; fine-grid levels without a coarse
    partner are kept as-is with their own magnitude as the error bar.
    """
    threshold = fine.threshold
    paired = min(coarse.count, fine.count)
    e_c = coarse.energies[:paired]
    e_f = fine.energies[:paired]
    extrap = e_f + (e_f - e_c) / 3.0
    err = np.abs(e_f - e_c) / 3.0
    extra = fine.energies[paired:]
    energies = np.concatenate([extrap, extra])
    errors = np.concatenate([err, extra.copy()])
    keep = energies >= threshold
    energies, errors = energies[keep], errors[keep]
    order = np.argsort(energies)[::-1]
    return NegativeSpectrum(
        energies=energies[order],
        box_radius=fine.box_radius,
        num_interior=fine.num_interior,
        grid_step=fine.grid_step,
        threshold=threshold,
        dimension=fine.dimension,
        extrapolated=True,
        error_estimates=errors[order],
        count_mismatch=fine.count - coarse.count,
    )


def refined_negative_spectrum(
    potential: SampledPotential,
    box_radius: float,
    num_interior: int,
    threshold: float = ENERGY_EDGE_THRESHOLD,
) -> NegativeSpectrum:
    """Richardson pairing of the num_interior and 2*num_interior+1 grids.

    Doubling the interior count this way exactly halves the grid step.
    """
    coarse = negative_spectrum(
        discretize(potential, box_radius, num_interior), threshold
    )
    fine = negative_spectrum(
        discretize(potential, box_radius, 2 * num_interior + 1), threshold
    )
    return richardson_pair(coarse, fine)


def default_box(
    potential: SampledPotential,
    energy_floor: float = 0.04,
    coarse_interior: int = 600,
    margin: float = 8.0,
) -> float:
    """Box radius so the shallowest bound state decays by exp(-margin) inside.

    A coarse pre-solve locates the smallest binding energy; energy_floor caps
    the box growth when states sit arbitrarily close to the edge.
    """
    radius = potential.support_radius
    probe = radius + margin / math.sqrt(energy_floor)
    spec = negative_spectrum(
        discretize(potential, probe, coarse_interior), threshold=energy_floor / 10.0
    )
    if spec.count == 0:
        return probe
    e_min = max(float(spec.energies.min()), energy_floor)
    return radius + margin / math.sqrt(e_min)
