"""Seeded random field ensembles for property checks and experiments.

Fields are band-limited Gaussian samples with a smooth radial spectrum,
zero mean, dealiased, and (by default) unit L^2 norm. Every field is
reproducible from (seed, index), and the paired generators realise the
same function on two grids so resolution studies compare like with
like.
"""

from __future__ import annotations

import numpy as np

from .fields import (
    Grid,
    RealField,
    SpectralField,
    _dealias_mult,
    _k_sq,
    dealias,
    embed,
    to_spectral,
    velocity_from_vorticity,
)


def random_spectral_field(grid: Grid, rng, kmax: int | None = None,
                          decay: float = 8.0, normalize: bool = True) -> SpectralField:
    """One random band-limited field with spectrum exp(-(|k|/decay)^2)."""
    white = rng.standard_normal((grid.n, grid.n))
    coeffs = to_spectral(RealField(grid, white)).coeffs.copy()
    coeffs *= np.exp(-_k_sq(grid.n) / decay ** 2)
    coeffs *= _dealias_mult(grid.n)
    if kmax is not None:
        k1 = np.abs(np.fft.fftfreq(grid.n, d=1.0 / grid.n))
        keep = np.maximum(k1[:, None], k1[None, :]) <= kmax
        coeffs *= keep
    coeffs[0, 0] = 0.0
    if normalize:
        scale = np.sqrt(np.sum(np.abs(coeffs) ** 2))
        if scale > 0.0:
            coeffs /= scale
    return SpectralField._wrap(grid, np.ascontiguousarray(coeffs))


def field_ensemble(n: int, count: int, seed: int, kmax: int | None = None,
                   decay: float = 8.0):
    """Deterministic list of independent random fields."""
    grid = Grid(n)
    return [
        random_spectral_field(grid, np.random.default_rng([seed, i]), kmax, decay)
        for i in range(count)
    ]


def paired_field_ensemble(n_coarse: int, n_fine: int, count: int, seed: int,
                          decay: float = 8.0):
    """The same random functions realised on a coarse and a fine grid."""
    coarse_grid, fine_grid = Grid(n_coarse), Grid(n_fine)
    pairs = []
    for i in range(count):
        f = random_spectral_field(coarse_grid, np.random.default_rng([seed, i]),
                                  decay=decay)
        pairs.append((f, embed(f, fine_grid)))
    return pairs


def random_velocity(grid: Grid, rng, decay: float = 8.0):
    """Random divergence-free velocity via Biot-Savart of a random field."""
    return velocity_from_vorticity(random_spectral_field(grid, rng, decay=decay))


def velocity_pair_ensemble(n: int, count: int, seed: int, decay: float = 8.0):
    """(u, omega) pairs with solenoidal u, for commutator checks."""
    grid = Grid(n)
    out = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        u = random_velocity(grid, rng, decay)
        omega = random_spectral_field(grid, rng, decay=decay)
        out.append((u, omega))
    return out
