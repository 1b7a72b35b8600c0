"""Paraproducts, remainders and transport commutators.

Implements the product decomposition f*g = T_f g + T_g f + R(f, g),
the advection commutator [u, D_j] . grad(omega), and its six-term
split used to verify the commutator estimate empirically. All
nonlinear products are 2/3-dealiased on both inputs and outputs, so
the algebraic identities hold to rounding error rather than aliasing
error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .fields import (
    PreconditionError,
    SpectralField,
    _check_same_grid,
    _dealias_mult,
    _deriv_k,
    _lp_norm,
    _phys,
    _spec,
    dealias,
    gradient,
    spectral_derivative,
)
from .littlewood_paley import (
    CutoffProfile,
    _as_index,
    _lq_norm,
    besov_norm,
    default_cutoff,
    dyadic_block,
)


def _phys_blocks(F, profile):
    stack = kernels.mul_mask_stack(F.coeffs, profile.block_masks(F.grid))
    return _phys(stack)


def _spec_dealias(samples, grid):
    return SpectralField._wrap(
        grid, kernels.mul_mask(np.ascontiguousarray(_spec(samples)),
                               _dealias_mult(grid.n)))


def _pointwise(a: SpectralField, b: SpectralField) -> SpectralField:
    """Dealiased pointwise product of two spectral fields."""
    return _spec_dealias(_phys(a.coeffs) * _phys(b.coeffs), a.grid)


def _check_solenoidal(u1, u2):
    div = spectral_derivative(u1, 1) + spectral_derivative(u2, 2)
    bound = float(np.sum(np.abs(div.coeffs)))
    scale = max(1.0, float(np.sum(np.abs(u1.coeffs))), float(np.sum(np.abs(u2.coeffs))))
    if bound > 1e-10 * scale:
        raise PreconditionError(
            f"velocity is not divergence-free (|div| up to {bound:.3e})")


def _paraproduct_physical(cum_low, high_blocks):
    """Sum over j >= 1 of S_{j-1}(low) * block_j(high), in physical space."""
    rows = high_blocks.shape[0]
    acc = np.zeros_like(high_blocks[0])
    for j in range(1, rows - 1):
        acc += cum_low[j - 1] * high_blocks[j + 1]
    return acc


def _remainder_physical(bf, bg):
    rows = bf.shape[0]
    acc = np.zeros_like(bf[0])
    for r in range(rows):
        lo, hi = max(0, r - 1), min(rows - 1, r + 1)
        near = bg[lo]
        for rr in range(lo + 1, hi + 1):
            near = near + bg[rr]
        acc += bf[r] * near
    return acc


def paraproduct(f: SpectralField, g: SpectralField,
                profile: CutoffProfile | None = None) -> SpectralField:
    """Bony paraproduct T_f g: low frequencies of f times blocks of g."""
    _check_same_grid(f, g)
    profile = profile or default_cutoff()
    f, g = dealias(f), dealias(g)
    bf = _phys_blocks(f, profile)
    bg = _phys_blocks(g, profile)
    acc = _paraproduct_physical(np.cumsum(bf, axis=0), bg)
    return _spec_dealias(acc, f.grid)


def remainder(f: SpectralField, g: SpectralField,
              profile: CutoffProfile | None = None) -> SpectralField:
    """Bony remainder R(f, g): comparable-frequency block pairs."""
    _check_same_grid(f, g)
    profile = profile or default_cutoff()
    f, g = dealias(f), dealias(g)
    acc = _remainder_physical(_phys_blocks(f, profile), _phys_blocks(g, profile))
    return _spec_dealias(acc, f.grid)


def bony_split(f: SpectralField, g: SpectralField,
               profile: CutoffProfile | None = None):
    """(T_f g, T_g f, R(f, g)); the three parts sum to dealias(f*g)."""
    _check_same_grid(f, g)
    profile = profile or default_cutoff()
    f, g = dealias(f), dealias(g)
    bf = _phys_blocks(f, profile)
    bg = _phys_blocks(g, profile)
    t_fg = _spec_dealias(_paraproduct_physical(np.cumsum(bf, axis=0), bg), f.grid)
    t_gf = _spec_dealias(_paraproduct_physical(np.cumsum(bg, axis=0), bf), f.grid)
    rem = _spec_dealias(_remainder_physical(bf, bg), f.grid)
    return t_fg, t_gf, rem


def _advect(u1, u2, F):
    """u . grad(F), dealiased (same contract as fields.transport_term)."""
    g1 = _phys(spectral_derivative(F, 1).coeffs)
    g2 = _phys(spectral_derivative(F, 2).coeffs)
    prod = kernels.advect_combine(_phys(u1.coeffs), _phys(u2.coeffs), g1, g2)
    return _spec_dealias(prod, F.grid)


def commutator(u, j: int, omega: SpectralField,
               profile: CutoffProfile | None = None) -> SpectralField:
    """The transport commutator u . grad(D_j omega) - D_j(u . grad omega)."""
    u1, u2 = (dealias(c) for c in u)
    _check_same_grid(u1, omega)
    _check_solenoidal(u1, u2)
    profile = profile or default_cutoff()
    omega = dealias(omega)
    block = dyadic_block(omega, j, profile)
    advected_block = _advect(u1, u2, block)
    block_of_advection = dyadic_block(_advect(u1, u2, omega), j, profile)
    return advected_block - block_of_advection


@dataclass(frozen=True)
class CommutatorSplit:
    """Six-term split of the transport commutator at one dyadic scale.

    ``terms`` holds R1..R6; their sum equals the directly computed
    commutator to rounding. ``tilde_u`` is the high-frequency velocity
    part u - D_{-1} u used by the first five terms.
    """

    j: int
    terms: tuple
    tilde_u: tuple

    def total(self) -> SpectralField:
        total = self.terms[0]
        for t in self.terms[1:]:
            total = total + t
        return total


def six_term_decomposition(u, j: int, omega: SpectralField,
                           profile: CutoffProfile | None = None) -> CommutatorSplit:
    """Split [u, D_j] . grad(omega) into the six standard pieces.

    With tu = u - D_{-1}u and summation over the component index k:

      R1 = [T_{tu^k}, D_j] d_k omega      R2 = T_{d_k D_j omega} tu^k
      R3 = -D_j T_{d_k omega} tu^k        R4 = d_k R(tu^k, D_j omega)
      R5 = -d_k D_j R(tu^k, omega)        R6 = [D_{-1}u^k, D_j] d_k omega

    R6 carries the low-frequency velocity: that choice makes the six
    terms sum to the commutator exactly (the identity is an exact
    regrouping of Bony decompositions; dealiasing keeps it exact on
    the grid).
    """
    profile = profile or default_cutoff()
    u1, u2 = (dealias(c) for c in u)
    _check_same_grid(u1, omega)
    _check_solenoidal(u1, u2)
    omega = dealias(omega)

    low = tuple(dyadic_block(c, -1, profile) for c in (u1, u2))
    tilde = tuple(c - lo for c, lo in zip((u1, u2), low))
    grads = gradient(omega)
    block = dyadic_block(omega, j, profile)
    block_grads = tuple(dyadic_block(g, j, profile) for g in grads)

    zero = tilde[0] * 0.0
    r1 = r2 = r4 = r5 = r6 = zero
    r3_inner = zero
    for k in range(2):
        tu, dk, dk_j = tilde[k], grads[k], block_grads[k]
        r1 = r1 + (paraproduct(tu, dk_j, profile)
                   - dyadic_block(paraproduct(tu, dk, profile), j, profile))
        r2 = r2 + paraproduct(dk_j, tu, profile)
        r3_inner = r3_inner + paraproduct(dk, tu, profile)
        r4 = r4 + spectral_derivative(remainder(tu, block, profile), k + 1)
        r5 = r5 + spectral_derivative(
            dyadic_block(remainder(tu, omega, profile), j, profile), k + 1)
        r6 = r6 + (_pointwise(low[k], dk_j)
                   - dyadic_block(_pointwise(low[k], dk), j, profile))
    r3 = -dyadic_block(r3_inner, j, profile)
    r5 = -r5
    return CommutatorSplit(j, (r1, r2, r3, r4, r5, r6), tilde)


def _commutator_stack(u, omega, profile):
    """Physical-space commutators [u, D_j] . grad(omega) for every j."""
    grid = omega.grid
    masks = profile.block_masks(grid)
    stack = kernels.mul_mask_stack(omega.coeffs, masks)
    k1 = _deriv_k(grid.n, 1)
    k2 = _deriv_k(grid.n, 2)
    g1 = _phys(1j * k1 * stack)
    g2 = _phys(1j * k2 * stack)
    u1p = _phys(u[0].coeffs)
    u2p = _phys(u[1].coeffs)
    advected = _spec(u1p * g1 + u2p * g2) * _dealias_mult(grid.n)
    w = _advect(u[0], u[1], omega)
    return _phys(advected - w.coeffs * masks)


def commutator_norms(u, omega: SpectralField, p,
                     profile: CutoffProfile | None = None):
    """L^p norms of [u, D_j] . grad(omega) for j = -1 .. j_max."""
    profile = profile or default_cutoff()
    u1, u2 = (dealias(c) for c in u)
    _check_solenoidal(u1, u2)
    omega = dealias(omega)
    phys = _commutator_stack((u1, u2), omega, profile)
    return np.array([_lp_norm(layer, float(p)) for layer in phys])


def _grad_inf(u1, u2):
    comps = np.stack([
        _phys(spectral_derivative(u1, 1).coeffs),
        _phys(spectral_derivative(u1, 2).coeffs),
        _phys(spectral_derivative(u2, 1).coeffs),
        _phys(spectral_derivative(u2, 2).coeffs),
    ])
    return float(np.sqrt(np.sum(comps * comps, axis=0)).max())


def _rounding_floor(u, omega, index, profile):
    """Numerator magnitudes below this are rounding debris, not signal.

    Commutators of exactly-commuting operations (constant advection)
    still leave O(eps) products of the operand magnitudes behind.
    """
    u_sup = max(float(np.sum(np.abs(c.coeffs))) for c in u)
    return 1e-13 * u_sup * besov_norm(omega, (index.s, index.p, index.q), profile)


def commutator_ratio(u, omega: SpectralField, idx,
                     profile: CutoffProfile | None = None) -> float:
    """Weighted commutator size over its transport-estimate bound.

    Returns the l^q norm over j of 2^{j(s-1)} ||[u, D_j].grad omega||_p
    divided by ||grad u||_inf * ||omega||_{B^{s-1}_{p,q}}. Vanishing
    commutators give 0; a vanishing bound with a nonzero numerator is
    a domain error.
    """
    index = _as_index(idx)
    if index.s <= 0:
        raise PreconditionError(f"requires s > 0, got s={index.s}")
    profile = profile or default_cutoff()
    norms = commutator_norms(u, omega, index.p, profile)
    js = np.arange(-1, len(norms) - 1)
    numerator = _lq_norm((2.0 ** (js * (index.s - 1.0))) * norms, index.q)
    if numerator <= _rounding_floor(u, omega, index, profile):
        return 0.0
    u1, u2 = (dealias(c) for c in u)
    den = _grad_inf(u1, u2) * besov_norm(
        omega, (index.s - 1.0, index.p, index.q), profile)
    if den == 0.0:
        raise PreconditionError("commutator bound vanishes but commutator does not")
    return numerator / den


def coupled_commutator_ratio(u, theta: SpectralField, omega: SpectralField,
                             idx, profile: CutoffProfile | None = None) -> float:
    """Ratio for the scalar-transport commutator [u, D_j] . grad(theta).

    Same machinery as ``commutator_ratio`` at full weight 2^{j s}, with
    the two-term bound ||grad u||_inf ||theta||_{B^s} +
    ||grad theta||_inf ||omega||_{B^{s-1}}.
    """
    index = _as_index(idx)
    if index.s <= 0:
        raise PreconditionError(f"requires s > 0, got s={index.s}")
    profile = profile or default_cutoff()
    norms = commutator_norms(u, theta, index.p, profile)
    js = np.arange(-1, len(norms) - 1)
    numerator = _lq_norm((2.0 ** (js * index.s)) * norms, index.q)
    if numerator <= 2.0 * _rounding_floor(u, theta, index, profile):
        return 0.0
    u1, u2 = (dealias(c) for c in u)
    theta = dealias(theta)
    g1, g2 = gradient(theta)
    grad_theta_inf = float(np.sqrt(_phys(g1.coeffs) ** 2 + _phys(g2.coeffs) ** 2).max())
    den = (_grad_inf(u1, u2) * besov_norm(theta, (index.s, index.p, index.q), profile)
           + grad_theta_inf * besov_norm(omega, (index.s - 1.0, index.p, index.q), profile))
    if den == 0.0:
        raise PreconditionError("commutator bound vanishes but commutator does not")
    return numerator / den
