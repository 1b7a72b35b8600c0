"""Periodic-torus scalar fields, transforms and spectral calculus.

Everything lives on the square torus [0, 2*pi)^2 sampled on an n-by-n
collocation grid. Spectral coefficients use the numpy ``fft2`` layout,
normalised so that a constant field c has coefficient c at k = (0, 0).
Lebesgue norms use the normalised measure (2*pi)^{-2} dx, so constants
have norm |c| for every exponent p.

Fields are immutable after construction and all operations are pure.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as _fft

from . import kernels

TWO_PI = 2.0 * np.pi

BSQF_MAGIC = b"BSQF"
BSQF_VERSION = 1


class GridMismatchError(ValueError):
    """Two fields from different grids were combined."""


class PreconditionError(ValueError):
    """An operation's input contract was violated."""


@dataclass(frozen=True)
class Grid:
    """Uniform n-by-n collocation grid on the torus of side 2*pi.

    ``n`` must be even and at least 8; powers of two give the fastest
    transforms. The dealiasing cutoff for quadratic products is
    ``k_c = n // 3`` (2/3 rule).
    """

    n: int

    def __post_init__(self):
        if self.n < 8:
            raise ValueError(f"grid size must be at least 8, got {self.n}")
        if self.n % 2:
            raise ValueError(f"grid size must be even, got {self.n}")

    @property
    def k_c(self) -> int:
        return self.n // 3

    @property
    def dx(self) -> float:
        return TWO_PI / self.n

    def nodes(self):
        """Collocation coordinates (X1, X2), each n-by-n."""
        x = np.arange(self.n) * self.dx
        return np.meshgrid(x, x, indexing="ij")

    def wavenumbers(self):
        """Integer wavenumber arrays (K1, K2) in fft2 layout."""
        return _k1(self.n), _k2(self.n)


def _freeze(arr):
    arr.flags.writeable = False
    return arr


@lru_cache(maxsize=None)
def _kvec(n):
    return _freeze(np.fft.fftfreq(n, d=1.0 / n))


@lru_cache(maxsize=None)
def _k1(n):
    return _freeze(np.ascontiguousarray(np.broadcast_to(_kvec(n)[:, None], (n, n))))


@lru_cache(maxsize=None)
def _k2(n):
    return _freeze(np.ascontiguousarray(np.broadcast_to(_kvec(n)[None, :], (n, n))))


@lru_cache(maxsize=None)
def _deriv_k(n, axis):
    # Nyquist column zeroed: the odd derivative of the unresolved mode.
    k = _kvec(n).copy()
    k[n // 2] = 0.0
    if axis == 1:
        return _freeze(np.ascontiguousarray(np.broadcast_to(k[:, None], (n, n))))
    return _freeze(np.ascontiguousarray(np.broadcast_to(k[None, :], (n, n))))


@lru_cache(maxsize=None)
def _k_sq(n):
    return _freeze(_k1(n) ** 2 + _k2(n) ** 2)


@lru_cache(maxsize=None)
def _inv_lap_mult(n):
    ksq = _k_sq(n).copy()
    ksq[0, 0] = 1.0
    mult = -1.0 / ksq
    mult[0, 0] = 0.0
    return _freeze(mult)


@lru_cache(maxsize=None)
def _dealias_mult(n):
    k_c = n // 3
    keep = np.maximum(np.abs(_k1(n)), np.abs(_k2(n))) <= k_c
    return _freeze(np.ascontiguousarray(keep.astype(np.float64)))


@lru_cache(maxsize=None)
def _dealias_keep(n):
    return _freeze(_dealias_mult(n) != 0.0)


@lru_cache(maxsize=None)
def _reflect_index(n):
    return _freeze((-np.arange(n)) % n)


def _conj_reflect(coeffs):
    r = _reflect_index(coeffs.shape[0])
    return np.conj(coeffs[np.ix_(r, r)])


class RealField:
    """Real scalar samples at the collocation points of a Grid."""

    __slots__ = ("grid", "samples")

    def __init__(self, grid: Grid, samples):
        samples = np.array(samples, dtype=np.float64, copy=True)
        if samples.shape != (grid.n, grid.n):
            raise ValueError(
                f"samples shape {samples.shape} does not match grid n={grid.n}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples contain NaN or Inf")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "samples", _freeze(samples))

    @classmethod
    def _wrap(cls, grid, samples):
        obj = object.__new__(cls)
        object.__setattr__(obj, "grid", grid)
        object.__setattr__(obj, "samples", _freeze(samples))
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("RealField is immutable")


class SpectralField:
    """Complex Fourier coefficients of a real scalar field.

    Coefficients are indexed by wavevectors in fft2 layout and satisfy
    the Hermitian symmetry coeffs(-k) = conj(coeffs(k)).
    """

    __slots__ = ("grid", "coeffs")

    def __init__(self, grid: Grid, coeffs):
        coeffs = np.array(coeffs, dtype=np.complex128, copy=True)
        if coeffs.shape != (grid.n, grid.n):
            raise ValueError(
                f"coeffs shape {coeffs.shape} does not match grid n={grid.n}")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients contain NaN or Inf")
        scale = max(1.0, float(np.max(np.abs(coeffs))))
        if np.max(np.abs(coeffs - _conj_reflect(coeffs))) > 1e-12 * scale:
            raise ValueError("coefficients are not Hermitian-symmetric")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "coeffs", _freeze(coeffs))

    @classmethod
    def _wrap(cls, grid, coeffs):
        obj = object.__new__(cls)
        object.__setattr__(obj, "grid", grid)
        object.__setattr__(obj, "coeffs", _freeze(coeffs))
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("SpectralField is immutable")

    # Linear arithmetic with real scalars preserves Hermitian symmetry.
    def __add__(self, other):
        _check_same_grid(self, other)
        return SpectralField._wrap(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return SpectralField._wrap(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return SpectralField._wrap(self.grid, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField._wrap(self.grid, -self.coeffs)


def zero_field(grid: Grid) -> SpectralField:
    return SpectralField._wrap(grid, np.zeros((grid.n, grid.n), dtype=np.complex128))


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(
            f"grids differ: n={a.grid.n} vs n={b.grid.n}")


def to_spectral(f: RealField) -> SpectralField:
    """Forward transform; a constant c maps to coefficient c at k=0."""
    return SpectralField._wrap(f.grid, np.ascontiguousarray(_spec(f.samples)))


def to_physical(F: SpectralField) -> RealField:
    """Inverse transform back to collocation samples."""
    return RealField._wrap(F.grid, np.ascontiguousarray(_phys(F.coeffs)))


def _phys(coeffs):
    """Raw inverse transform of one coefficient array (or a stack).

    Exploits Hermitian symmetry (every field here is the transform of
    a real field) through the half-spectrum inverse, which is roughly
    twice as fast as a complex inverse.
    """
    n = coeffs.shape[-1]
    return _fft.irfft2(coeffs[..., : n // 2 + 1], s=(n, n), axes=(-2, -1)) * (n * n)


def _spec(samples):
    n = samples.shape[-1]
    return _fft.fft2(samples, axes=(-2, -1)) / (n * n)


def spectral_derivative(F: SpectralField, axis: int) -> SpectralField:
    """Partial derivative along axis 1 or 2 (Nyquist mode zeroed)."""
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis}")
    k = _deriv_k(F.grid.n, axis)
    return SpectralField._wrap(F.grid, kernels.mul_ik(F.coeffs, k))


def gradient(F: SpectralField):
    return spectral_derivative(F, 1), spectral_derivative(F, 2)


def mean_value(F: SpectralField) -> complex:
    return complex(F.coeffs[0, 0])


def invert_laplacian(F: SpectralField) -> SpectralField:
    """Solve lap(psi) = F with the zero-mean gauge.

    Requires F to have (numerically) zero mean; the k = 0 coefficient
    of the result is set to zero.
    """
    m = mean_value(F)
    if abs(m) > 1e-10:
        raise PreconditionError(
            f"invert_laplacian requires a zero-mean field, got mean {m}")
    return SpectralField._wrap(F.grid, kernels.mul_mask(F.coeffs, _inv_lap_mult(F.grid.n)))


def velocity_from_vorticity(omega: SpectralField):
    """Divergence-free velocity (u1, u2) with curl u = omega.

    Biot-Savart on the torus: psi solves lap(psi) = omega and
    u = (-d2 psi, d1 psi), so that d1 u2 - d2 u1 = omega.
    """
    psi = invert_laplacian(omega)
    u1 = -spectral_derivative(psi, 2)
    u2 = spectral_derivative(psi, 1)
    return u1, u2


def dealias(F: SpectralField) -> SpectralField:
    """Zero every mode with max(|k1|, |k2|) above the 2/3-rule cutoff."""
    return SpectralField._wrap(
        F.grid, kernels.mul_mask(F.coeffs, _dealias_mult(F.grid.n)))


def is_dealiased(F: SpectralField) -> bool:
    return not np.any(F.coeffs[~_dealias_keep(F.grid.n)])


def transport_term(u1: SpectralField, u2: SpectralField,
                   F: SpectralField) -> SpectralField:
    """Dealiased advection product u . grad(F), computed pointwise."""
    _check_same_grid(u1, F)
    _check_same_grid(u2, F)
    g1 = _phys(spectral_derivative(F, 1).coeffs)
    g2 = _phys(spectral_derivative(F, 2).coeffs)
    prod = kernels.advect_combine(_phys(u1.coeffs), _phys(u2.coeffs), g1, g2)
    return SpectralField._wrap(
        F.grid, kernels.mul_mask(np.ascontiguousarray(_spec(prod)),
                                 _dealias_mult(F.grid.n)))


def divergence(u1: SpectralField, u2: SpectralField) -> SpectralField:
    _check_same_grid(u1, u2)
    return spectral_derivative(u1, 1) + spectral_derivative(u2, 2)


def _lp_norm(samples, p) -> float:
    if p < 1:
        raise PreconditionError(f"Lebesgue exponent must be >= 1, got {p}")
    a = np.abs(samples)
    if np.isinf(p):
        return float(a.max())
    if p == 1:
        return float(a.mean())
    if p == 2:
        return float(np.sqrt(np.mean(a * a)))
    return float(np.mean(a ** p) ** (1.0 / p))


def lebesgue_norm(f: RealField, p) -> float:
    """L^p norm under the normalised measure, so that ||1||_p = 1."""
    return _lp_norm(f.samples, float(p))


def spectral_lebesgue_norm(F: SpectralField, p) -> float:
    """L^p norm of the physical-space realisation of F."""
    return _lp_norm(_phys(F.coeffs), float(p))


def l2_norm_spectral(F: SpectralField) -> float:
    """L^2 norm straight from coefficients (Parseval)."""
    return float(np.sqrt(np.sum(np.abs(F.coeffs) ** 2)))


def embed(F: SpectralField, fine: Grid) -> SpectralField:
    """Represent F exactly on a finer grid (spectral zero-padding).

    Requires every retained mode of F to fit strictly inside the
    coarse Nyquist square, which holds for any dealiased field.
    """
    n_old, n_new = F.grid.n, fine.n
    if n_new < n_old:
        raise ValueError("embed targets an equal or finer grid")
    if n_new == n_old:
        return F
    half = n_old // 2
    if np.any(F.coeffs[half, :]) or np.any(F.coeffs[:, half]):
        raise PreconditionError("field carries Nyquist modes; dealias before embedding")
    out = np.zeros((n_new, n_new), dtype=np.complex128)
    target = _kvec(n_old).astype(int) % n_new
    out[np.ix_(target, target)] = F.coeffs
    return SpectralField._wrap(fine, out)


@lru_cache(maxsize=None)
def _tail_mask(n):
    k_c = n // 3
    mask = np.maximum(np.abs(_k1(n)), np.abs(_k2(n))) > k_c / 2.0
    return _freeze(mask)


def tail_fraction(F: SpectralField) -> float:
    """Fraction of spectral L^2 mass beyond half the dealias cutoff.

    A resolution-exhaustion proxy: once a noticeable fraction of a
    field's energy sits in the upper half of the retained band, the
    grid no longer resolves the dynamics.
    """
    power = np.abs(F.coeffs) ** 2
    total = float(power.sum())
    if total == 0.0:
        return 0.0
    return float(power[_tail_mask(F.grid.n)].sum()) / total


def write_bsqf(path, f: RealField) -> None:
    """Binary snapshot: 16-byte header then row-major little-endian f64."""
    header = struct.pack("<4sIII", BSQF_MAGIC, BSQF_VERSION, f.grid.n, 0)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(f.samples.astype("<f8").tobytes(order="C"))


def read_bsqf(path) -> RealField:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16:
            raise ValueError(f"{path}: truncated header")
        magic, version, n, _reserved = struct.unpack("<4sIII", header)
        if magic != BSQF_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != BSQF_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        data = fh.read()
    expected = 8 * n * n
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} data bytes, got {len(data)}")
    samples = np.frombuffer(data, dtype="<f8").astype(np.float64).reshape(n, n)
    return RealField(Grid(int(n)), samples)
