"""2D DFT on grid fields and micromodulus kernel spectra.

Normalization: the forward transform is unnormalized and the inverse carries
the full ``1/N^2`` (numpy's default), so Parseval reads
``sum |u|^2 = (1/N^2) sum |u_hat|^2``. Circular convolution of two fields is
``ifft2(fft2(u) * fft2(w))``; multiplying by ``dx^2`` turns it into the
periodic rectangle-rule quadrature of the convolution integral.

A kernel is sampled at the grid's signed minimal-image offsets (index 0 at
the zero offset), hard-zeroed beyond the horizon ``delta``. The DFT of such
an even real kernel is real, which :func:`build_kernel` verifies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import HorizonTooLargeError, ImaginaryResidueError, ValidationError
from .grid import Field, Grid2D

_IMAG_TOL = 1e-12


@dataclass(frozen=True)
class Spectrum:
    """Complex DFT coefficients of a field, in numpy's frequency layout."""

    grid: Grid2D
    coefficients: np.ndarray = field(compare=False)

    def __post_init__(self) -> None:
        c = np.asarray(self.coefficients, dtype=np.complex128)
        n = self.grid.n_points
        if c.shape != (n, n):
            raise ValidationError(f"spectrum shape {c.shape} does not match grid ({n}, {n})")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)


def forward_dft2(u: Field) -> Spectrum:
    return Spectrum(u.grid, np.fft.fft2(u.values))


def inverse_dft2(s: Spectrum) -> Field:
    """Inverse transform; rejects spectra whose inverse is not real.

    The imaginary residue of a conjugate-symmetric spectrum is pure
    roundoff; anything above ``1e-12`` (relative to the real part) signals
    a non-symmetric spectrum bug and raises.
    """
    w = np.fft.ifft2(s.coefficients)
    scale = max(1.0, float(np.max(np.abs(w.real))))
    imag = float(np.max(np.abs(w.imag)))
    if imag > _IMAG_TOL * scale:
        raise ImaginaryResidueError(
            f"imaginary residue {imag:.3e} exceeds {_IMAG_TOL:.0e} * {scale:.3e}"
        )
    return Field(s.grid, w.real.copy())


@dataclass(frozen=True)
class KernelSpectrum:
    """Sampled, cutoff micromodulus together with its DFT and masses.

    Attributes
    ----------
    kernel_samples : Field
        ``C`` at the periodic minimal-image offsets, zero beyond ``horizon``.
    spectrum : Spectrum
        DFT of ``kernel_samples`` (real up to roundoff).
    gamma_discrete : float
        ``dx^2 * sum(kernel_samples)``; the operator uses this one so that
        constants are annihilated exactly.
    gamma_continuum : float
        Quadrature value of ``integral_{|x| <= horizon} C(x) dx``.
    horizon : float
        Interaction cutoff ``delta``.
    """

    kernel_samples: Field
    spectrum: Spectrum
    gamma_discrete: float
    gamma_continuum: float
    horizon: float

    @property
    def grid(self) -> Grid2D:
        return self.kernel_samples.grid


def _disk_quadrature(c_fn, delta: float, n_nodes: int = 96) -> float:
    # Polar Gauss-Legendre tensor rule; near-exact for smooth micromoduli.
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    r = 0.5 * delta * (x + 1.0)
    wr = 0.5 * delta * w
    theta = np.pi * (x + 1.0)
    wt = np.pi * w
    R, T = np.meshgrid(r, theta, indexing="ij")
    vals = np.asarray(c_fn(R * np.cos(T), R * np.sin(T)), dtype=float)
    return float(np.einsum("i,j,ij->", wr * r, wt, vals))


def build_kernel(c_fn, delta: float, grid: Grid2D) -> KernelSpectrum:
    """Sample a micromodulus on the grid offsets and cache its spectrum.

    ``c_fn(x1, x2)`` must be vectorized and even; evenness is inherited from
    the symmetric offset layout, so only the cutoff is enforced here. The
    horizon must fit the periodic cell: ``delta <= (b - a) / 2``.
    """
    if delta <= 0:
        raise ValidationError(f"horizon must be positive, got {delta}")
    if delta > grid.period / 2:
        raise HorizonTooLargeError(
            f"horizon {delta} exceeds half period {grid.period / 2}"
        )
    off = grid.offset_coordinates()
    o1, o2 = np.meshgrid(off, off, indexing="ij")
    radius = np.hypot(o1, o2)
    samples = np.asarray(c_fn(o1, o2), dtype=np.float64)
    # hard truncation; the tiny slack keeps points at exactly |x| = delta
    # inside regardless of how delta was computed
    samples = np.where(radius <= delta * (1.0 + 1e-12), samples, 0.0)
    kernel = Field(grid, samples)
    spectrum = forward_dft2(kernel)
    imag = float(np.max(np.abs(spectrum.coefficients.imag)))
    scale = max(1.0, float(np.max(np.abs(spectrum.coefficients.real))))
    if imag > _IMAG_TOL * scale:
        raise ImaginaryResidueError(
            f"kernel spectrum has imaginary parts {imag:.3e}; micromodulus must be even"
        )
    gamma_discrete = float(grid.dx**2 * samples.sum())
    gamma_continuum = _disk_quadrature(c_fn, delta)
    return KernelSpectrum(kernel, spectrum, gamma_discrete, gamma_continuum, delta)
