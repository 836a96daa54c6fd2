"""The discrete nonlinear peridynamic operator and its linearization.

The operator acts on a field ``u`` as the periodic quadrature sum

    L(u)_n = dx^2 * sum_m C_per(x_m - x_n) (u_m - u_n)^r

with ``r`` odd. Expanding the power binomially turns every term into a
circular convolution with the sampled kernel, so the whole evaluation is

    L(u) = conv(C, u^r) * dx^2
         + sum_{l=1..r-1} binom(r, l) (-1)^l  u^l * conv(C, u^{r-l}) * dx^2
         - gamma_N * u^r

where ``conv`` is computed by FFT multiplication and ``gamma_N`` is the
discrete kernel mass; using the discrete mass makes ``L(const) = 0`` hold to
roundoff. The middle terms are formed as pointwise products in physical
space (one inverse transform each), which is the same quantity as the
spectral-domain convolution form at lower cost. Powers ``u^l`` are plain
pointwise products; no dealiasing filter is applied.

``apply_direct`` evaluates the identical quadrature sum by brute force
(loop over kernel offsets, O(N^4) worst case) and exists as an oracle for
the FFT path. ``jvp`` is the analytic directional derivative

    DL(u)[h]_n = r * dx^2 * sum_m C_per(x_m - x_n) (u_m - u_n)^{r-1} (h_m - h_n)

evaluated with the same binomial/FFT machinery; it is what the implicit
time integrator hands to its matrix-free Krylov solver. Both entry points
divide by the constant density.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError, GridTooLargeError, ValidationError
from .grid import Field, Grid2D
from .spectral import KernelSpectrum

_DIRECT_SOFT_CAP = 32
_DIRECT_HARD_CAP = 64


@dataclass(frozen=True)
class OperatorSpec:
    """Everything the operator needs: kernel, nonlinearity, density, forcing.

    ``forcing``, when present, is a vectorized callable ``b(x1, x2, t)``; it
    is sampled and added by the time integrators, never by the operator
    itself.
    """

    kernel: KernelSpectrum
    r: int = 1
    density: float = 1.0
    forcing: object | None = None
    _chat: np.ndarray = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        if int(self.r) != self.r or self.r < 1 or self.r % 2 == 0:
            raise ValidationError(f"nonlinearity exponent r={self.r} must be odd and >= 1")
        if not self.density > 0:
            raise ValidationError(f"density must be positive, got {self.density}")
        object.__setattr__(self, "r", int(self.r))
        chat = np.ascontiguousarray(self.kernel.spectrum.coefficients.real)
        chat.setflags(write=False)
        object.__setattr__(self, "_chat", chat)

    @property
    def grid(self) -> Grid2D:
        return self.kernel.grid


def _check_grid(u: Field, spec: OperatorSpec) -> None:
    if u.grid != spec.grid:
        raise GridMismatchError("field grid does not match the kernel's grid")


def _conv(chat: np.ndarray, w: np.ndarray) -> np.ndarray:
    # circular convolution with the sampled kernel; real by symmetry
    return np.fft.ifft2(chat * np.fft.fft2(w)).real


def apply_spectral_values(v: np.ndarray, spec: OperatorSpec) -> np.ndarray:
    """FFT evaluation of L(u)/rho on a raw value array (hot path)."""
    r = spec.r
    chat = spec._chat
    dx2 = spec.grid.dx**2
    powers = [None, v]
    for _ in range(r - 1):
        powers.append(powers[-1] * v)
    out = _conv(chat, powers[r]) * dx2
    for l in range(1, r):
        coef = math.comb(r, l) * (-1) ** l
        out += coef * powers[l] * (_conv(chat, powers[r - l]) * dx2)
    out -= spec.kernel.gamma_discrete * powers[r]
    if spec.density != 1.0:
        out /= spec.density
    return out


def apply_spectral(u: Field, spec: OperatorSpec) -> Field:
    """Evaluate ``L(u)/rho`` via FFT circular convolutions."""
    _check_grid(u, spec)
    return Field(u.grid, apply_spectral_values(u.values, spec))


def apply_direct(u: Field, spec: OperatorSpec) -> Field:
    """Evaluate ``L(u)/rho`` by the brute-force periodic quadrature sum.

    Intended as the independent oracle for :func:`apply_spectral` on small
    grids; warns above N=32 and refuses above N=64.
    """
    _check_grid(u, spec)
    n = u.grid.n_points
    if n > _DIRECT_HARD_CAP:
        raise GridTooLargeError(f"apply_direct is capped at N={_DIRECT_HARD_CAP}, got N={n}")
    if n > _DIRECT_SOFT_CAP:
        warnings.warn(
            f"apply_direct on N={n} costs O(N^4); intended for N <= {_DIRECT_SOFT_CAP}",
            stacklevel=2,
        )
    v = u.values
    samples = spec.kernel.kernel_samples.values
    out = np.zeros_like(v)
    for p in range(n):
        for q in range(n):
            w = samples[p, q]
            if w == 0.0:
                continue
            out += w * (np.roll(v, (-p, -q), axis=(0, 1)) - v) ** spec.r
    out *= u.grid.dx**2
    if spec.density != 1.0:
        out /= spec.density
    return Field(u.grid, out)


def jvp_values(v: np.ndarray, h: np.ndarray, spec: OperatorSpec) -> np.ndarray:
    """Directional derivative DL(u)[h]/rho on raw value arrays."""
    r = spec.r
    chat = spec._chat
    dx2 = spec.grid.dx**2
    m = r - 1
    powers = [np.ones_like(v), v]
    for _ in range(m - 1):
        powers.append(powers[-1] * v)
    out = np.zeros_like(v)
    for l in range(m + 1):
        coef = math.comb(m, l) * (-1) ** l
        w = powers[m - l]
        if m - l == 0:
            # conv with the constant 1 is the kernel mass, exactly
            term = _conv(chat, h) * dx2 - spec.kernel.gamma_discrete * h
        else:
            term = _conv(chat, w * h) * dx2 - h * (_conv(chat, w) * dx2)
        if l > 0:
            term = powers[l] * term
        out += coef * term
    out *= r
    if spec.density != 1.0:
        out /= spec.density
    return out


def jvp(u: Field, h: Field, spec: OperatorSpec) -> Field:
    """Analytic linearization of the operator at ``u`` applied to ``h``.

    Linear in ``h``; for ``r = 1`` it coincides with ``apply_spectral(h)``
    independently of ``u``.
    """
    _check_grid(u, spec)
    _check_grid(h, spec)
    return Field(u.grid, jvp_values(u.values, h.values, spec))
