"""Named micromodulus kernels, initial conditions and forcings.

These registries are what run configs refer to by name; every entry is a
vectorized callable. Kernels take ``(x1, x2)`` offsets, initial conditions
take ``(x1, x2)`` positions, forcings take ``(x1, x2, t)``.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError


def gaussian():
    """exp(-x1^2 - x2^2), the benchmark micromodulus."""

    def c(x1, x2):
        return np.exp(-(x1**2) - x2**2)

    return c


def constant_ball(value: float = 1.0):
    """Constant micromodulus; the horizon cutoff gives it ball support."""
    value = float(value)

    def c(x1, x2):
        return np.full_like(np.asarray(x1, dtype=float), value)

    return c


def linear_ramp(c1: float = -0.5, c2: float = -0.5):
    """Affine displacement ``c1 x1 + c2 x2`` (a sawtooth once periodized)."""
    c1 = float(c1)
    c2 = float(c2)

    def u0(x1, x2):
        return c1 * x1 + c2 * x2

    return u0


def jump_quadrant():
    """Indicator of the closed quadrant [1/2, 1]^2, sampled pointwise.

    Boundary points take the closed-set value 1; the right/top edges at
    coordinate 1 are never sampled on the endpoint-exclusive grid.
    """

    def u0(x1, x2):
        return np.where((np.asarray(x1) >= 0.5) & (np.asarray(x2) >= 0.5), 1.0, 0.0)

    return u0


def zero():
    def u0(x1, x2):
        return np.zeros_like(np.asarray(x1, dtype=float))

    return u0


def constant_forcing(value: float = 0.0):
    value = float(value)

    def b(x1, x2, t):
        return np.full_like(np.asarray(x1, dtype=float), value)

    return b


KERNELS = {
    "gaussian": gaussian,
    "constant_ball": constant_ball,
}

INITIAL_CONDITIONS = {
    "linear_ramp": linear_ramp,
    "jump_quadrant": jump_quadrant,
    "zero": zero,
}

FORCINGS = {
    "none": lambda: None,
    "constant": constant_forcing,
}


def _resolve(registry: dict, kind: str, name: str, params: dict | None):
    try:
        factory = registry[name]
    except KeyError:
        known = ", ".join(sorted(registry))
        raise ConfigError(f"unknown {kind} {name!r}; registered: {known}") from None
    try:
        return factory(**(params or {}))
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {kind} {name!r}: {exc}") from None


def make_kernel_function(name: str, params: dict | None = None):
    return _resolve(KERNELS, "kernel", name, params)


def make_initial_condition(name: str, params: dict | None = None):
    return _resolve(INITIAL_CONDITIONS, "initial condition", name, params)


def make_forcing(name: str, params: dict | None = None):
    return _resolve(FORCINGS, "forcing", name, params)
