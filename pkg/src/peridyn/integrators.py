"""Time marching: implicit Newmark-beta and explicit Stormer-Verlet.

One step of the Newmark-beta scheme advances displacement and velocity by

    u_{s+1} = u_s + dt v_s + dt^2 ((1/2 - beta) a(u_s) + beta a(u_{s+1}))
    v_{s+1} = v_s + dt/2 (a(u_s) + a(u_{s+1}))

where ``a(u) = (L(u) + b(t)) / rho`` plus any penalization term. For
``beta = 0`` the displacement update is explicit and the scheme coincides
with the Stormer-Verlet method; for ``beta > 0`` the displacement solves

    F(w) = w - u_s - dt v_s - (1 - 2 beta) dt^2/2 a(u_s) - beta dt^2 a(w) = 0

by Newton iteration. The inner linear systems ``(I - beta dt^2 Da) h = -F``
are solved matrix-free with conjugate gradients: ``-Da`` is symmetric
positive semidefinite (even powers of the displacement differences weight
the nonlocal Dirichlet form), so the Newton matrix is SPD and CG applies
without preconditioning. The Newton initial guess is the explicit
predictor ``u_s + dt v_s + dt^2/2 a(u_s)``, O(dt^3) from the solution.

Forcing is evaluated at ``t_s`` for the explicit part and ``t_{s+1}`` for
the implicit part, mirroring the operator weighting. Step times are
computed as ``step_index * dt`` (one multiplication) so they never drift.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    GridMismatchError,
    KrylovStallError,
    NewtonDivergenceError,
    NonFiniteFieldError,
    ValidationError,
)
from .grid import Field, inner_product, l2_norm
from .operator import OperatorSpec, apply_spectral_values, jvp_values
from .penalization import PenalizationConfig


@dataclass(frozen=True)
class State:
    """Displacement, velocity and clock of a trajectory point."""

    u: Field
    v: Field
    t: float
    step_index: int = 0

    def __post_init__(self) -> None:
        if self.u.grid != self.v.grid:
            raise GridMismatchError("displacement and velocity grids differ")


@dataclass(frozen=True)
class TimeConfig:
    """Step size, final time, beta and solver tolerances.

    ``beta`` must lie in ``[0, 1/2]``; the scheme is unconditionally stable
    for ``beta in [1/4, 1/2]`` (see :attr:`unconditionally_stable`).
    """

    dt: float
    t_final: float
    beta: float = 0.25
    newton_tol: float = 1e-10
    newton_max_iter: int = 25
    krylov_tol: float = 1e-12
    krylov_max_iter: int = 200

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.t_final < 0:
            raise ValidationError(f"t_final must be nonnegative, got {self.t_final}")
        if not 0.0 <= self.beta <= 0.5:
            raise ValidationError(f"beta={self.beta} outside the admissible range [0, 1/2]")

    @property
    def unconditionally_stable(self) -> bool:
        return 0.25 <= self.beta <= 0.5

    @property
    def n_steps(self) -> int:
        return int(np.floor(self.t_final / self.dt + 1e-9))


@dataclass(frozen=True)
class IntegrationResult:
    """Snapshots plus per-step diagnostics from :func:`integrate`."""

    states: list[State]
    newton_iterations: list[int]
    step_wall_s: list[float]

    @property
    def final(self) -> State:
        return self.states[-1]


def cg_solve(apply_a, b: Field, rtol: float, max_iter: int) -> Field:
    """Matrix-free conjugate gradients for an SPD operator on fields."""
    x = Field(b.grid, np.zeros_like(b.values))
    r = b
    p = r
    rs = inner_product(r, r)
    norm_b = np.sqrt(rs)
    if norm_b == 0.0:
        return x
    for _ in range(max_iter):
        ap = apply_a(p)
        curvature = inner_product(p, ap)
        if curvature <= 0.0:
            raise KrylovStallError("non-positive curvature; operator is not SPD")
        alpha = rs / curvature
        x = x + alpha * p
        r = r - alpha * ap
        rs_new = inner_product(r, r)
        if np.sqrt(rs_new) <= rtol * norm_b:
            return x
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise KrylovStallError(f"conjugate gradients stalled after {max_iter} iterations")


def newton_solve(
    residual,
    guess: Field,
    jvp_at,
    tol: float = 1e-10,
    max_iter: int = 25,
    *,
    krylov_tol: float = 1e-12,
    krylov_max_iter: int = 200,
    residual_history: list | None = None,
    linear_solver=None,
) -> Field:
    """Solve ``F(u) = 0`` by matrix-free Newton iteration.

    Parameters
    ----------
    residual : callable(Field) -> Field
        The residual ``F``.
    guess : Field
        Starting point.
    jvp_at : callable(Field) -> callable(Field) -> Field
        Returns the action of the Jacobian ``F'(u)`` at a point.
    residual_history : list, optional
        Receives ``||F||`` before the first and after every update; the
        number of Newton updates is ``len(residual_history) - 1``.
    linear_solver : callable(jacobian_action, rhs) -> Field, optional
        Override for the inner solve; defaults to conjugate gradients
        (valid whenever the Jacobian is SPD).

    Returns the iterate with ``||F|| <= tol * max(1, ||F(guess)||)``; the
    guess itself is returned untouched when it already qualifies.
    """
    u = guess
    fu = residual(u)
    fnorm = l2_norm(fu)
    if residual_history is not None:
        residual_history.append(fnorm)
    threshold = tol * max(1.0, fnorm)
    updates = 0
    while fnorm > threshold:
        if updates >= max_iter:
            raise NewtonDivergenceError(
                f"residual {fnorm:.3e} above {threshold:.3e} after {max_iter} iterations"
            )
        jac = jvp_at(u)
        if linear_solver is not None:
            step = linear_solver(jac, -1.0 * fu)
        else:
            step = cg_solve(jac, -1.0 * fu, krylov_tol, krylov_max_iter)
        u = u + step
        fu = residual(u)
        fnorm = l2_norm(fu)
        updates += 1
        if residual_history is not None:
            residual_history.append(fnorm)
    return u


# -- acceleration assembly ----------------------------------------------------


def _forcing_values(spec: OperatorSpec, grid, t: float):
    if spec.forcing is None:
        return None
    x1, x2 = grid.meshgrid()
    return np.asarray(spec.forcing(x1, x2, t), dtype=np.float64) / spec.density


def _accel(u: np.ndarray, t: float, spec: OperatorSpec, pen: PenalizationConfig | None):
    """(L(u) + b(t)) / rho plus the displacement penalization, on arrays."""
    out = apply_spectral_values(u, spec)
    b = _forcing_values(spec, spec.grid, t)
    if b is not None:
        out += b
    if pen is not None and pen.variant == "displacement":
        out -= (pen.mask.values / pen.epsilon) * (u - pen.constraint_value)
    return out


def _step(
    state: State,
    spec: OperatorSpec,
    cfg: TimeConfig,
    pen: PenalizationConfig | None,
    a_s: np.ndarray | None,
    history: list | None,
) -> tuple[State, int, np.ndarray]:
    """Advance one Newmark-beta step; returns (state, newton updates, a_{s+1})."""
    grid = state.u.grid
    if grid != spec.grid:
        raise GridMismatchError("state grid does not match the operator grid")
    if pen is not None and pen.grid != grid:
        raise GridMismatchError("penalization mask grid does not match the state grid")
    dt = cfg.dt
    beta = cfg.beta
    t_s = state.t
    t_next = (state.step_index + 1) * dt
    u_s = state.u.values
    v_s = state.v.values

    velocity_pen = pen is not None and pen.variant == "velocity"
    if velocity_pen:
        chi = pen.mask.values / pen.epsilon
        den = 1.0 + 0.5 * dt * chi

        def accel_s():
            out = apply_spectral_values(u_s, spec)
            b = _forcing_values(spec, grid, t_s)
            if b is not None:
                out += b
            return out - chi * v_s

        a0 = accel_s() if a_s is None else a_s

        def lop(w):
            out = apply_spectral_values(w, spec)
            b = _forcing_values(spec, grid, t_next)
            if b is not None:
                out += b
            return out

        if beta == 0.0:
            u_next = u_s + dt * v_s + 0.5 * dt * dt * a0
            l1 = lop(u_next)
            v_next = (v_s + 0.5 * dt * (a0 + l1)) / den
            a1 = l1 - chi * v_next
            new = State(Field(grid, u_next), Field(grid, v_next), t_next, state.step_index + 1)
            return new, 0, a1

        rhs = u_s + dt * v_s + dt * dt * (0.5 - beta) * a0
        bdt2 = beta * dt * dt

        def residual(w: Field) -> Field:
            lw = lop(w.values)
            v1 = (v_s + 0.5 * dt * (a0 + lw)) / den
            return Field(grid, w.values - rhs - bdt2 * (lw - chi * v1))

        def jac_at(w: Field):
            wv = w.values

            def solve(jac_unused, rhs_f: Field) -> Field:
                # J = I - bdt2 * DL / den; solve via the SPD form
                # (den I - bdt2 DL) x = den * rhs
                def m_apply(x: Field) -> Field:
                    return Field(grid, den * x.values - bdt2 * jvp_values(wv, x.values, spec))

                return cg_solve(
                    m_apply, Field(grid, den * rhs_f.values), cfg.krylov_tol, cfg.krylov_max_iter
                )

            return solve

        guess = Field(grid, u_s + dt * v_s + 0.5 * dt * dt * a0)
        hist: list = [] if history is None else history

        # jvp_at is folded into the custom linear solver; pass it through
        def jvp_provider(w: Field):
            return jac_at(w)

        u_sol = newton_solve(
            residual,
            guess,
            jvp_provider,
            tol=cfg.newton_tol,
            max_iter=cfg.newton_max_iter,
            krylov_tol=cfg.krylov_tol,
            krylov_max_iter=cfg.krylov_max_iter,
            residual_history=hist,
            linear_solver=lambda jac, rhs_f: jac(None, rhs_f),
        )
        l1 = lop(u_sol.values)
        v_next = (v_s + 0.5 * dt * (a0 + l1)) / den
        a1 = l1 - chi * v_next
        new = State(u_sol, Field(grid, v_next), t_next, state.step_index + 1)
        return new, len(hist) - 1, a1

    # displacement penalization (linear in u, treated implicitly) or none
    a0 = _accel(u_s, t_s, spec, pen) if a_s is None else a_s
    pen_chi = None if pen is None else pen.mask.values / pen.epsilon

    if beta == 0.0:
        u_next = u_s + dt * v_s + 0.5 * dt * dt * a0
        a1 = _accel(u_next, t_next, spec, pen)
        v_next = v_s + 0.5 * dt * (a0 + a1)
        new = State(Field(grid, u_next), Field(grid, v_next), t_next, state.step_index + 1)
        return new, 0, a1

    rhs = u_s + dt * v_s + dt * dt * (0.5 - beta) * a0
    bdt2 = beta * dt * dt
    a_last: dict = {}

    def residual(w: Field) -> Field:
        aw = _accel(w.values, t_next, spec, pen)
        a_last["a"] = aw
        a_last["u"] = w
        return Field(grid, w.values - rhs - bdt2 * aw)

    def jvp_provider(w: Field):
        wv = w.values

        def action(h: Field) -> Field:
            out = h.values - bdt2 * jvp_values(wv, h.values, spec)
            if pen_chi is not None:
                out += bdt2 * pen_chi * h.values
            return Field(grid, out)

        return action

    guess = Field(grid, u_s + dt * v_s + 0.5 * dt * dt * a0)
    hist = [] if history is None else history
    u_sol = newton_solve(
        residual,
        guess,
        jvp_provider,
        tol=cfg.newton_tol,
        max_iter=cfg.newton_max_iter,
        krylov_tol=cfg.krylov_tol,
        krylov_max_iter=cfg.krylov_max_iter,
        residual_history=hist,
    )
    a1 = a_last["a"] if a_last.get("u") is u_sol else _accel(u_sol.values, t_next, spec, pen)
    v_next = v_s + 0.5 * dt * (a0 + a1)
    new = State(u_sol, Field(grid, v_next), t_next, state.step_index + 1)
    return new, len(hist) - 1, a1


def newmark_step(
    state: State,
    spec: OperatorSpec,
    cfg: TimeConfig,
    penalization: PenalizationConfig | None = None,
) -> State:
    """One Newmark-beta step; implicit solve for ``beta > 0``."""
    new, _, _ = _step(state, spec, cfg, penalization, None, None)
    return new


def stormer_verlet_step(
    state: State,
    spec: OperatorSpec,
    cfg: TimeConfig,
    penalization: PenalizationConfig | None = None,
) -> State:
    """One explicit Stormer-Verlet step (kick-drift-kick arrangement)."""
    grid = state.u.grid
    if grid != spec.grid:
        raise GridMismatchError("state grid does not match the operator grid")
    dt = cfg.dt
    t_next = (state.step_index + 1) * cfg.dt
    pen = penalization
    velocity_pen = pen is not None and pen.variant == "velocity"
    if velocity_pen:
        chi = pen.mask.values / pen.epsilon
        l0 = apply_spectral_values(state.u.values, spec)
        b = _forcing_values(spec, grid, state.t)
        if b is not None:
            l0 += b
        a0 = l0 - chi * state.v.values
        v_half = state.v.values + 0.5 * dt * a0
        u_next = state.u.values + dt * v_half
        l1 = apply_spectral_values(u_next, spec)
        b = _forcing_values(spec, grid, t_next)
        if b is not None:
            l1 += b
        v_next = (v_half + 0.5 * dt * l1) / (1.0 + 0.5 * dt * chi)
    else:
        a0 = _accel(state.u.values, state.t, spec, pen)
        v_half = state.v.values + 0.5 * dt * a0
        u_next = state.u.values + dt * v_half
        a1 = _accel(u_next, t_next, spec, pen)
        v_next = v_half + 0.5 * dt * a1
    return State(Field(grid, u_next), Field(grid, v_next), t_next, state.step_index + 1)


def _snapshot_indices(snapshot_times, cfg: TimeConfig) -> list[int]:
    n = cfg.n_steps
    indices = set()
    for t in snapshot_times:
        if t < -1e-12 or t > cfg.t_final + 1e-12:
            raise ValidationError(f"snapshot time {t} outside [0, {cfg.t_final}]")
        idx = int(round(t / cfg.dt))
        if abs(idx * cfg.dt - t) > cfg.dt / 2 + 1e-12 or idx > n:
            raise ValidationError(f"snapshot time {t} is not within dt/2 of a step time")
        indices.add(idx)
    return sorted(indices)


def integrate(
    ic: State,
    spec: OperatorSpec,
    cfg: TimeConfig,
    snapshot_times=(),
    penalization: PenalizationConfig | None = None,
    *,
    method: str = "newmark",
    observer=None,
) -> IntegrationResult:
    """March the initial state to ``t_final``, emitting requested snapshots.

    ``method`` is ``"newmark"`` or ``"stormer_verlet"``. Snapshots are taken
    at the step nearest each requested time (which must lie within ``dt/2``
    of one); the final state is always included. ``observer`` is called with
    every state, including the initial one. Deterministic given its inputs;
    a non-finite field aborts with the offending step index.
    """
    if method not in ("newmark", "stormer_verlet"):
        raise ValidationError(f"unknown method {method!r}")
    if abs(ic.t - ic.step_index * cfg.dt) > 1e-12:
        raise ValidationError("initial state time is not step_index * dt")
    n_steps = cfg.n_steps
    snap = _snapshot_indices(snapshot_times, cfg)
    snap_set = set(snap)
    states: list[State] = []
    newton_counts: list[int] = []
    wall: list[float] = []
    state = ic
    if observer is not None:
        observer(state)
    if 0 in snap_set:
        states.append(state)
    a_cache: np.ndarray | None = None
    for s in range(n_steps):
        t0 = _time.perf_counter()
        try:
            if method == "newmark":
                hist: list = []
                state, iters, a_cache = _step(state, spec, cfg, penalization, a_cache, hist)
            else:
                state = stormer_verlet_step(state, spec, cfg, penalization)
                iters = 0
        except NonFiniteFieldError as exc:
            raise NonFiniteFieldError(
                f"non-finite field at step {s + 1} (t = {(s + 1) * cfg.dt:g}): {exc}"
            ) from exc
        wall.append(_time.perf_counter() - t0)
        newton_counts.append(iters)
        if observer is not None:
            observer(state)
        if state.step_index in snap_set:
            states.append(state)
    if not states or states[-1].step_index != state.step_index:
        states.append(state)
    return IntegrationResult(states, newton_counts, wall)
