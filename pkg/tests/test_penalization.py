import numpy as np
import pytest

from peridyn.errors import GridMismatchError, ValidationError
from peridyn.grid import Field, build_grid, constant_field
from peridyn.penalization import (
    PenalizationConfig,
    extend_domain,
    interior_window,
    penalized_rhs,
    restrict_to_interior,
)


class TestExtendDomain:
    def test_benchmark_extension_counts(self):
        g = build_grid(0, 1, 100)
        ext, mask = extend_domain(g, 0.2)
        assert ext.n_points == 140
        assert ext.a == pytest.approx(-0.2)
        assert ext.b == pytest.approx(1.2)
        assert ext.dx == pytest.approx(g.dx, rel=1e-14)
        assert mask.values.sum() == 140**2 - 100**2

    def test_mask_zero_on_original_points(self):
        g = build_grid(0, 1, 20)
        ext, mask = extend_domain(g, 0.2)
        w = interior_window(g, ext)
        assert np.all(mask.values[w, w] == 0.0)
        outside = mask.values.copy()
        outside[w, w] = 1.0
        assert np.all(outside == 1.0)

    def test_non_integer_extension_rejected(self):
        g = build_grid(0, 1, 10)
        with pytest.raises(ValidationError):
            extend_domain(g, 0.15)  # 1.5 cells

    def test_zero_cells_rejected(self):
        g = build_grid(0, 1, 10)
        with pytest.raises(ValidationError):
            extend_domain(g, 0.01)

    def test_odd_ladder_grids_extend(self):
        # dx = 0.2 ladder: 5 physical points gain one frame cell per side
        g = build_grid(0, 1, 5)
        ext, mask = extend_domain(g, 0.2)
        assert ext.n_points == 7
        assert mask.values.sum() == 7**2 - 5**2

    def test_restrict_round_trip(self):
        rng = np.random.default_rng(8)
        g = build_grid(0, 1, 10)
        ext, _ = extend_domain(g, 0.2)
        u = Field(ext, rng.standard_normal((ext.n_points, ext.n_points)))
        v = restrict_to_interior(u, g)
        assert v.grid == g
        w = interior_window(g, ext)
        assert np.array_equal(v.values, u.values[w, w])


class TestPenalizedRhs:
    def setup_method(self):
        self.g = build_grid(0, 1, 10)
        self.ext, self.mask = extend_domain(self.g, 0.2)
        self.rng = np.random.default_rng(3)

    def rand(self):
        n = self.ext.n_points
        return Field(self.ext, self.rng.standard_normal((n, n)))

    def test_zero_mask_is_identity(self):
        zero_mask = constant_field(self.ext, 0.0)
        cfg = PenalizationConfig(zero_mask, 0.2)
        u, rhs = self.rand(), self.rand()
        out = penalized_rhs(u, rhs, cfg)
        assert np.array_equal(out.values, rhs.values)

    def test_u_equal_constraint_is_identity(self):
        cfg = PenalizationConfig(self.mask, 0.2, constraint_value=1.5)
        u = constant_field(self.ext, 1.5)
        rhs = self.rand()
        out = penalized_rhs(u, rhs, cfg)
        assert np.array_equal(out.values, rhs.values)

    def test_masked_point_scaled_by_inverse_epsilon(self):
        cfg = PenalizationConfig(self.mask, 0.2)
        u = constant_field(self.ext, 1.0)
        rhs = constant_field(self.ext, 0.0)
        out = penalized_rhs(u, rhs, cfg)
        frame = self.mask.values == 1.0
        assert np.allclose(out.values[frame], -5.0)
        assert np.all(out.values[~frame] == 0.0)

    def test_unchanged_on_physical_domain_for_any_input(self):
        cfg = PenalizationConfig(self.mask, 0.037)
        w = interior_window(self.g, self.ext)
        for _ in range(5):
            u, rhs = self.rand(), self.rand()
            out = penalized_rhs(u, rhs, cfg)
            assert np.array_equal(out.values[w, w], rhs.values[w, w])

    def test_grid_mismatch(self):
        cfg = PenalizationConfig(self.mask, 0.2)
        u = constant_field(self.g, 1.0)
        with pytest.raises(GridMismatchError):
            penalized_rhs(u, u, cfg)


class TestPenalizationConfig:
    def test_non_binary_mask_rejected(self):
        g = build_grid(0, 1, 8)
        with pytest.raises(ValidationError):
            PenalizationConfig(constant_field(g, 0.5), 0.2)

    def test_nonpositive_epsilon_rejected(self):
        g = build_grid(0, 1, 8)
        with pytest.raises(ValidationError):
            PenalizationConfig(constant_field(g, 1.0), 0.0)

    def test_unknown_variant_rejected(self):
        g = build_grid(0, 1, 8)
        with pytest.raises(ValidationError):
            PenalizationConfig(constant_field(g, 1.0), 0.2, variant="pressure")


class TestPenalizedDynamics:
    def test_displacement_variant_pulls_frame_toward_constraint(self):
        from peridyn.experiments import (
            PenalizationSettings,
            run_benchmark,
            smooth_benchmark,
        )

        prep, res = run_benchmark(
            smooth_benchmark(),
            10,
            0.05,
            2.0,
            pen_settings=PenalizationSettings(mu=0.2, epsilon=0.05),
        )
        frame = prep.penalization.mask.values == 1.0
        u0 = prep.initial.u.values
        uT = res.final.u.values
        assert np.mean(np.abs(uT[frame])) < np.mean(np.abs(u0[frame]))

    def test_velocity_variant_one_step_hand_solution(self):
        # zero kernel isolates the damping: on the frame a = -(chi/eps) v
        # and the implicit velocity update solves (1 + dt chi / 2 eps) v1 =
        # v0 + dt/2 a0 pointwise; off the frame it is free motion
        from peridyn.integrators import State, TimeConfig, newmark_step
        from peridyn.operator import OperatorSpec
        from peridyn.spectral import build_kernel

        g = build_grid(0, 1, 10)
        ext, mask = extend_domain(g, 0.2)
        kernel = build_kernel(
            lambda x1, x2: np.zeros_like(np.asarray(x1, dtype=float)), 0.3, ext
        )
        spec = OperatorSpec(kernel, r=3)
        pen = PenalizationConfig(mask, 0.1, variant="velocity")
        dt, eps = 0.2, 0.1
        u0 = constant_field(ext, 2.0)
        v0 = constant_field(ext, 1.0)
        new = newmark_step(State(u0, v0, 0.0, 0), spec, TimeConfig(dt, 1.0, beta=0.25), pen)
        chi = mask.values / eps
        a0 = -chi * v0.values
        den = 1.0 + 0.5 * dt * chi
        v1 = (v0.values + 0.5 * dt * a0) / den
        a1 = -chi * v1
        u1 = u0.values + dt * v0.values + dt * dt * (0.25 * a0 + 0.25 * a1)
        assert np.max(np.abs(new.v.values - v1)) <= 1e-12
        assert np.max(np.abs(new.u.values - u1)) <= 1e-12

    def test_velocity_variant_beta0_matches_implicit_limit(self):
        # explicit and implicit paths agree to O(dt^2) on a short run
        from peridyn.experiments import (
            PenalizationSettings,
            run_benchmark,
            smooth_benchmark,
        )

        pen = PenalizationSettings(mu=0.2, epsilon=0.5, variant="velocity")
        _, ra = run_benchmark(smooth_benchmark(), 10, 0.01, 0.5, pen_settings=pen, beta=0.0)
        _, rb = run_benchmark(smooth_benchmark(), 10, 0.01, 0.5, pen_settings=pen, beta=0.25)
        gap = np.max(np.abs(ra.final.u.values - rb.final.u.values))
        assert gap < 1e-5
