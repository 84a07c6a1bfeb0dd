import numpy as np
import pytest

from scma_vlc import (
    DesignConfig,
    SystemParams,
    design,
    power,
    project_feasible,
    random_init,
)
from scma_vlc.designer import inner_solve
from scma_vlc.metrics import logsumexp_objective, stack_codebook_set

PARAMS = SystemParams(J=3, sigma2=0.01, varsigma2=5.0, Pe=30.0)

# Small configuration for fast structural tests; quality is covered by the
# acceptance suite with the default configuration.
FAST = DesignConfig(
    beta_schedule=(1.0, 5.0, 10.0), starts=2, max_inner_iters=3, inner_tol=1e-3
)


def template(params=PARAMS):
    from scma_vlc.model import codebook_set_from_constellations

    placeholder = codebook_set_from_constellations(
        params, [np.ones((params.N, params.M)) for _ in range(params.J)]
    )
    return stack_codebook_set(placeholder)


class TestDesignConfig:
    def test_schedule_must_increase(self):
        with pytest.raises(ValueError):
            DesignConfig(beta_schedule=(1.0, 1.0, 2.0))

    def test_starts_positive(self):
        with pytest.raises(ValueError):
            DesignConfig(starts=0)

    def test_defaults(self):
        cfg = DesignConfig()
        assert cfg.beta_schedule == tuple(float(b) for b in range(1, 31))
        assert cfg.inner_tol == 1e-3
        assert cfg.starts == 8
        assert cfg.epsilon_floor == 0.01
        assert cfg.max_inner_iters == 500


class TestProjectFeasible:
    def test_feasible_unchanged(self):
        t = template()
        x = t.replace(np.full_like(t.L, 1.5))
        out = project_feasible(x, PARAMS, 0.01)
        np.testing.assert_array_equal(out.L, x.L)

    def test_power_rescale(self):
        t = template()
        # All entries equal v: per-user power = N*M*v^2/M = 2 v^2.
        v = np.sqrt(4 * PARAMS.Pe / 2.0)  # power = 4 Pe
        out = project_feasible(t.replace(np.full_like(t.L, v)), PARAMS, 0.01)
        np.testing.assert_allclose(out.L, v / 2.0)

    def test_clamp(self):
        t = template()
        L = np.full_like(t.L, 1.0)
        L[0] = -0.5
        out = project_feasible(t.replace(L), PARAMS, 0.01)
        assert out.L[0] == 0.01

    def test_per_user_blocks_independent(self):
        t = template()
        L = np.full_like(t.L, 1.0)
        L[:8] = 10.0  # user 1 over budget (power 200), others fine
        out = project_feasible(t.replace(L), PARAMS, 0.01)
        assert np.all(out.L[:8] < 10.0)
        np.testing.assert_array_equal(out.L[8:], 1.0)


class TestRandomInit:
    def test_deterministic(self):
        t = template()
        a = random_init(PARAMS, 5, 0.01, t)
        b = random_init(PARAMS, 5, 0.01, t)
        np.testing.assert_array_equal(a.L, b.L)

    def test_seeds_differ(self):
        t = template()
        a = random_init(PARAMS, 0, 0.01, t)
        b = random_init(PARAMS, 1, 0.01, t)
        assert np.any(a.L != b.L)

    def test_feasible(self):
        t = template()
        for seed in range(10):
            x = random_init(PARAMS, seed, 0.01, t)
            assert np.all(x.L >= 0.01)
            for j in range(PARAMS.J):
                block = x.L[j * 8 : (j + 1) * 8]
                assert np.sum(block * block) / PARAMS.M <= PARAMS.Pe + 1e-9


class TestInnerSolve:
    def test_no_ascent(self):
        t = template()
        for seed in range(5):
            x0 = random_init(PARAMS, seed, 0.01, t)
            f0 = logsumexp_objective(x0, 10.0, PARAMS.varsigma2)
            f, _ = inner_solve(x0, 10.0, PARAMS, FAST)
            assert f <= f0 + 1e-12

    def test_descends_from_random_starts(self):
        t = template()
        improved = 0
        for seed in range(20):
            x0 = random_init(PARAMS, 100 + seed, 0.01, t)
            f0 = logsumexp_objective(x0, 10.0, PARAMS.varsigma2)
            f, _ = inner_solve(x0, 10.0, PARAMS, FAST)
            improved += f < f0
        assert improved >= 19

    def test_feasible_output(self):
        t = template()
        x0 = random_init(PARAMS, 2, 0.01, t)
        _, x = inner_solve(x0, 10.0, PARAMS, FAST)
        # The power rescale after clamping can dip entries a hair under the
        # floor; design() repairs that at the end. Entries stay positive and
        # within a floor-sized neighborhood, and power stays capped.
        assert np.all(x.L >= 0.01 * (1.0 - 0.05))
        for j in range(PARAMS.J):
            block = x.L[j * 8 : (j + 1) * 8]
            assert np.sum(block * block) / PARAMS.M <= PARAMS.Pe + 1e-9


class TestDesign:
    def test_deterministic(self):
        r1 = design(PARAMS, FAST)
        r2 = design(PARAMS, FAST)
        assert r1.final_d_min == r2.final_d_min
        for b1, b2 in zip(r1.set.books, r2.set.books):
            np.testing.assert_array_equal(b1.C, b2.C)

    def test_feasible_result(self):
        r = design(PARAMS, FAST)
        for book in r.set.books:
            assert np.all(book.C >= 0.01 - 1e-12)
            assert power(book) <= PARAMS.Pe + 1e-6

    def test_trace_covers_all_starts_and_betas(self):
        r = design(PARAMS, FAST)
        starts = {t[0] for t in r.objective_trace}
        betas = {t[1] for t in r.objective_trace}
        assert starts == {0, 1}
        assert betas == {1.0, 5.0, 10.0}

    def test_final_stage_trace_monotone(self):
        r = design(PARAMS, FAST)
        beta_max = FAST.beta_schedule[-1]
        for s in range(FAST.starts):
            fs = [t[3] for t in r.objective_trace if t[0] == s and t[1] == beta_max]
            assert all(b <= a + 1e-12 for a, b in zip(fs, fs[1:]))

    def test_active_constraints_reported(self):
        r = design(PARAMS, FAST)
        assert set(r.active_constraints) == {"power_tight_users", "floor_tight_entries"}

    def test_seed_changes_result(self):
        r1 = design(PARAMS, FAST)
        r2 = design(PARAMS, DesignConfig(
            beta_schedule=FAST.beta_schedule, starts=2, max_inner_iters=3, seed=99
        ))
        assert np.any(r1.set.books[0].C != r2.set.books[0].C)

    def test_wall_time_positive(self):
        r = design(PARAMS, FAST)
        assert r.wall_time > 0
