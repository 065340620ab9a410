import numpy as np
import pytest
from numpy.testing import assert_allclose

from tomonet.estimators import (
    EstimatorReport,
    SolverOptions,
    constrained_ls,
    linear_inversion,
    log_likelihood,
    mle,
    project_simplex,
    psd_simplex_projection,
)
from tomonet.measurement import (
    Povm,
    born_probabilities,
    measurement_matrix,
    random_srm,
    sample_frequencies,
)
from tomonet.qcore import (
    assert_density_matrix,
    from_bloch,
    hermitize,
    hs_distance,
    positivize,
    purity,
    random_density_ginibre,
    random_haar_pure,
    to_bloch,
)


class TestLinearInversion:
    def test_exact_probabilities_recover_state(self, srm3, basis3):
        rng = np.random.default_rng(2)
        cmat = measurement_matrix(srm3, basis3)
        for _ in range(10):
            rho = random_density_ginibre(3, rng)
            r = linear_inversion(born_probabilities(rho, srm3), cmat)
            assert hs_distance(from_bloch(r, basis3), rho) < 1e-10

    def test_accepts_frequency_vector(self, srm3, basis3):
        rng = np.random.default_rng(3)
        cmat = measurement_matrix(srm3, basis3)
        p = born_probabilities(random_density_ginibre(3, rng), srm3)
        f = sample_frequencies(p, 100, rng)
        assert np.array_equal(linear_inversion(f, cmat), linear_inversion(f.values, cmat))

    def test_shape_mismatch(self, srm3, basis3):
        cmat = measurement_matrix(srm3, basis3)
        with pytest.raises(ValueError, match="frequencies"):
            linear_inversion(np.zeros(4), cmat)


class TestSimplexProjection:
    def test_known_spectrum(self):
        """diag(1.5, -0.5) projects to diag(1, 0): shift by 0.5, clip."""
        assert_allclose(psd_simplex_projection(np.diag([1.5, -0.5]).astype(complex)),
                        np.diag([1.0, 0.0]), atol=1e-12)

    def test_vector_projection_properties(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            v = rng.standard_normal(6) * 3
            p = project_simplex(v)
            assert p.min() >= 0.0
            assert p.sum() == pytest.approx(1.0, abs=1e-12)
            assert_allclose(project_simplex(p), p, atol=1e-12)

    def test_matrix_output_is_density(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            h = hermitize(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
            assert_density_matrix(psd_simplex_projection(h))

    def test_projection_is_nearest(self):
        """No random density matrix beats the projection in Frobenius distance."""
        rng = np.random.default_rng(9)
        h = hermitize(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
        proj = psd_simplex_projection(h)
        best = hs_distance(h, proj)
        for _ in range(10_000):
            assert best <= hs_distance(h, random_density_ginibre(3, rng)) + 1e-12


class TestConstrainedLs:
    def test_interior_realizable_frequencies_recovered(self, srm3, basis3):
        rng = np.random.default_rng(11)
        cmat = measurement_matrix(srm3, basis3)
        for _ in range(5):
            rho = random_density_ginibre(3, rng)
            rep = constrained_ls(born_probabilities(rho, srm3), cmat, basis3)
            assert rep.converged
            assert hs_distance(rep.estimate, rho) < 1e-6

    def test_beats_positivized_inversion(self, srm3, basis3):
        """The solver never does worse than clipping the inversion output."""
        rng = np.random.default_rng(12)
        cmat = measurement_matrix(srm3, basis3)
        for _ in range(100):
            p = born_probabilities(random_density_ginibre(3, rng), srm3)
            f = sample_frequencies(p, 50, rng).values
            rep = constrained_ls(f, cmat, basis3)
            assert_density_matrix(rep.estimate)
            clipped = positivize(from_bloch(linear_inversion(f, cmat), basis3))
            baseline = np.linalg.norm(cmat @ to_bloch(clipped, basis3) - f)
            assert rep.objective_trace[-1] <= baseline + 1e-12

    def test_objective_trace_non_increasing(self, srm3, basis3):
        rng = np.random.default_rng(13)
        cmat = measurement_matrix(srm3, basis3)
        p = born_probabilities(random_density_ginibre(3, rng), srm3)
        f = sample_frequencies(p, 30, rng).values
        rep = constrained_ls(f, cmat, basis3)
        diffs = np.diff(rep.objective_trace)
        assert np.all(diffs <= 1e-12)

    def test_infeasible_inversion_lands_on_boundary(self, basis2):
        """Frequencies whose least-squares state falls outside the state set
        are matched by a pure state on the boundary."""
        rng = np.random.default_rng(14)
        povm = random_srm(2, rng)
        cmat = measurement_matrix(povm, basis2)
        radius = 1.0 / np.sqrt(2.0)
        found = 0
        attempt = 0
        while found < 5 and attempt < 500:
            attempt += 1
            ket = random_haar_pure(2, rng)
            rho = 0.95 * np.outer(ket, ket.conj()) + 0.05 * np.eye(2) / 2
            f = sample_frequencies(born_probabilities(rho, povm), 8, rng).values
            r_li = linear_inversion(f, cmat)
            if np.linalg.norm(r_li[1:]) <= radius:
                continue
            # The boundary is active only when the trace-fixed least-squares
            # optimum also lies outside the ball.
            slice_min = np.linalg.lstsq(cmat[:, 1:], f - cmat[:, 0] * radius, rcond=None)[0]
            if np.linalg.norm(slice_min) <= radius:
                continue
            found += 1
            rep = constrained_ls(f, cmat, basis2)
            assert_density_matrix(rep.estimate)
            assert purity(rep.estimate) == pytest.approx(1.0, abs=1e-6)
        assert found == 5

    def test_iteration_cap(self, srm3, basis3):
        rng = np.random.default_rng(15)
        cmat = measurement_matrix(srm3, basis3)
        p = born_probabilities(random_density_ginibre(3, rng), srm3)
        f = sample_frequencies(p, 20, rng).values
        rep = constrained_ls(f, cmat, basis3, SolverOptions(max_iter=3, tol=1e-30))
        assert rep.iterations == 3
        assert not rep.converged


class TestLogLikelihood:
    def test_formula(self):
        f = np.array([0.5, 0.5, 0.0])
        p = np.array([0.25, 0.5, 0.25])
        assert log_likelihood(f, p) == pytest.approx(0.5 * np.log(0.25) + 0.5 * np.log(0.5))

    def test_zero_frequency_ignores_zero_probability(self):
        assert np.isfinite(log_likelihood(np.array([1.0, 0.0]), np.array([0.5, 0.0])))

    def test_floor_keeps_value_finite(self):
        assert log_likelihood(np.array([1.0]), np.array([0.0])) == pytest.approx(np.log(1e-300))

    def test_simplex_grid_maximum_at_frequencies(self):
        """Over a 0.01-resolution grid on the 3-outcome simplex the
        log-likelihood peaks at p = f."""
        f = np.array([0.5, 0.3, 0.2])
        best, arg = -np.inf, None
        for i in range(101):
            for j in range(101 - i):
                p = np.array([i / 100, j / 100, (100 - i - j) / 100])
                val = log_likelihood(f, p)
                if val > best:
                    best, arg = val, p
        assert_allclose(arg, f, atol=1e-9)


class TestMle:
    def test_projective_measurement_fixed_point(self):
        """For basis projectors R is diagonal and diag(f) maps to itself."""
        elems = np.stack([np.diag([1.0, 0, 0]), np.diag([0, 1.0, 0]), np.diag([0, 0, 1.0])]).astype(complex)
        povm = Povm(elems).validate()
        f = np.array([0.5, 0.3, 0.2])
        rep = mle(f, povm, SolverOptions(max_iter=100, tol=1e-30), rho0=np.diag(f))
        assert_allclose(rep.estimate, np.diag(f), atol=1e-10)

    def test_loglikelihood_monotone(self, srm3):
        rng = np.random.default_rng(17)
        for _ in range(10):
            p = born_probabilities(random_density_ginibre(3, rng), srm3)
            f = sample_frequencies(p, 1000, rng)
            rep = mle(f, srm3)
            assert np.all(np.diff(rep.objective_trace) >= -1e-12)
            assert_density_matrix(rep.estimate)

    def test_true_state_is_fixed_point(self, srm3):
        """Exact probabilities make R the identity on the state's support."""
        rng = np.random.default_rng(18)
        rho = random_density_ginibre(3, rng)
        p = born_probabilities(rho, srm3)
        rep = mle(p, srm3, SolverOptions(max_iter=100, tol=1e-30), rho0=rho)
        assert hs_distance(rep.estimate, rho) < 1e-10

    def test_iteration_cap(self, srm3):
        rng = np.random.default_rng(19)
        p = born_probabilities(random_density_ginibre(3, rng), srm3)
        f = sample_frequencies(p, 100, rng)
        rep = mle(f, srm3, SolverOptions(max_iter=5, tol=1e-30))
        assert rep.iterations == 5
        assert not rep.converged

    def test_shape_mismatch(self, srm3):
        with pytest.raises(ValueError, match="frequencies"):
            mle(np.zeros(4), srm3)


class TestOptionsAndReport:
    def test_option_validation(self):
        with pytest.raises(ValueError, match="max_iter"):
            SolverOptions(max_iter=0)
        with pytest.raises(ValueError, match="tol"):
            SolverOptions(tol=0.0)
        with pytest.raises(ValueError, match="step_scale"):
            SolverOptions(step_scale=-1.0)

    def test_report_fields(self, srm3, basis3):
        rng = np.random.default_rng(20)
        p = born_probabilities(random_density_ginibre(3, rng), srm3)
        rep = mle(p, srm3)
        assert isinstance(rep, EstimatorReport)
        assert rep.method == "mle"
        assert rep.iterations >= 1
        assert rep.wall_time >= 0.0
