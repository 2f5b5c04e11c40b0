import numpy as np
import pytest

from framesync.cyclostat import (
    DcdFrame,
    ModelConsistencyError,
    NoiseModel,
    analytic_autocorrelation,
    dcd_decompose,
    dcd_reconstruct,
    generate_acgn,
    noise_cov_matrix,
)


def white_model(sigma2=1.0):
    return NoiseModel(
        period=1, memory=0, variance_profile=np.array([sigma2]),
        shaping_fir=np.array([1.0]),
    )


# ---------------------------------------------------------------------------
# decimated components
# ---------------------------------------------------------------------------


def test_dcd_single_component_is_identity(rng):
    x = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    frame = dcd_decompose(x, 1)
    assert frame.components.shape == (1, 8)
    np.testing.assert_array_equal(frame.components[0], x)


@pytest.mark.parametrize("n0", [1, 2, 3, 4, 6, 12])
def test_dcd_round_trip_exact(rng, n0):
    x = rng.standard_normal(24) + 1j * rng.standard_normal(24)
    np.testing.assert_array_equal(dcd_reconstruct(dcd_decompose(x, n0)), x)


def test_dcd_length_mismatch_rejected(rng):
    with pytest.raises(ValueError, match="multiple"):
        dcd_decompose(np.ones(7), 2)


def test_dcd_component_ordering():
    frame = DcdFrame(base_period=2, components=np.array([[1.0 + 0j], [2.0 + 0j]]))
    np.testing.assert_array_equal(dcd_reconstruct(frame), [1.0, 2.0])


def test_dcd_ragged_components_rejected():
    with pytest.raises(ValueError):
        DcdFrame(base_period=2, components=np.array([[1.0], [2.0, 3.0]], dtype=object))


def test_dcd_reconstruct_idempotent_through_decompose(rng):
    for _ in range(20):
        comps = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
        frame = DcdFrame(base_period=3, components=comps)
        x = dcd_reconstruct(frame)
        np.testing.assert_array_equal(dcd_reconstruct(dcd_decompose(x, 3)), x)


def test_dcd_makes_period2_process_stationary(rng):
    # cyclostationary source: white noise with alternating variance
    model = NoiseModel(
        period=2, memory=0, variance_profile=np.array([1.0, 4.0]),
        shaping_fir=np.array([1.0]),
    )
    n_trials, n_vec = 100_000, 4
    acc = np.zeros((n_vec - 1, 2, 2), dtype=complex)
    for _ in range(n_trials):
        z = generate_acgn(model, 2 * n_vec, rng)
        comps = dcd_decompose(z, 2).components  # (2, n_vec)
        for n in range(n_vec - 1):
            acc[n] += np.outer(comps[:, n + 1], comps[:, n].conj())
    lag1 = acc / n_trials
    # E{R[n+1] R[n]^H} must not depend on n: compare two positions at 5 sigma
    se = 5.0 * 4.0 / np.sqrt(n_trials)
    assert np.max(np.abs(lag1[0] - lag1[1])) < se
    assert np.max(np.abs(lag1[1] - lag1[2])) < se


# ---------------------------------------------------------------------------
# noise generation
# ---------------------------------------------------------------------------


def test_white_noise_moments(rng):
    model = white_model()
    n_trials = 100_000
    z = np.array([generate_acgn(model, 2, rng) for _ in range(n_trials)])
    tol = 5.0 / np.sqrt(n_trials)
    assert abs(np.mean(z[:, 0] * z[:, 0])) < tol          # pseudo-autocorrelation
    assert abs(np.mean(np.abs(z[:, 0]) ** 2) - 1.0) < tol
    assert abs(np.mean(z[:, 1] * z[:, 0].conj())) < tol   # lag-1 correlation


def test_scenario2_empirical_autocorrelation_matches_analytic(scenario2, rng):
    model = scenario2.noise
    n_trials = 60_000
    length = model.period + model.memory
    acc = np.zeros((model.period, model.memory + 1), dtype=complex)
    for _ in range(n_trials):
        z = generate_acgn(model, length, rng)
        for lag in range(model.memory + 1):
            acc[:, lag] += z[lag : lag + model.period] * z[: model.period].conj()
    emp = acc / n_trials
    for m in range(model.period):
        for lag in range(model.memory + 1):
            ana = analytic_autocorrelation(model, m, lag)
            power = np.sqrt(
                analytic_autocorrelation(model, m + lag, 0).real
                * analytic_autocorrelation(model, m, 0).real
            )
            assert abs(emp[m, lag] - ana) < 5.0 * power / np.sqrt(n_trials)


@pytest.mark.parametrize("scenario_name", ["scenario1", "scenario2"])
def test_generated_noise_is_proper(scenario_name, scenario1, scenario2, rng):
    model = {"scenario1": scenario1, "scenario2": scenario2}[scenario_name].noise
    n_trials = 50_000
    length = model.period + model.memory
    acc = np.zeros((model.period, model.memory + 1), dtype=complex)
    for _ in range(n_trials):
        z = generate_acgn(model, length, rng)
        for lag in range(model.memory + 1):
            acc[:, lag] += z[lag : lag + model.period] * z[: model.period]
    pseudo = acc / n_trials
    for m in range(model.period):
        for lag in range(model.memory + 1):
            power = np.sqrt(
                analytic_autocorrelation(model, m + lag, 0).real
                * analytic_autocorrelation(model, m, 0).real
            )
            assert abs(pseudo[m, lag]) < 5.0 * power / np.sqrt(n_trials)


def test_generate_acgn_start_time_sets_profile_phase(rng):
    model = NoiseModel(
        period=4, memory=0, variance_profile=np.array([1.0, 100.0, 1.0, 1.0]),
        shaping_fir=np.array([1.0]),
    )
    n = 20_000
    z = np.array([generate_acgn(model, 1, rng, start_time=1)[0] for _ in range(n)])
    assert abs(np.mean(np.abs(z) ** 2) - 100.0) < 5.0 * 100.0 / np.sqrt(n)


# ---------------------------------------------------------------------------
# analytic autocorrelation
# ---------------------------------------------------------------------------


def test_white_autocorrelation():
    model = white_model()
    assert analytic_autocorrelation(model, 3, 0) == 1.0
    assert analytic_autocorrelation(model, 3, 1) == 0.0


def test_scenario1_fitted_fir_induces_published_correlation(scenario1):
    model = scenario1.noise
    expected = {0: 1.0, 1: 0.5, 2: 0.3, -1: 0.5, -2: 0.3}
    for lag, value in expected.items():
        for m in range(3):
            assert analytic_autocorrelation(model, m, lag) == pytest.approx(
                value, abs=1e-9
            )


def test_scenario2_autocorrelation_matches_bruteforce_sum(scenario2):
    model = scenario2.noise
    h, prof, p = model.shaping_fir, model.variance_profile, model.period

    def brute(m, lag):
        total = 0.0
        for k in range(len(h)):
            kl = k + lag
            if 0 <= kl < len(h):
                total += h[k] * prof[(m - k) % p] * h[kl]
        return total

    for m in range(p):
        for lag in range(-3, 4):
            assert analytic_autocorrelation(model, m, lag) == pytest.approx(
                brute(m, lag), abs=1e-12
            )


def test_autocorrelation_periodicity_support_and_symmetry(scenario2):
    model = scenario2.noise
    for m in range(-3, 12):
        for lag in range(-4, 5):
            c = analytic_autocorrelation(model, m, lag)
            assert c == analytic_autocorrelation(model, m + model.period, lag)
            assert np.conj(
                analytic_autocorrelation(model, m + lag, -lag)
            ) == pytest.approx(c, abs=1e-14)
            if abs(lag) > model.memory:
                assert c == 0.0


# ---------------------------------------------------------------------------
# covariance matrix
# ---------------------------------------------------------------------------


def test_white_covariance_is_scaled_identity():
    cov = noise_cov_matrix(white_model(2.5), 3, 4)
    np.testing.assert_allclose(cov, 2.5 * np.eye(3))


def test_scenario1_covariance_is_banded_toeplitz(scenario1):
    model = scenario1.noise.scaled(2.0)
    cov = noise_cov_matrix(model, 6, 8)
    expected = np.zeros((6, 6))
    for i in range(6):
        for j in range(6):
            lag = abs(i - j)
            if lag <= 2:
                expected[i, j] = 2.0 * {0: 1.0, 1: 0.5, 2: 0.3}[lag]
    np.testing.assert_allclose(cov, expected, atol=1e-9)


def test_scenario2_covariance_matches_index_map(scenario2):
    model = scenario2.noise
    cov = noise_cov_matrix(model, 6, 8)
    for a1 in range(6):
        for a2 in range(6):
            assert cov[a1, a2] == analytic_autocorrelation(model, -a2, a2 - a1)
    assert np.min(np.linalg.eigvalsh(cov)) >= -1e-10


def test_covariance_requires_block_multiple_of_period(scenario2):
    with pytest.raises(ValueError, match="multiple"):
        noise_cov_matrix(scenario2.noise, 4, 7)


def test_model_validation_errors():
    with pytest.raises(ValueError, match="strictly positive"):
        NoiseModel(period=1, memory=0, variance_profile=np.array([0.0]),
                   shaping_fir=np.array([1.0]))
    with pytest.raises(ValueError, match="nonzero"):
        NoiseModel(period=1, memory=1, variance_profile=np.array([1.0]),
                   shaping_fir=np.array([0.0, 1.0]))
