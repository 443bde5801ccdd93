__copyright__ = """
Copyright (C) 2024 The floqmet developers
"""

__license__ = """
Permission is hereby granted, free of charge, to any person obtaining a copy
of this software and associated documentation files (the "Software"), to deal
in the Software without restriction, including without limitation the rights
to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
copies of the Software, and to permit persons to whom the Software is
furnished to do so, subject to the following conditions:

The above copyright notice and this permission notice shall be included in
all copies or substantial portions of the Software.

THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN
THE SOFTWARE.
"""

import logging

import numpy as np
import pytest
from scipy.special import comb

from floqmet.asymptotics import markovian_qfi, y_n
from floqmet.dynamics import AmplitudeTrajectory, markovian_trajectory
from floqmet.model import MarkovianModel
from floqmet.qfi import (
    QfiResult,
    brute_force_qfi,
    ghz_density_matrix,
    population_derivative,
    qfi_f1,
    qfi_f2,
    qfi_series,
    steady_state_eigensystem,
    y_n_from_eigensystem,
)
from floqmet.simutil import SizeError

logger = logging.getLogger(__name__)


def binomial_f2(p, dp, N):
    """Population-block QFI summed term by term."""
    total = 0.0
    for m in range(1, N):
        prob = comb(N, m)*p**m*(1 - p)**(N - m)
        dprob = comb(N, m)*(m*p**(m-1)*(1 - p)**(N - m)
                            - (N - m)*p**m*(1 - p)**(N - m - 1))*dp
        total += dprob**2/(2*prob)
    return total


def random_amplitudes(rng, count):
    modulus = rng.uniform(0.05, 0.95, count)
    c = modulus*np.exp(1j*rng.uniform(0, 2*np.pi, count))
    dc = rng.normal(size=count) + 1j*rng.normal(size=count)
    return c, dc


def test_f2_special_cases():
    assert qfi_f2(0.4, 0.3, 1) == 0
    assert qfi_f2(0.4, 0.0, 5) == 0
    assert np.all(qfi_f2(np.array([0.0, 1.0]), np.array([0.0, 0.0]), 4) == 0)


@pytest.mark.parametrize(("p", "dp", "N"), [
    (0.6, 0.2, 3),
    (0.3, -1.5, 7),
    (0.9, 0.05, 20),
    (0.5, 0.4, 40),
    (0.8, 0.1, 60),
])
def test_f2_matches_binomial_sum(p, dp, N):
    """Checks the closed and log-space forms against the binomial sum."""
    ref = binomial_f2(p, dp, N)
    rel = abs(qfi_f2(p, dp, N) - ref)/ref
    logger.info("N=%d relative error %g", N, rel)
    assert rel < 1e-10


@pytest.mark.parametrize("method", ["lyapunov", "eigen"])
@pytest.mark.parametrize("N", [1, 2, 5, 20])
def test_ideal_probe(method, N):
    """Checks F = N^2 t^2 for the decoupled amplitude."""
    t = np.linspace(0.5, 10, 20)
    c = np.exp(-1j*1.3*t)
    dc = -1j*t*c
    assert np.all(population_derivative(c, dc) == 0)
    f1 = qfi_f1(c, dc, N, method=method)
    assert np.allclose(f1, N**2*t**2, rtol=1e-9)
    assert np.all(qfi_f2(np.abs(c)**2, population_derivative(c, dc), N) == 0)


@pytest.mark.parametrize("N", list(range(1, 11)))
def test_markovian_equivalence(N):
    """Checks the general QFI on the Markovian amplitude against its closed
    form."""
    m = MarkovianModel(kappa=0.1)
    times = np.linspace(0, 50, 501)
    series = qfi_series(markovian_trajectory(m, 1.0, times), N)
    exact = markovian_qfi(m.kappa, N, times)

    assert series.F_total[0] == 0
    rel = np.max(np.abs(series.F_total[1:] - exact[1:])/exact[1:])
    logger.info("N=%d: max relative deviation %g", N, rel)
    assert rel < 1e-8
    assert np.all(series.F2 == 0)
    if N == 1:
        assert np.allclose(series.F_total, times**2*np.exp(-2*m.kappa*times),
                           rtol=1e-10)


@pytest.mark.parametrize("N", [2, 6])
def test_eigen_method_matches_lyapunov(N):
    """Checks the eigen-derivative evaluation against the closed form."""
    rng = np.random.default_rng(7)
    c, dc = random_amplitudes(rng, 50)
    lyap = qfi_f1(c, dc, N, method="lyapunov")
    eigen = qfi_f1(c, dc, N, method="eigen")
    assert np.allclose(eigen, lyap, rtol=1e-8)


def test_markovian_long_time_limit():
    m = MarkovianModel(kappa=0.1)
    N, t = 10, 200.0
    traj = markovian_trajectory(m, 1.0, np.array([0.0, t]))
    f = qfi_series(traj, N).F_total[-1]
    assert f < 1e-10*N**2*t**2


@pytest.mark.parametrize("N", list(range(1, 7)))
def test_brute_force_oracle(N):
    """Checks the block formulas against the full probe state."""
    rng = np.random.default_rng(100 + N)
    c, dc = random_amplitudes(rng, 35)
    closed = (qfi_f1(c, dc, N)
              + qfi_f2(np.abs(c)**2, population_derivative(c, dc), N))
    worst = 0.0
    for ci, dci, fi in zip(c, dc, closed):
        brute = brute_force_qfi(ci, dci, N)
        worst = max(worst, abs(brute - fi)/fi)
    logger.info("N=%d: worst relative deviation %g", N, worst)
    assert worst < 1e-6


def test_brute_force_reference_point():
    c, dc = 0.7*np.exp(0.3j), -0.1 + 0.2j
    closed = (qfi_f1(c, dc, 3)
              + qfi_f2(abs(c)**2, population_derivative(c, dc), 3))
    assert abs(brute_force_qfi(c, dc, 3) - closed)/closed < 1e-6

    with pytest.raises(SizeError):
        brute_force_qfi(c, dc, 7)


@pytest.mark.parametrize("N", [1, 2, 4])
def test_ghz_density_matrix(N):
    """Checks trace, positivity and the direct-sum block structure."""
    rng = np.random.default_rng(N)
    for c in random_amplitudes(rng, 5)[0]:
        rho = ghz_density_matrix(c, N)
        assert np.trace(rho).real == pytest.approx(1.0)
        assert np.allclose(rho, rho.conj().T)
        assert np.min(np.linalg.eigvalsh(rho)) > -1e-14

        last = 2**N - 1
        middle = rho[1:last, 1:last]
        assert np.allclose(middle, np.diag(np.diag(middle)))
        assert np.allclose(rho[1:last, 0], 0) and np.allclose(rho[1:last, last], 0)
        assert rho[0, last] == pytest.approx(c**N/2)


def test_qfi_symmetries():
    """Checks additivity, scale covariance and global-phase invariance."""
    rng = np.random.default_rng(11)
    c, dc = random_amplitudes(rng, 40)
    N = 4
    times = np.arange(40.0)
    series = qfi_series(AmplitudeTrajectory(times=times, c=c, dc_domega0=dc,
                                            dt=1.0), N)
    assert np.allclose(series.F_total, series.F1 + series.F2, rtol=1e-14)
    assert np.all(series.F1 >= 0) and np.all(series.F2 >= 0)

    scaled = qfi_series(AmplitudeTrajectory(times=times, c=c,
                                            dc_domega0=2.5*dc, dt=1.0), N)
    assert np.allclose(scaled.F_total, 2.5**2*series.F_total, rtol=1e-10)

    phase = np.exp(0.8j)
    rotated = qfi_series(AmplitudeTrajectory(times=times, c=phase*c,
                                             dc_domega0=phase*dc, dt=1.0), N)
    assert np.allclose(rotated.F_total, series.F_total, rtol=1e-10)


def test_qfi_series_container():
    m = MarkovianModel(kappa=0.2)
    series = qfi_series(markovian_trajectory(m, 1.0, np.linspace(0, 5, 11)), 3)
    assert len(series) == 11
    first = series[0]
    assert isinstance(first, QfiResult) and first.t == 0
    assert [r.t for r in series] == list(series.t)

    names, columns = series.columns()
    assert names == ["t", "F_total", "F1", "F2", "F_over_t2", "F_over_t"]
    assert np.isnan(columns[4][0]) and np.isnan(columns[5][0])
    assert np.allclose(columns[4][1:], series.F_total[1:]/series.t[1:]**2)


def test_input_validation():
    with pytest.raises(ValueError):
        qfi_f1(1.1, 0.0, 2)
    with pytest.raises(ValueError):
        qfi_f1(0.5, 0.1, 2, method="slq")
    traj = AmplitudeTrajectory(times=np.zeros(1), c=np.ones(1),
                               dc_domega0=None, dt=0.1)
    with pytest.raises(ValueError):
        qfi_series(traj, 2)


@pytest.mark.parametrize("N", [1, 3, 10])
@pytest.mark.parametrize("x", [0.3, 0.7, 0.95, 1.0])
def test_steady_state_eigensystem(x, N):
    """Checks the steady-state prefactor through the eigenvector form."""
    lam_plus, lam_minus, theta_plus, theta_minus, s = \
        steady_state_eigensystem(x, N)
    assert lam_plus + lam_minus == pytest.approx(s/2)
    assert abs(np.cos(theta_plus - theta_minus)) < 1e-12
    assert y_n_from_eigensystem(x, N) == pytest.approx(y_n(x, N), rel=1e-10)


if __name__ == "__main__":
    import sys
    if len(sys.argv) > 1:
        exec(sys.argv[1])
    else:
        from pytest import main
        main([__file__])
