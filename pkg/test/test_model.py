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
import numpy.linalg as la  # noqa
import pytest
from scipy import integrate

from floqmet.model import (
    MarkovianModel,
    ModelParams,
    band_edges,
    correlation_function,
    drive_field,
    drive_phase,
    elliptic_E,
    elliptic_K,
    integrate_band,
    lambert_w,
    lattice_frequencies,
    lattice_momenta,
    spectral_density,
)
from floqmet.simutil import ConfigurationError, DomainError

logger = logging.getLogger(__name__)


def lattice_correlation(t, p, L):
    """Return the finite-lattice k-sum of the correlation function."""
    omega_k = lattice_frequencies(p, L)
    return p.g**2*np.mean(np.exp(-1j*np.outer(t, omega_k)), axis=1)


def test_params_defaults_and_period():
    """Checks the default parameter point and derived quantities."""
    p = ModelParams()
    assert (p.omega0, p.g, p.h, p.omega_c) == (1.0, 1.0, 1.0, 0.0)
    assert p.omega_T == 12.0
    assert p.period == pytest.approx(2*np.pi/12)
    assert band_edges(p) == (-4.0, 4.0)

    q = p.replace(A=11)
    assert q.A == 11 and p.A == 0


@pytest.mark.parametrize(("key", "value"), [
    ("h", 0),
    ("g", -1),
    ("omega_T", 0),
    ("A", -0.5),
    ("N", 0),
    ("N", 2.5),
    ("omega0", float("nan")),
])
def test_params_validation(key, value):
    """Checks that invalid parameters are rejected with the key named."""
    with pytest.raises(ConfigurationError) as excinfo:
        ModelParams(**{key: value})
    assert excinfo.value.key == key


def test_params_dict_roundtrip():
    """Checks the flat mapping used by config files and file headers."""
    p = ModelParams(A=11, N=4.0)
    assert isinstance(p.N, int)
    assert ModelParams.from_dict(p.to_dict()) == p

    with pytest.raises(ConfigurationError) as excinfo:
        ModelParams.from_dict({"omega0": 1, "gamma": 2})
    assert excinfo.value.key == "gamma"


def test_markovian_model():
    m = MarkovianModel(kappa=0.1, T_R=10)
    assert m.repetitions(2.0) == pytest.approx(5)
    with pytest.raises(ConfigurationError):
        MarkovianModel(kappa=-1)


def test_drive_phase_matches_quadrature():
    """Checks the closed-form phase against direct integration of the level."""
    p = ModelParams(A=11)
    for t in [0.1, 0.7, 3.3]:
        ref, _ = integrate.quad(lambda s: p.omega0 + drive_field(s, p), 0, t)
        assert abs(drive_phase(t, p) - ref) < 1e-12
    assert drive_phase(2.0, p, driven=False) == pytest.approx(2.0)


def test_lattice_momenta():
    k = lattice_momenta(8)
    assert len(k) == 8 and k[0] == 0
    with pytest.raises(ConfigurationError):
        lattice_momenta(7)


@pytest.mark.parametrize("omega_c", [0.0, 1.5])
def test_spectral_density_normalization(omega_c):
    """Checks that the density is nonnegative and integrates to g^2."""
    p = ModelParams(g=0.7, omega_c=omega_c)
    total = integrate_band(lambda w: spectral_density(w, p), p)
    logger.info("integral of J: %.12g (g^2 = %g)", total, p.g**2)
    assert abs(total - p.g**2)/p.g**2 < 1e-6

    w = np.linspace(omega_c - 5, omega_c + 5, 1001)
    dos = spectral_density(w, p)
    assert np.all(dos >= 0)
    assert np.all(dos[np.abs(w - omega_c) >= 4] == 0)


def test_spectral_density_van_hove_window():
    """Checks that the density stays finite at the band center."""
    p = ModelParams()
    assert np.isfinite(spectral_density(0.0, p))
    assert spectral_density(0.0, p) == spectral_density(1e-9, p)


def test_correlation_function_basics():
    p = ModelParams()
    assert correlation_function(0.0, p) == pytest.approx(p.g**2)
    t = np.linspace(0, 10, 101)
    assert np.all(correlation_function(t, p).imag == 0)

    # the band center only contributes a phase
    shifted = correlation_function(t, p.replace(omega_c=2.0))
    assert np.allclose(np.abs(shifted), np.abs(correlation_function(t, p)))


def test_correlation_function_lattice_sum():
    """Checks the closed form against the k-sum on a finite lattice."""
    p = ModelParams(g=1.0, h=1.0, omega_c=0.0)
    t = np.array([0.5, 1, 2, 5])
    exact = correlation_function(t, p)

    err_128 = np.max(np.abs(exact - lattice_correlation(t, p, 128)))
    logger.info("k-sum error at L=128: %g", err_128)
    assert err_128 < 1e-3

    # the finite-lattice error shrinks with L before recurrences set in
    t_late = np.array([40.0])
    err_64 = np.abs(correlation_function(t_late, p)
                    - lattice_correlation(t_late, p, 64))[0]
    err_128 = np.abs(correlation_function(t_late, p)
                     - lattice_correlation(t_late, p, 128))[0]
    logger.info("late-time k-sum error: L=64 %g, L=128 %g", err_64, err_128)
    assert err_128 < err_64


def test_correlation_function_is_transform_of_density():
    """Checks nu(t) against quadrature of J(omega) exp(-i omega t)."""
    p = ModelParams(g=1.0, omega_c=0.5)
    for t in [0.3, 1.7]:
        re = integrate_band(lambda w: spectral_density(w, p)*np.cos(w*t), p)
        im = -integrate_band(lambda w: spectral_density(w, p)*np.sin(w*t), p)
        assert abs(correlation_function(t, p) - (re + 1j*im)) < 1e-6


def elliptic_quadrature(x, power):
    val, _ = integrate.quad(lambda phi: (1 - x*np.sin(phi)**2)**power,
                            0, np.pi/2, epsabs=1e-14, epsrel=1e-13)
    return val


@pytest.mark.parametrize("x", [-2.0, 0.0, 0.3, 0.5, 0.9, 0.99])
def test_elliptic_integrals(x):
    """Checks K and E against the defining integrals."""
    k_ref = elliptic_quadrature(x, -0.5)
    e_ref = elliptic_quadrature(x, 0.5)
    assert abs(elliptic_K(x) - k_ref)/k_ref < 1e-10
    assert abs(elliptic_E(x) - e_ref)/e_ref < 1e-10
    if x >= 0:
        assert elliptic_E(x) <= np.pi/2 <= elliptic_K(x)


def test_elliptic_special_values():
    assert elliptic_K(0) == pytest.approx(np.pi/2)
    assert elliptic_E(1) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        elliptic_K(1.0)
    with pytest.raises(DomainError):
        elliptic_E(1.5)


def test_lambert_w():
    """Checks special values and the round-trip residual of W."""
    assert lambert_w(0) == 0
    assert lambert_w(np.e) == pytest.approx(1.0, abs=1e-14)

    z = np.linspace(-0.3, 10, 500)
    w = lambert_w(z)
    assert np.max(np.abs(w*np.exp(w) - z)) < 1e-12

    w0 = lambert_w(2*np.exp(-2))
    # Newton iteration as an independent reference
    ref = 0.2
    for _ in range(50):
        ref -= (ref*np.exp(ref) - 2*np.exp(-2))/(np.exp(ref)*(1 + ref))
    assert abs(w0 - ref) < 1e-14
    assert (w0 + 2)/2 == pytest.approx(1.11, abs=0.005)

    with pytest.raises(DomainError):
        lambert_w(-0.5)


if __name__ == "__main__":
    import sys
    if len(sys.argv) > 1:
        exec(sys.argv[1])
    else:
        from pytest import main
        main([__file__])
