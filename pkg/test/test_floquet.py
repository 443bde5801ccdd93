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

from floqmet.dynamics import solve_amplitude, stroboscopic_samples
from floqmet.floquet import (
    band_copies,
    default_n_max,
    fbs_derivatives,
    floquet_matrix,
    gap_intervals,
    hellmann_feynman_slope,
    normalization_matrix,
    scan_spectrum,
    self_energy,
    self_energy_slope,
    solve_fbs,
    stroboscopic_prediction,
)
from floqmet.model import ModelParams, lattice_frequencies
from floqmet.simutil import ConfigurationError, DomainError, StencilError

logger = logging.getLogger(__name__)

# parameter point of the driven reference calculations
REFERENCE = ModelParams(omega0=1.0, g=1.0, h=1.0, omega_c=0.0, omega_T=12.0,
                        A=11.0)


def test_self_energy_far_field_and_symmetry():
    p = ModelParams()
    for x in [100.0, -100.0]:
        assert abs(self_energy(x, 0, p) - p.g**2/x) < 0.01*abs(p.g**2/x)
    assert self_energy(5.0, 0, p) == pytest.approx(-self_energy(-5.0, 0, p))
    # copy m is the m = 0 result shifted by m omega_T
    assert self_energy(5.0 + 2*p.omega_T, 2, p) == pytest.approx(
        self_energy(5.0, 0, p))

    with pytest.raises(DomainError):
        self_energy(3.0, 0, p)


def test_self_energy_lattice_sum():
    """Checks the elliptic closed form against the lattice mode sum."""
    p = ModelParams(g=1.0, omega_c=0.0)
    omega_k = lattice_frequencies(p, 256)
    ksum = p.g**2*np.mean(1/(5.0 - omega_k))
    assert abs(self_energy(5.0, 0, p) - ksum) < 1e-3


def test_self_energy_slope():
    p = ModelParams(g=0.8, omega_c=0.3)
    eps, h = 6.1, 1e-5
    fd = (self_energy(eps + h, 0, p) - self_energy(eps - h, 0, p))/(2*h)
    assert self_energy_slope(eps, 0, p) == pytest.approx(fd, rel=1e-7)
    assert np.all(normalization_matrix(5.0, p, 3) > 1)


def test_floquet_matrix_structure():
    p = REFERENCE
    n_max = 6
    mat = floquet_matrix(5.0, p, n_max)
    assert mat.shape == (2*n_max + 1,)*2
    assert np.allclose(mat, mat.T)
    for n in range(1, 2*n_max):
        assert np.count_nonzero(mat[n]) == 3

    static = floquet_matrix(5.0, p.replace(A=0.0), n_max)
    assert np.allclose(static, np.diag(np.diag(static)))


def test_gap_intervals():
    p = ModelParams(omega_T=12.0)
    assert gap_intervals(p) == [(-6.0, -4.0), (4.0, 6.0)]
    assert band_copies(p) == [(-4.0, 4.0)]

    assert gap_intervals(p.replace(omega_T=7.9)) == []
    assert gap_intervals(p.replace(omega_T=8.0)) == []
    assert len(gap_intervals(p.replace(omega_T=8.5))) == 2


@pytest.mark.parametrize("A", [8.0, 11.0])
def test_decoupled_bound_state(A):
    """Checks the weak-coupling limit: a time-averaged shifted level with Z=1."""
    p = ModelParams(g=1e-6, A=A)
    states = solve_fbs(p)
    assert len(states) == 1
    state = states[0]
    expected = (p.omega0 + A/2 + p.omega_T/2) % p.omega_T - p.omega_T/2
    assert abs(state.epsilon_b - expected) < 1e-8
    assert abs(state.Z - 1) < 1e-6

    state = fbs_derivatives(p, state=state)
    assert state.d_epsilon_domega0 == pytest.approx(1.0, abs=1e-6)
    assert abs(state.d_Z2_domega0) < 1e-6


# region boundaries for omega_T = 12h, g = omega0 = h: A in (4.0, 4.25],
# (13.75, 14.0], (29.25, 29.5] and (38.0, 38.25], found on a 0.25h grid
@pytest.mark.parametrize(("A", "has_fbs"), [
    (2.0, False), (3.5, False),
    (4.6, True), (5.2, True), (8.0, True), (11.0, True), (13.6, True),
    (14.2, False), (20.0, False), (28.0, False), (28.6, False),
    (29.9, True), (32.0, True), (34.9, True), (35.5, True), (37.5, True),
    (39.0, False),
])
def test_fbs_regions(A, has_fbs):
    """Checks bound-state existence on both sides of each region boundary."""
    states = solve_fbs(REFERENCE.replace(A=A))
    logger.info("A=%g: %s", A, [(s.epsilon_b, s.Z) for s in states])
    assert bool(states) == has_fbs


def test_upper_region_dynamics():
    """Checks a bound state of the second region in the full dynamics."""
    p = REFERENCE.replace(A=35.5)
    states = solve_fbs(p)
    assert states
    traj = solve_amplitude(p, 80*p.period, 0.005)
    n, t_n, c_n = stroboscopic_samples(traj, p)
    window = n >= 60
    err = np.max(np.abs(c_n[window] - stroboscopic_prediction(states,
                                                              t_n[window])))
    logger.info("A=35.5: %s, max deviation %g",
                [(s.epsilon_b, s.Z) for s in states], err)
    assert err < 3e-2


def test_bound_state_invariants():
    p = REFERENCE
    states = solve_fbs(p)
    assert len(states) == 1
    state = states[0]

    assert -p.omega_T/2 <= state.epsilon_b <= p.omega_T/2
    for lo, hi in band_copies(p):
        assert not lo <= state.epsilon_b <= hi
    assert 0 < state.Z <= 1
    assert state.normalization_residual < 1e-8
    assert state.n_max == default_n_max(p)


def test_truncation_convergence():
    p = REFERENCE
    n_max = default_n_max(p)
    base, = solve_fbs(p, n_max=n_max)
    more, = solve_fbs(p, n_max=n_max + 4)
    assert abs(base.epsilon_b - more.epsilon_b) < 1e-8
    assert abs(base.Z - more.Z) < 1e-6


def test_zone_translation():
    """Checks that a shifted Brillouin zone gives the same state shifted."""
    p = REFERENCE
    base, = solve_fbs(p)
    shifted, = solve_fbs(p, zone_center=p.omega_T)
    assert shifted.epsilon_b == pytest.approx(base.epsilon_b + p.omega_T,
                                              abs=1e-9)
    assert shifted.Z == pytest.approx(base.Z, abs=1e-9)


def test_fbs_derivatives(caplog):
    """Checks the Richardson gate and the Hellmann-Feynman cross-check."""
    p = REFERENCE
    with caplog.at_level(logging.WARNING, logger="floqmet.floquet"):
        state = fbs_derivatives(p)
    assert not [r for r in caplog.records if "d_epsilon" in r.getMessage()]
    logger.info("d eps/d omega0 = %.10g, d Z^2/d omega0 = %.10g",
                state.d_epsilon_domega0, state.d_Z2_domega0)
    assert 0 < state.d_epsilon_domega0 <= 1
    assert state.d_epsilon_domega0 == pytest.approx(
        hellmann_feynman_slope(state), rel=1e-6)

    with pytest.raises(StencilError):
        fbs_derivatives(p.replace(A=2.0))


def test_stroboscopic_steady_state():
    """Checks the long-time stroboscopic amplitude against the bound state."""
    p = REFERENCE
    state, = solve_fbs(p)
    traj = solve_amplitude(p, 40*p.period, 0.005)
    n, t_n, c_n = stroboscopic_samples(traj, p)
    window = (n >= 25) & (n <= 40)

    err = np.max(np.abs(np.abs(c_n[window]) - state.Z))
    logger.info("Z=%.6g, max ||c(nT)| - Z| = %g", state.Z, err)
    assert err < 5e-3

    advance = np.angle(c_n[window][1:]/c_n[window][:-1])
    expected = np.angle(np.exp(-1j*state.epsilon_b*p.period))
    assert np.max(np.abs(np.angle(np.exp(1j*(advance - expected))))) < 1e-3

    predicted = stroboscopic_prediction([state], t_n[window])
    assert np.max(np.abs(predicted - c_n[window])) < 1e-2


def test_stroboscopic_decay_without_bound_state():
    """Checks that the amplitude leaks away completely without a bound state.

    The level sits inside the band copy and decays slowly: |c(nT)| is still
    about 0.12 at n = 60 and drops below 1e-2 between n = 100 and n = 150.
    """
    p = REFERENCE.replace(A=20.0)
    assert not solve_fbs(p)
    traj = solve_amplitude(p, 150*p.period, 0.005)
    n, _, c_n = stroboscopic_samples(traj, p)
    mag = np.abs(c_n)
    logger.info("|c(nT)| at n = 60, 100, 150: %s",
                [mag[n == k][0] for k in (60, 100, 150)])
    assert mag[n == 150][0] < 1e-2
    # no stationary remainder
    assert np.max(mag[n >= 130]) < 0.25*np.max(mag[(n >= 50) & (n <= 60)])


def test_stroboscopic_prediction():
    state, = solve_fbs(REFERENCE)
    assert stroboscopic_prediction([state], 0.0) == pytest.approx(state.Z)
    assert stroboscopic_prediction([], np.zeros(3)).shape == (3,)


def test_scan_spectrum_amplitude_axis():
    """Checks band bookkeeping and bound-state data of an amplitude sweep."""
    p = REFERENCE
    scan = scan_spectrum(p, "A", [0.0, 2.0, 11.0, 20.0, 32.0])
    found = [bool(eps) for eps in scan.fbs_branches]
    assert found == [False, False, True, False, True]
    assert all(bands == scan.band_edges[0] for bands in scan.band_edges)

    rows = scan.rows()
    assert rows[0][1] == 0 and rows[0][2:] == [None]*4
    assert rows[2][2] == pytest.approx(scan.fbs_branches[2][0])


def test_scan_spectrum_frequency_axis():
    """Checks that band copies fill the zone for omega_T <= 8h."""
    p = REFERENCE
    scan = scan_spectrum(p, "omega_T", [6.0, 7.0, 7.9])
    assert all(not eps for eps in scan.fbs_branches)
    assert scan.band_edges[0] != scan.band_edges[1]


def test_scan_spectrum_workers():
    p = REFERENCE
    serial = scan_spectrum(p, "A", [8.0, 11.0])
    pooled = scan_spectrum(p, "A", [8.0, 11.0], workers=2)
    assert serial.fbs_branches == pooled.fbs_branches
    assert serial.residues == pooled.residues


def test_scan_spectrum_validation():
    with pytest.raises(ConfigurationError):
        scan_spectrum(REFERENCE, "g", [1.0])
    with pytest.raises(ConfigurationError):
        scan_spectrum(REFERENCE, "omega_T", [0.0, 12.0])


if __name__ == "__main__":
    import sys
    if len(sys.argv) > 1:
        exec(sys.argv[1])
    else:
        from pytest import main
        main([__file__])
