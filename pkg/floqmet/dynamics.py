r""":mod:`floqmet.dynamics` computes the excited-state amplitude of one atom.

The amplitude obeys the Volterra integro-differential equation

.. math::

    \dot c(t) + i[\omega_0 + f(t)]c(t) + \int_0^t \nu(t-\tau)c(\tau)\,d\tau = 0,
    \qquad c(0) = 1,

and its :math:`\omega_0`-sensitivity :math:`x = \partial c/\partial\omega_0`
obeys the same equation with the extra source :math:`-ic(t)` and
:math:`x(0) = 0`.

Trajectories
^^^^^^^^^^^^
.. autoclass:: AmplitudeTrajectory
.. autofunction:: solve_amplitude
.. autofunction:: decoupled_amplitude
.. autofunction:: stroboscopic_samples
.. autofunction:: finite_difference_sensitivity
.. autofunction:: master_equation_rates

Lattice oracle
^^^^^^^^^^^^^^
.. autofunction:: lattice_oracle

Markovian limit
^^^^^^^^^^^^^^^
.. autofunction:: markovian_amplitude
.. autofunction:: markovian_trajectory
.. autofunction:: markovian_params
.. autofunction:: renormalized_shift
"""

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
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pymbolic as pmbl
from scipy import integrate

from floqmet import symbolic as sym
from floqmet.integrators import linear_trapezoid_step, rk4_step
from floqmet.io import make_status_message
from floqmet.model import (
    MarkovianModel,
    band_edges,
    correlation_function,
    drive_phase,
    integrate_band,
    lattice_frequencies,
    spectral_density,
)
from floqmet.simutil import (
    ConfigurationError,
    SolverInstabilityError,
    check_step,
    stroboscopic_timestep,
)
from floqmet.steppers import advance_state

logger = logging.getLogger(__name__)

# allowed excursion of |c| above 1 before the run is declared unstable
INSTABILITY_TOL = 1e-3


@dataclass
class AmplitudeTrajectory:
    """Amplitude :math:`c(t)` on a uniform grid.

    .. attribute:: times

        Grid :math:`t_i = i\\,\\Delta t`.

    .. attribute:: c

        Complex amplitude at each grid point.

    .. attribute:: dc_domega0

        :math:`\\partial c/\\partial\\omega_0` at each grid point, or *None*
        when the sensitivity was not computed.

    .. attribute:: dt

        Grid step, a whole fraction of the drive period.

    .. attribute:: norm

        Norm of the full state vector (lattice oracle only), or *None*.

    .. autoattribute:: p
    """

    times: np.ndarray
    c: np.ndarray
    dc_domega0: Optional[np.ndarray]
    dt: float
    norm: Optional[np.ndarray] = None

    @property
    def p(self):
        """Excited-state population :math:`|c|^2` clamped into [0, 1]."""
        return np.clip(np.abs(self.c)**2, 0.0, 1.0)

    def __len__(self):
        return len(self.times)


def _grid(p, t_max, dt, driven):
    dt = stroboscopic_timestep(dt, p.period, p.h, driven=driven)
    if not t_max >= dt:
        raise ConfigurationError(f"t_max = {t_max} must be >= dt = {dt}",
                                 key="t_max")
    nsteps = math.ceil(t_max/dt - 1e-9)
    return dt, nsteps


def solve_amplitude(p, t_max, dt, driven=True, nstatus=-1):
    r"""Solve for :math:`c(t)` and :math:`\partial c/\partial\omega_0`.

    The local term is removed exactly by the rotating frame
    :math:`c = e^{-i\phi(t)} b`, :math:`\phi = \int_0^t(\omega_0 + f)`, which
    leaves :math:`\dot b = -e^{i\phi}\int_0^t \nu(t-\tau) c(\tau)\,d\tau`. The
    memory integral is discretized with the trapezoidal rule and :math:`b` is
    advanced with a trapezoidal step. Its only implicit piece is the
    self-term :math:`\frac{\Delta t}{2}\nu(0)c_{n+1}`, so the step is solved in
    closed form by :func:`~floqmet.integrators.linear_trapezoid_step`.

    The sensitivity :math:`x = e^{-i\phi} y` is advanced the same way, with its
    source :math:`-ib_{n+1}` taken from the Euler predictor
    :math:`b_n + \Delta t\,\dot b_n`. This makes *dc_domega0* the exact
    :math:`\omega_0`-derivative of the discrete solution, while both remain
    second-order accurate. For :math:`g = 0` the scheme is exact.

    Parameters
    ----------
    p: :class:`~floqmet.model.ModelParams`
    t_max: float
        Final time, rounded up to the grid.
    dt: float
        Requested step. It is reduced to divide the drive period exactly.
    driven: bool
        Switch the drive on (*True*) or off.
    nstatus: int
        Log a status message every *nstatus* steps (negative: never).

    Returns
    -------
    :class:`AmplitudeTrajectory`

    Raises
    ------
    ConfigurationError
        If the adjusted step does not resolve the drive or the band.
    SolverInstabilityError
        If :math:`|c|` exceeds 1 by more than ``1e-3``.
    """
    dt, nsteps = _grid(p, t_max, dt, driven)
    times = dt*np.arange(nsteps + 1)
    rot = np.exp(1j*drive_phase(times, p, driven=driven))
    nu_rev = np.ascontiguousarray(correlation_function(times, p)[::-1])
    nu0 = p.g**2
    damping = dt/2*nu0

    c = np.zeros(nsteps + 1, dtype=np.complex128)
    x = np.zeros(nsteps + 1, dtype=np.complex128)
    c[0] = 1.0
    b, bdot = 1.0 + 0j, 0j
    y, ydot = 0j, -1j

    for n in range(nsteps):
        # nu[n+1], ..., nu[1] against c[0], ..., c[n]
        kernel = nu_rev[nsteps-n-1:nsteps]
        hist_c = dt*(np.dot(kernel, c[:n+1]) - 0.5*kernel[0]*c[0])
        hist_x = dt*np.dot(kernel, x[:n+1])

        b_new = linear_trapezoid_step(b, bdot, -rot[n+1]*hist_c, damping, dt)
        y_new = linear_trapezoid_step(
            y, ydot, -1j*(b + dt*bdot) - rot[n+1]*hist_x, damping, dt)

        c[n+1] = b_new/rot[n+1]
        x[n+1] = y_new/rot[n+1]
        bdot = -rot[n+1]*(hist_c + damping*c[n+1])
        ydot = -1j*b_new - rot[n+1]*(hist_x + damping*x[n+1])
        b, y = b_new, y_new

        if abs(c[n+1]) > 1 + INSTABILITY_TOL:
            raise SolverInstabilityError(n+1, times[n+1], c[n+1])
        if nstatus > 0 and check_step(n+1, nstatus):
            logger.info(make_status_message(step=n+1, t=times[n+1], dt=dt,
                                            c=c[n+1]))

    return AmplitudeTrajectory(times=times, c=c, dc_domega0=x, dt=dt)


def decoupled_amplitude(p, t, driven=True):
    """Return the exact :math:`g=0` amplitude and its sensitivity at *t*.

    Both come from :func:`floqmet.symbolic.drive_phase_expr`. The sensitivity
    is its symbolic :math:`\\omega_0`-derivative.
    """
    t = np.asarray(t, dtype=float)
    phase = sym.drive_phase_expr(driven=driven)
    dphase = sym.diff(pmbl.var("omega0"))(phase)
    c = np.exp(-1j*sym.evaluate(phase, p, t))
    return c, -1j*np.broadcast_to(sym.evaluate(dphase, p, t), t.shape)*c


def stroboscopic_samples(traj, p):
    """Return period indices, times and amplitudes at :math:`t = nT`."""
    per_period = int(round(p.period/traj.dt))
    idx = np.arange(0, len(traj.times), per_period)
    return idx//per_period, traj.times[idx], traj.c[idx]


def finite_difference_sensitivity(solver, p, delta=1e-4, **kwargs):
    r"""Return :math:`\partial c/\partial\omega_0` by central differences.

    *solver* is called as ``solver(p, **kwargs)`` at
    :math:`\omega_0 \pm \delta` and must return an
    :class:`AmplitudeTrajectory`.
    """
    plus = solver(p.replace(omega0=p.omega0 + delta), **kwargs)
    minus = solver(p.replace(omega0=p.omega0 - delta), **kwargs)
    return (plus.c - minus.c)/(2*delta)


def master_equation_rates(traj):
    r"""Return the time-local dissipation rate and renormalized frequency.

    :math:`\gamma(t) = -\mathrm{Re}[\dot c/c]` and
    :math:`\omega(t) = -\mathrm{Im}[\dot c/c]`, with :math:`\dot c` from
    second-order differences on the grid.
    """
    cdot = np.gradient(traj.c, traj.dt, edge_order=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = cdot/traj.c
    return -ratio.real, -ratio.imag


def _lattice_run(p, L, t_max, dt, driven, nstatus):
    dt, nsteps = _grid(p, t_max, dt, driven)
    omega_k = lattice_frequencies(p, L)
    g_k = p.g/L

    # interaction picture with respect to diag(omega0 + f(t), omega_k)
    def rhs(t, state):
        rot = np.exp(1j*(drive_phase(t, p, driven=driven) - omega_k*t))
        rate = np.empty_like(state)
        rate[0] = -1j*g_k*np.dot(rot, state[1:])
        rate[1:] = -1j*g_k*np.conj(rot)*state[0]
        return rate

    amplitude = np.zeros(nsteps + 1, dtype=np.complex128)
    norm = np.zeros(nsteps + 1)

    def checkpoint(state, step, t, dt):
        amplitude[step] = state[0]*np.exp(-1j*drive_phase(step*dt, p,
                                                          driven=driven))
        norm[step] = np.vdot(state, state).real
        if nstatus > 0 and check_step(step, nstatus):
            logger.info(make_status_message(step=step, t=step*dt, dt=dt,
                                            c=amplitude[step], norm=norm[step]))
        return 0

    state = np.zeros(1 + L*L, dtype=np.complex128)
    state[0] = 1.0
    advance_state(rhs=rhs, timestepper=rk4_step, checkpoint=checkpoint,
                  state=state, dt=dt, nsteps=nsteps)

    return AmplitudeTrajectory(times=dt*np.arange(nsteps + 1), c=amplitude,
                               dc_domega0=None, dt=dt, norm=norm)


def lattice_oracle(p, L, t_max, dt, driven=True, sensitivity=False,
                   delta=1e-4, nstatus=-1):
    """Integrate the single-excitation Schrödinger equation on an LxL lattice.

    The state holds the atom amplitude and one amplitude per lattice mode,
    coupled with :math:`g_k = g/L`. It is advanced with
    :func:`~floqmet.integrators.rk4_step` in the interaction picture, so the
    step only needs to resolve the coupling-induced dynamics.

    Parameters
    ----------
    L: int
        Even lattice size, at least 32.
    sensitivity: bool
        If true, also compute :math:`\\partial c/\\partial\\omega_0` by central
        differences with half-width *delta*.

    Returns
    -------
    :class:`AmplitudeTrajectory`
        With :attr:`~AmplitudeTrajectory.norm` filled in.
    """
    if L < 32 or L % 2:
        raise ConfigurationError(f"L must be an even integer >= 32, got {L}",
                                 key="L")
    traj = _lattice_run(p, L, t_max, dt, driven, nstatus)
    if sensitivity:
        traj.dc_domega0 = finite_difference_sensitivity(
            lambda q: _lattice_run(q, L, t_max, dt, driven, -1), p, delta)
    return traj


def markovian_amplitude(m, omega0, t):
    r"""Return :math:`e^{-\kappa t - i[\omega_0 + \Delta]t}`."""
    t = np.asarray(t, dtype=float)
    return np.exp(-m.kappa*t - 1j*(omega0 + m.delta)*t)


def markovian_trajectory(m, omega0, times):
    """Return the Markovian amplitude on *times* with its sensitivity.

    Both :math:`\\kappa` and :math:`\\Delta` are held fixed under changes of
    :math:`\\omega_0`, so :math:`\\partial c/\\partial\\omega_0 = -itc`.
    """
    times = np.asarray(times, dtype=float)
    c = markovian_amplitude(m, omega0, times)
    dt = times[1] - times[0] if len(times) > 1 else 0.0
    return AmplitudeTrajectory(times=times, c=c, dc_domega0=-1j*times*c, dt=dt)


def renormalized_shift(p, excision=1e-6):
    r"""Return :math:`\Delta = \mathcal{P}\int J(\omega)/(\omega_0-\omega)\,d\omega`.

    Inside the band the principal value is taken by excising
    :math:`|\omega - \omega_0| < \eta` with :math:`\eta` = *excision* times
    :math:`h`. The two sides are folded onto one integral over the distance
    :math:`s` from :math:`\omega_0`, whose integrand
    :math:`[J(\omega_0-s) - J(\omega_0+s)]/s` stays bounded.
    """
    lo, hi = band_edges(p)
    w0 = p.omega0

    def density(w):
        return spectral_density(w, p)

    if w0 <= lo or w0 >= hi:
        return integrate_band(lambda w: density(w)/(w0 - w), p)

    eta = excision*p.h
    reach = min(w0 - lo, hi - w0)
    kink = abs(w0 - p.omega_c)
    points = [kink] if eta < kink < reach else None
    paired, _ = integrate.quad(
        lambda s: (density(w0 - s) - density(w0 + s))/s, eta, reach,
        points=points, limit=400, epsabs=1e-12)

    # the unpaired remainder of the band on the far side
    if w0 - lo > hi - w0:
        a, b = lo, w0 - reach
    else:
        a, b = w0 + reach, hi
    tail = 0.0
    if b > a:
        points = [p.omega_c] if a < p.omega_c < b else None
        tail, _ = integrate.quad(lambda w: density(w)/(w0 - w), a, b,
                                 points=points, limit=400, epsabs=1e-12)
    return paired + tail


def markovian_params(p, T_R=1.0, excision=1e-6):
    r"""Return the :class:`~floqmet.model.MarkovianModel` of *p*.

    :math:`\kappa = \pi J(\omega_0)` and :math:`\Delta` from
    :func:`renormalized_shift`.
    """
    kappa = np.pi*spectral_density(p.omega0, p)
    delta = renormalized_shift(p, excision=excision)
    logger.debug("markovian parameters: kappa=%g delta=%g", kappa, delta)
    return MarkovianModel(kappa=float(kappa), delta=float(delta), T_R=T_R)
