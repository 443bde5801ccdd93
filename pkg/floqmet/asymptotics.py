r""":mod:`floqmet.asymptotics` collects closed-form long-time and Markovian results.

With one Floquet bound state of residue :math:`Z` and quasienergy
:math:`\epsilon_b`, the stroboscopic QFI of the GHZ probe grows as

.. math::

    F(t) \simeq y_N(Z^2)\,(N t\,\partial_{\omega_0}\epsilon_b)^2
        + \frac{N(\partial_{\omega_0}Z^2)^2}{Z^2(1-Z^2)},
    \qquad
    y_N(x) = \frac{2x^N}{1 + x^N + (1-x)^N}.

Without a bound state the Markovian amplitude gives instead

.. math::

    F(t) = \frac{2N^2t^2}{1 + (e^{2\kappa t}-1)^N + e^{2N\kappa t}},

which peaks at :math:`t = q/N` and vanishes at long times.

Steady state
^^^^^^^^^^^^
.. autofunction:: y_n
.. autoclass:: AsymptoticQfi
.. autofunction:: asymptotic_qfi
.. autofunction:: long_time_qfi
.. autofunction:: steady_f2
.. autofunction:: f2_large_n_limit

Markovian limit
^^^^^^^^^^^^^^^
.. autofunction:: markovian_qfi
.. autoclass:: MarkovianOptimum
.. autofunction:: markovian_optimum
.. autofunction:: markovian_optimum_numeric

Precision and fits
^^^^^^^^^^^^^^^^^^
.. autofunction:: cramer_rao_precision
.. autofunction:: fit_power_law
.. autofunction:: stroboscopic_slope
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
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from floqmet.model import lambert_w
from floqmet.simutil import DomainError

logger = logging.getLogger(__name__)

# 1 - Z^2 below this counts as a decoupled bound state
DECOUPLED_TOL = 1e-12


def _as_output(result):
    result = np.asarray(result)
    return float(result) if result.ndim == 0 else result


def y_n(x, N):
    r"""Return :math:`y_N(x) = 2x^N/[1 + x^N + (1-x)^N]`.

    Evaluated as :math:`2/[x^{-N} + 1 + ((1-x)/x)^N]` with the powers taken
    in log space, so large *N* neither overflows nor underflows to nan.

    Raises
    ------
    DomainError
        If *x* is outside :math:`[0, 1]`.
    """
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise DomainError("y_N needs 0 <= x <= 1", value=x)
    with np.errstate(divide="ignore", over="ignore"):
        a = N*np.log(x)
        b = N*np.log1p(-x)
        result = 2/(np.exp(-a) + 1 + np.exp(b - a))
    return _as_output(result)


@dataclass(frozen=True)
class AsymptoticQfi:
    """Long-time stroboscopic QFI of one bound state.

    .. attribute:: N
    .. attribute:: prefactor

        :math:`y_N(Z^2)`.

    .. attribute:: slope_sq

        :math:`(N\\partial_{\\omega_0}\\epsilon_b)^2`.

    .. attribute:: offset

        :math:`N(\\partial_{\\omega_0}Z^2)^2/[Z^2(1-Z^2)]`, zero when
        :attr:`decoupled`.

    .. attribute:: decoupled

        *True* if :math:`Z = 1`, where the offset is reported as zero.

    .. autoattribute:: t2_coefficient
    .. automethod:: evaluate
    """

    N: int
    prefactor: float
    slope_sq: float
    offset: float
    decoupled: bool = False

    @property
    def t2_coefficient(self):
        """Coefficient of :math:`t^2`."""
        return self.prefactor*self.slope_sq

    def evaluate(self, t):
        """Return the asymptotic QFI at times *t*."""
        t = np.asarray(t, dtype=float)
        return _as_output(self.t2_coefficient*t**2 + self.offset)


def asymptotic_qfi(fbs, N):
    """Return the :class:`AsymptoticQfi` of bound state *fbs* for *N* atoms.

    Raises
    ------
    ValueError
        If the derivative fields of *fbs* are not populated; see
        :func:`~floqmet.floquet.fbs_derivatives`.
    """
    if fbs.d_epsilon_domega0 is None or fbs.d_Z2_domega0 is None:
        raise ValueError("bound state has no omega0 derivatives; "
                         "use floquet.fbs_derivatives")
    z2 = min(fbs.Z2, 1.0)
    decoupled = 1 - z2 < DECOUPLED_TOL
    offset = 0.0 if decoupled else N*fbs.d_Z2_domega0**2/(z2*(1 - z2))
    if decoupled:
        logger.info("Z = 1: bound state decoupled, offset term set to 0")
    return AsymptoticQfi(N=N, prefactor=y_n(z2, N),
                         slope_sq=(N*fbs.d_epsilon_domega0)**2,
                         offset=float(offset), decoupled=decoupled)


def long_time_qfi(fbs, N, t):
    """Return the long-time stroboscopic QFI of *fbs* at times *t*."""
    return asymptotic_qfi(fbs, N).evaluate(t)


def steady_f2(Z2, dZ2, N):
    r"""Return the time-independent population term of the steady QFI.

    .. math::

        \frac{N(\partial Z^2)^2}{2Z^2}\left[
            \frac{1 - NZ^2(1-Z^2)^{N-1}}{1-Z^2} - NZ^{2N-2}\right]
    """
    Z2 = np.asarray(Z2, dtype=float)
    bracket = ((1 - N*Z2*(1 - Z2)**(N - 1))/(1 - Z2)
               - N*Z2**(N - 1))
    return _as_output(N*np.asarray(dZ2)**2/(2*Z2)*bracket)


def f2_large_n_limit(Z2, dZ2, N):
    r"""Return the large-*N* limit :math:`N(\partial Z^2)^2/[2Z^2(1-Z^2)]`
    of :func:`steady_f2`."""
    Z2 = np.asarray(Z2, dtype=float)
    return _as_output(N*np.asarray(dZ2)**2/(2*Z2*(1 - Z2)))


def markovian_qfi(kappa, N, t):
    """Return the QFI of the Markovian GHZ probe at times *t*.

    The denominator is summed with :func:`scipy.special.logsumexp`, which keeps
    the deep tail finite.
    """
    if kappa < 0:
        raise DomainError(f"kappa must be >= 0, got {kappa}", value=kappa)
    t = np.asarray(t, dtype=float)
    if kappa == 0:
        return _as_output(N**2*t**2)
    with np.errstate(divide="ignore"):
        terms = np.stack(np.broadcast_arrays(
            np.zeros_like(t), N*np.log(np.expm1(2*kappa*t)), 2*N*kappa*t))
        log_f = np.log(2*N**2*t**2) - special.logsumexp(terms, axis=0)
    return _as_output(np.exp(log_f))


@dataclass(frozen=True)
class MarkovianOptimum:
    """Best Markovian QFI and the shot-noise precision it allows.

    .. attribute:: q

        :math:`[W(2/e^2) + 2]/(2\\kappa)`.

    .. attribute:: t_opt

        Optimal encoding time :math:`q/N`.

    .. attribute:: F_max

        QFI at :attr:`t_opt`.

    .. attribute:: F_max_large_n

        :math:`2q^2/(1 + e^{2q\\kappa})`.

    .. attribute:: repetitions

        :math:`T_R/t_{opt}`.

    .. attribute:: delta_omega_min

        :math:`[\\upsilon F_{max}]^{-1/2}`.

    .. attribute:: delta_omega_large_n

        Same with :attr:`F_max_large_n`.
    """

    kappa: float
    N: int
    T_R: float
    q: float
    t_opt: float
    F_max: float
    F_max_large_n: float
    repetitions: float
    delta_omega_min: float
    delta_omega_large_n: float


def markovian_optimum(kappa, N, T_R=1.0):
    """Return the :class:`MarkovianOptimum` for decay rate *kappa*.

    Raises
    ------
    DomainError
        If *kappa* or *T_R* is not positive.
    """
    if not kappa > 0:
        raise DomainError(f"kappa must be > 0, got {kappa}", value=kappa)
    if not T_R > 0:
        raise DomainError(f"T_R must be > 0, got {T_R}", value=T_R)
    q = (lambert_w(2*np.exp(-2)) + 2)/(2*kappa)
    t_opt = q/N
    f_max = 2*q**2/(1 + np.expm1(2*kappa*q/N)**N + np.exp(2*q*kappa))
    f_large = 2*q**2/(1 + np.exp(2*q*kappa))
    reps = T_R/t_opt
    if reps < 1:
        logger.info("T_R = %g is shorter than t_opt = %g; the precision "
                    "assumes a fractional repetition count %g", T_R, t_opt, reps)
    return MarkovianOptimum(
        kappa=kappa, N=N, T_R=T_R, q=float(q), t_opt=float(t_opt),
        F_max=float(f_max), F_max_large_n=float(f_large),
        repetitions=float(reps),
        delta_omega_min=cramer_rao_precision(f_max, reps),
        delta_omega_large_n=cramer_rao_precision(f_large, reps))


def markovian_optimum_numeric(kappa, N):
    """Maximize :func:`markovian_qfi` over time numerically.

    Returns
    -------
    tuple
        ``(t_star, F_star)``.
    """
    t_scale = 1/(kappa*N)
    res = optimize.minimize_scalar(lambda t: -markovian_qfi(kappa, N, t),
                                   bounds=(1e-3*t_scale, 10*t_scale),
                                   method="bounded",
                                   options={"xatol": 1e-10*t_scale})
    return float(res.x), float(-res.fun)


def cramer_rao_precision(F, repetitions=1):
    r"""Return the Cramér-Rao bound :math:`(\upsilon F)^{-1/2}`.

    Raises
    ------
    DomainError
        If *F* or *repetitions* is not positive. Fractional *repetitions*
        are allowed; they describe a resource time shorter than one
        encoding.
    """
    F = np.asarray(F, dtype=float)
    if np.any(F <= 0):
        raise DomainError("Cramer-Rao bound needs F > 0", value=F)
    if np.any(np.asarray(repetitions) <= 0):
        raise DomainError("Cramer-Rao bound needs repetitions > 0",
                          value=repetitions)
    return _as_output(1/np.sqrt(repetitions*F))


def fit_power_law(x, y):
    """Fit :math:`y = C x^k` by least squares in log-log space.

    Returns
    -------
    tuple
        ``(k, C)``.
    """
    k, log_c = np.polyfit(np.log(x), np.log(y), 1)
    return float(k), float(np.exp(log_c))


def stroboscopic_slope(t, F):
    """Fit :math:`F = s t^2 + b` by least squares.

    Returns
    -------
    tuple
        ``(s, b)``.
    """
    s, b = np.polyfit(np.asarray(t, dtype=float)**2, F, 1)
    return float(s), float(b)
