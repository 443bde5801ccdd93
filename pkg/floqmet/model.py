r""":mod:`floqmet.model` holds the physical parameters and the reservoir.

A single two-level atom of frequency :math:`\omega_0` couples with strength
:math:`g` to the modes of a 2D square lattice with dispersion
:math:`\omega_k = \omega_c - 2h(\cos k_x + \cos k_y)`. Its level is modulated by
the drive :math:`f(t) = (A/2)[1 - \cos(\omega_T t)]`. Energies are in units of
the hopping rate :math:`h` and times in units of :math:`1/h`.

Parameters
^^^^^^^^^^
.. autoclass:: ModelParams
.. autoclass:: MarkovianModel

Drive
^^^^^
.. autofunction:: drive_field
.. autofunction:: drive_phase

Reservoir
^^^^^^^^^
.. autofunction:: band_edges
.. autofunction:: lattice_momenta
.. autofunction:: lattice_dispersion
.. autofunction:: spectral_density
.. autofunction:: integrate_band
.. autofunction:: correlation_function

Special functions
^^^^^^^^^^^^^^^^^
.. autofunction:: elliptic_K
.. autofunction:: elliptic_E
.. autofunction:: lambert_w
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

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from floqmet.simutil import ConfigurationError, DomainError

# half-width of the window around the van Hove point where the DOS is frozen
VAN_HOVE_WINDOW = 1e-6


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the driven atom and its lattice reservoir.

    .. attribute:: omega0

        Atomic transition frequency.

    .. attribute:: g

        Atom-reservoir coupling, normalized so that
        :math:`\\sum_k |g_k|^2 = g^2`.

    .. attribute:: h

        Lattice hopping rate.

    .. attribute:: omega_c

        Band-center frequency.

    .. attribute:: A

        Drive amplitude.

    .. attribute:: omega_T

        Drive angular frequency.

    .. attribute:: N

        Number of atoms in the GHZ probe.

    .. autoattribute:: period
    .. automethod:: replace
    .. automethod:: to_dict
    .. automethod:: from_dict
    """

    omega0: float = 1.0
    g: float = 1.0
    h: float = 1.0
    omega_c: float = 0.0
    A: float = 0.0
    omega_T: float = 12.0
    N: int = 20

    def __post_init__(self):
        for name in ("omega0", "g", "h", "omega_c", "A", "omega_T"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.integer, np.floating)) \
                    or not math.isfinite(value):
                raise ConfigurationError(
                    f"{name} must be a finite number, got {value!r}", key=name)
        if self.g < 0:
            raise ConfigurationError(f"g must be >= 0, got {self.g}", key="g")
        if self.h <= 0:
            raise ConfigurationError(f"h must be > 0, got {self.h}", key="h")
        if self.omega_T <= 0:
            raise ConfigurationError(
                f"omega_T must be > 0, got {self.omega_T}", key="omega_T")
        if self.A < 0:
            raise ConfigurationError(f"A must be >= 0, got {self.A}", key="A")
        if (isinstance(self.N, bool)
                or not isinstance(self.N, (int, float, np.integer, np.floating))
                or not math.isfinite(self.N)
                or int(self.N) != self.N or self.N < 1):
            raise ConfigurationError(
                f"N must be a positive integer, got {self.N!r}", key="N")
        object.__setattr__(self, "N", int(self.N))

    @property
    def period(self):
        """Drive period :math:`T = 2\\pi/\\omega_T`."""
        return 2*np.pi/self.omega_T

    def replace(self, **changes):
        """Return a copy with *changes* applied (and validated)."""
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        """Return the flat key-value form used in config files and headers."""
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, mapping):
        """Build from a mapping of config keys.

        Raises
        ------
        ConfigurationError
            For keys that are not model parameters.
        """
        known = {f.name for f in dataclasses.fields(cls)}
        for key in mapping:
            if key not in known:
                raise ConfigurationError(f"unknown model parameter '{key}'",
                                         key=key)
        return cls(**mapping)


@dataclass(frozen=True)
class MarkovianModel:
    """Markovian (Born-Markov) description of the atom's decay.

    .. attribute:: kappa

        Decay rate :math:`\\kappa = \\pi J(\\omega_0)`.

    .. attribute:: delta

        Renormalized-frequency shift :math:`\\Delta(\\omega_0)`.

    .. attribute:: T_R

        Total duration available for repeated measurements.

    .. automethod:: repetitions
    """

    kappa: float
    delta: float = 0.0
    T_R: float = 1.0

    def __post_init__(self):
        if not self.kappa >= 0:
            raise ConfigurationError(f"kappa must be >= 0, got {self.kappa}",
                                     key="kappa")
        if not self.T_R > 0:
            raise ConfigurationError(f"T_R must be > 0, got {self.T_R}",
                                     key="T_R")

    def repetitions(self, t):
        """Return the repetition count :math:`T_R/t` for encoding time *t*."""
        return self.T_R/t


def drive_field(t, p):
    """Return the level modulation :math:`(A/2)[1-\\cos(\\omega_T t)]`."""
    return 0.5*p.A*(1 - np.cos(p.omega_T*t))


def drive_phase(t, p, driven=True):
    r"""Return :math:`\int_0^t [\omega_0 + f(s)]\,ds`.

    With *driven* false the drive is switched off and the phase is
    :math:`\omega_0 t`.
    """
    t = np.asarray(t, dtype=float)
    if not driven or p.A == 0:
        return p.omega0*t
    return p.omega0*t + 0.5*p.A*(t - np.sin(p.omega_T*t)/p.omega_T)


def band_edges(p):
    """Return the lower and upper edge of the reservoir band."""
    return p.omega_c - 4*p.h, p.omega_c + 4*p.h


def lattice_momenta(L):
    """Return the *L* allowed momenta :math:`2\\pi n/L` of a periodic chain."""
    if L < 2 or L % 2:
        raise ConfigurationError(f"L must be an even integer >= 2, got {L}",
                                 key="L")
    return 2*np.pi*np.arange(L)/L


def lattice_dispersion(kx, ky, p):
    """Return :math:`\\omega_c - 2h(\\cos k_x + \\cos k_y)`."""
    return p.omega_c - 2*p.h*(np.cos(kx) + np.cos(ky))


def lattice_frequencies(p, L):
    """Return the flat array of all :math:`L^2` mode frequencies."""
    k = lattice_momenta(L)
    kx, ky = np.meshgrid(k, k, indexing="ij")
    return lattice_dispersion(kx, ky, p).ravel()


def spectral_density(omega, p):
    r"""Return :math:`J(\omega)` of the lattice reservoir.

    .. math::

        J(\omega) = \frac{g^2}{2\pi^2 h}\,
            K\left(1 - \frac{(\omega-\omega_c)^2}{16h^2}\right)

    inside the band and zero outside, where :math:`K` is taken in the
    parameter convention of :func:`elliptic_K`. Inside a window of
    half-width ``1e-6 h`` around the logarithmic van Hove point
    :math:`\omega = \omega_c` the density is held at its window-edge value.
    """
    omega = np.asarray(omega, dtype=float)
    x = np.abs(omega - p.omega_c)
    inside = x < 4*p.h
    x = np.clip(x, VAN_HOVE_WINDOW*p.h, 4*p.h)
    m = 1 - (x/(4*p.h))**2
    result = np.where(inside, p.g**2/(2*np.pi**2*p.h)*special.ellipk(m), 0.0)
    if result.ndim == 0:
        return float(result)
    return result


def integrate_band(func, p, epsabs=1e-13, epsrel=1e-11, limit=200):
    """Integrate *func* over the band, split at the van Hove point.

    The split keeps :math:`\\omega_c` an interval endpoint, so that
    quadrature nodes never land on the singular point.
    """
    lo, hi = band_edges(p)
    total = 0.0
    for a, b in ((lo, p.omega_c), (p.omega_c, hi)):
        val, _ = integrate.quad(func, a, b, epsabs=epsabs, epsrel=epsrel,
                                limit=limit)
        total += val
    return total


def correlation_function(t, p):
    r"""Return the reservoir correlation function :math:`\nu(t)`.

    .. math::

        \nu(t) = \int J(\omega) e^{-i\omega t}\,d\omega
            = g^2 e^{-i\omega_c t} J_0(2ht)^2

    The lattice sum factorizes into two independent chains, each of which
    contributes a Bessel function :math:`J_0(2ht)`.
    """
    t = np.asarray(t, dtype=float)
    return p.g**2*np.exp(-1j*p.omega_c*t)*special.j0(2*p.h*t)**2


def elliptic_K(x):
    r"""Complete elliptic integral of the first kind in parameter form.

    :math:`K(x) = \int_0^{\pi/2} [1 - x\sin^2\phi]^{-1/2}\,d\phi`

    Raises
    ------
    DomainError
        If any *x* >= 1.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x >= 1):
        raise DomainError(f"elliptic_K requires x < 1, got max {np.max(x)}",
                          value=np.max(x))
    result = special.ellipk(x)
    return float(result) if result.ndim == 0 else result


def elliptic_E(x):
    r"""Complete elliptic integral of the second kind in parameter form.

    :math:`E(x) = \int_0^{\pi/2} [1 - x\sin^2\phi]^{1/2}\,d\phi`

    Raises
    ------
    DomainError
        If any *x* > 1.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x > 1):
        raise DomainError(f"elliptic_E requires x <= 1, got max {np.max(x)}",
                          value=np.max(x))
    result = special.ellipe(x)
    return float(result) if result.ndim == 0 else result


def lambert_w(z):
    """Principal branch of the Lambert W function.

    Raises
    ------
    DomainError
        If any *z* < -1/e.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < -np.exp(-1) - 1e-15):
        raise DomainError(f"lambert_w requires z >= -1/e, got min {np.min(z)}",
                          value=np.min(z))
    result = special.lambertw(np.maximum(z, -np.exp(-1)), 0).real
    return float(result) if result.ndim == 0 else result
