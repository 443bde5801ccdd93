"""Simulation support: error types, step bookkeeping and scan distribution.

Exceptions
^^^^^^^^^^
.. autoclass:: ConfigurationError
.. autoclass:: DomainError
.. autoclass:: SolverInstabilityError
.. autoclass:: NumericalBranchError
.. autoclass:: StencilError
.. autoclass:: InfeasibleTargetError
.. autoclass:: SizeError

Utilities
^^^^^^^^^
.. autofunction:: check_step
.. autofunction:: stroboscopic_timestep
.. autofunction:: get_rank
.. autofunction:: distribute
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

logger = logging.getLogger(__name__)


class ConfigurationError(ValueError):
    """Invalid parameters, step sizes or configuration entries.

    .. attribute:: key

        Name of the offending parameter or config key, or *None*.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class DomainError(ValueError):
    """Argument outside the real domain of a function.

    .. attribute:: value
    """

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class SolverInstabilityError(RuntimeError):
    """The amplitude left the unit disk during time integration.

    .. attribute:: step
    .. attribute:: t
    .. attribute:: value
    """

    def __init__(self, step, t, value):
        super().__init__(
            f"|c| = {abs(value):.6g} exceeds 1 at step {step} (t = {t:.6g})")
        self.step = step
        self.t = t
        self.value = value

    def __reduce__(self):
        return (type(self), (self.step, self.t, self.value))


class NumericalBranchError(RuntimeError):
    """A bound-state branch could not be resolved.

    Raised when a normalization form comes out non-positive or non-finite,
    or when a refined residue misses its target.

    .. attribute:: epsilon
    """

    def __init__(self, message, epsilon=None):
        super().__init__(message)
        self.epsilon = epsilon


class StencilError(RuntimeError):
    """A bound state disappeared inside a finite-difference stencil.

    .. attribute:: omega0
    .. attribute:: delta
    """

    def __init__(self, omega0, delta):
        super().__init__(
            f"no bound state near omega0 = {omega0:.8g} "
            f"(stencil half-width {delta:.3g}); reduce delta")
        self.omega0 = omega0
        self.delta = delta

    def __reduce__(self):
        return (type(self), (self.omega0, self.delta))


class InfeasibleTargetError(ValueError):
    """Requested residue target outside the achievable range.

    .. attribute:: target
    .. attribute:: achievable

        (min, max) of the tabulated residue over the searched region.
    """

    def __init__(self, target, achievable):
        lo, hi = achievable
        super().__init__(
            f"target Z^2 = {target:.6g} outside achievable range "
            f"[{lo:.6g}, {hi:.6g}]")
        self.target = target
        self.achievable = achievable

    def __reduce__(self):
        return (type(self), (self.target, self.achievable))


class SizeError(ValueError):
    """Problem too large for a dense construction."""


def check_step(step, interval):
    """
    Check step number against a user-specified interval.

    - Negative numbers mean 'never'.
    - Zero means 'always'.

    Used for periodic status messages during long solves.
    """
    if interval == 0:
        return True
    elif interval < 0:
        return False
    elif step % interval == 0:
        return True
    return False


def stroboscopic_timestep(dt, period, h=1.0, driven=True,
                          max_period_fraction=1/40, max_band_fraction=0.05):
    """Return the step adjusted to divide *period* exactly.

    The adjusted step is ``period/ceil(period/dt)``, so that multiples of the
    drive period fall on the grid. It must resolve the band
    (``dt <= max_band_fraction/h``) and, for driven runs, the drive
    (``dt <= max_period_fraction*period``).

    Raises
    ------
    ConfigurationError
        If *dt* is not positive or the adjusted step violates a bound.
    """
    if not dt > 0:
        raise ConfigurationError(f"time step must be positive, got {dt}",
                                 key="dt")
    nsub = math.ceil(period/dt - 1e-9)
    dt_adj = period/nsub
    if dt_adj > max_band_fraction/h * (1 + 1e-12):
        raise ConfigurationError(
            f"dt = {dt_adj:.4g} does not resolve the band "
            f"(need dt <= {max_band_fraction/h:.4g})", key="dt")
    if driven and dt_adj > max_period_fraction*period * (1 + 1e-12):
        raise ConfigurationError(
            f"dt = {dt_adj:.4g} does not resolve the drive "
            f"(need dt <= {max_period_fraction*period:.4g})", key="dt")
    if dt_adj != dt:
        logger.debug("time step adjusted from %g to %g (%d steps per period)",
                     dt, dt_adj, nsub)
    return dt_adj


def get_rank(comm=None):
    """Return the rank of this process in *comm*, or 0 without one."""
    if comm is None:
        return 0
    return comm.Get_rank()


def distribute(func, values, workers=1, comm=None):
    """Evaluate *func* at each of *values* and return results in input order.

    Parameters
    ----------
    func:
        Callable of one argument. Must be picklable when *workers* > 1.
    values:
        Sequence of scan points.
    workers: int
        Size of a local process pool; 1 evaluates serially.
    comm:
        Optional MPI communicator. When given, points are dealt round-robin
        over its ranks and the gathered results are returned on every rank.
    """
    values = list(values)
    if comm is not None and comm.Get_size() > 1:
        rank = comm.Get_rank()
        nranks = comm.Get_size()
        mine = [(i, func(values[i])) for i in range(rank, len(values), nranks)]
        gathered = comm.allgather(mine)
        results = [None]*len(values)
        for part in gathered:
            for i, res in part:
                results[i] = res
        return results

    if workers > 1 and len(values) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, values))

    return [func(v) for v in values]
