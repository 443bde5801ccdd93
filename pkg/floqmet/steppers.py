"""Fixed-grid time stepping.

.. autofunction:: advance_state
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


def advance_state(rhs, timestepper, checkpoint, state, dt, nsteps, t=0.0,
                  istep=0):
    """Advance *state* over *nsteps* steps of size *dt* on a fixed grid.

    Times are formed as ``t + k*dt`` rather than accumulated, so a grid that
    divides the drive period lands exactly on its multiples.

    Parameters
    ----------
    rhs
        Function ``rhs(t, state)`` returning the time derivative of the state.
    timestepper
        Function ``timestepper(state=, t=, dt=, rhs=)`` returning the state
        after one step, e.g. :func:`~floqmet.integrators.rk4_step`.
    checkpoint
        Function called as ``checkpoint(state=, step=, t=, dt=)`` at every
        grid point, the first and last included. A non-zero return value
        stops the stepper after that grid point.
    state: numpy.ndarray
    dt: float
    nsteps: int
    t: float
        Time of the first grid point.
    istep: int
        Step number of the first grid point.

    Returns
    -------
    istep: int
        Step number of the last grid point visited.
    t: float
        Its time.
    state: numpy.ndarray
    """
    t0, first = t, istep
    for k in range(nsteps + 1):
        istep, t = first + k, t0 + k*dt
        if checkpoint(state=state, step=istep, t=t, dt=dt) or k == nsteps:
            break
        state = timestepper(state=state, t=t, dt=dt, rhs=rhs)
    return istep, t, state
