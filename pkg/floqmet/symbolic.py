"""Symbolic drive expressions.

The closed-form drive phase used by the amplitude solver is also available as
a :mod:`pymbolic` expression. :func:`~floqmet.dynamics.decoupled_amplitude`
evaluates it and its symbolic :math:`\\omega_0`-derivative for the exact
:math:`g=0` solution; its time derivative reproduces the level modulation.

.. autofunction:: diff
.. autofunction:: drive_field_expr
.. autofunction:: drive_phase_expr
.. autofunction:: evaluate
.. autoclass:: EvaluationMapper
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

from numbers import Number

import numpy as np
import pymbolic as pmbl
import pymbolic.mapper.evaluator as ev
import pymbolic.primitives as prim

TIME = pmbl.var("t")


def diff(var):
    """Return the symbolic derivative operator with respect to *var*."""
    from pymbolic.mapper.differentiator import DifferentiationMapper

    def func_map(arg_index, func, arg, allowed_nonsmoothness):
        if func == pmbl.var("sin"):
            return pmbl.var("cos")(*arg)
        elif func == pmbl.var("cos"):
            return -pmbl.var("sin")(*arg)
        else:
            raise ValueError(f"no derivative rule for '{func}'")

    return DifferentiationMapper(var, func_map=func_map)


def drive_field_expr():
    """Return :math:`(A/2)[1 - \\cos(\\omega_T t)]` in the variables
    ``t``, ``A``, ``omega_T``."""
    amp, omega_t = pmbl.var("A"), pmbl.var("omega_T")
    return amp/2*(1 - pmbl.var("cos")(omega_t*TIME))


def drive_phase_expr(driven=True):
    """Return the accumulated phase :math:`\\int_0^t [\\omega_0 + f(s)]\\,ds`.

    Without the drive this is :math:`\\omega_0 t`.
    """
    phase = pmbl.var("omega0")*TIME
    if driven:
        amp, omega_t = pmbl.var("A"), pmbl.var("omega_T")
        phase += amp/2*(TIME - pmbl.var("sin")(omega_t*TIME)/omega_t)
    return phase


class EvaluationMapper(ev.EvaluationMapper):
    """Evaluates drive expressions on numbers or :mod:`numpy` arrays.

    Inherits from :class:`pymbolic.mapper.evaluator.EvaluationMapper`.
    """

    def map_call(self, expr):
        """Map ``sin``/``cos`` calls to :mod:`numpy`."""
        assert isinstance(expr.function, prim.Variable)
        par, = expr.parameters
        if expr.function.name == "sin":
            return self._apply(np.sin, self.rec(par))
        elif expr.function.name == "cos":
            return self._apply(np.cos, self.rec(par))
        else:
            raise ValueError(f"unrecognized function '{expr.function}'")

    @staticmethod
    def _apply(func, val):
        if isinstance(val, Number):
            return float(func(val))
        return func(np.asarray(val))


def evaluate(expr, p, t):
    """Evaluate *expr* for :class:`~floqmet.model.ModelParams` *p* at *t*."""
    context = p.to_dict()
    context["t"] = t
    return EvaluationMapper(context)(expr)
