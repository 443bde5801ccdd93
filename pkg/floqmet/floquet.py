r""":mod:`floqmet.floquet` finds Floquet bound states of the driven atom.

Expanding a Floquet state in drive harmonics :math:`e^{in\omega_T t}` turns the
Floquet eigenproblem into the nonlinear eigenproblem
:math:`Y(\epsilon)\,\mathbf{c} = \epsilon\,\mathbf{c}` with

.. math::

    Y_{nm}(\epsilon) = \tilde f_{nm}
        + [\omega_0 + m\omega_T + \Sigma_m(\epsilon)]\delta_{nm},
    \qquad
    \tilde f_{nm} = \frac{A}{2}\delta_{nm} - \frac{A}{4}\delta_{|n-m|,1}.

Bound states live in the gaps between the copies
:math:`[m\omega_T + \omega_c - 4h, m\omega_T + \omega_c + 4h]` of the
reservoir band. They are normalized by
:math:`\mathbf{c}^\dagger G(\epsilon)\,\mathbf{c} = 1` with
:math:`G = 1 - \partial_\epsilon\Sigma`, and their residue is
:math:`Z = |\sum_n c_n|^2`.

Bound states
^^^^^^^^^^^^
.. autoclass:: FloquetBoundState
.. autofunction:: self_energy
.. autofunction:: self_energy_slope
.. autofunction:: floquet_matrix
.. autofunction:: normalization_matrix
.. autofunction:: gap_intervals
.. autofunction:: solve_fbs
.. autofunction:: fbs_derivatives
.. autofunction:: hellmann_feynman_slope
.. autofunction:: stroboscopic_prediction

Spectrum scans
^^^^^^^^^^^^^^
.. autoclass:: SpectrumScan
.. autofunction:: band_copies
.. autofunction:: scan_spectrum
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
from dataclasses import dataclass, field
from functools import partial
from typing import List, Optional

import numpy as np
from scipy import linalg, optimize, special

from floqmet.simutil import (
    ConfigurationError,
    DomainError,
    NumericalBranchError,
    StencilError,
    distribute,
)

logger = logging.getLogger(__name__)

#: Spacing of the quasienergy grid scanned for sign changes (units of h).
GRID_STEP = 1e-3
#: Closest approach to a band edge (units of h).
EDGE_MARGIN = 1e-4
# accepted |chi| at a bracketed root; larger values are eigenvalue switches
ROOT_RESIDUAL = 1e-8


@dataclass
class FloquetBoundState:
    """A Floquet bound state in the first Brillouin zone.

    .. attribute:: epsilon_b

        Quasienergy.

    .. attribute:: coeffs

        Real Fourier coefficients :math:`c_n`, :math:`n = -n_{max}..n_{max}`,
        normalized with :func:`normalization_matrix`.

    .. attribute:: Z

        Residue :math:`|\\sum_n c_n|^2`, the long-time stroboscopic
        :math:`|c(nT)|`.

    .. attribute:: d_epsilon_domega0

        :math:`\\partial\\epsilon_b/\\partial\\omega_0`, or *None* until
        computed by :func:`fbs_derivatives`.

    .. attribute:: d_Z2_domega0

        :math:`\\partial Z^2/\\partial\\omega_0`, or *None*.

    .. attribute:: n_max

        Fourier truncation order.

    .. attribute:: normalization_residual

        :math:`|\\mathbf{c}^\\dagger G\\mathbf{c} - 1|`.

    .. autoattribute:: Z2
    """

    epsilon_b: float
    coeffs: np.ndarray
    Z: float
    n_max: int
    d_epsilon_domega0: Optional[float] = None
    d_Z2_domega0: Optional[float] = None
    normalization_residual: float = 0.0

    @property
    def Z2(self):
        """Long-time stroboscopic excited-state population :math:`Z^2`."""
        return self.Z**2


@dataclass
class SpectrumScan:
    """Band copies and bound states over a swept parameter.

    .. attribute:: axis

        Name of the swept parameter, ``"A"`` or ``"omega_T"``.

    .. attribute:: values

        Swept parameter values.

    .. attribute:: band_edges

        Per value, the list of band intervals ``(lo, hi)`` clipped to the
        first Brillouin zone.

    .. attribute:: fbs_branches

        Per value, the quasienergies of the bound states found.

    .. attribute:: residues

        Per value, the residues *Z* matching :attr:`fbs_branches`.

    .. automethod:: rows
    """

    axis: str
    values: np.ndarray
    band_edges: List[list] = field(default_factory=list)
    fbs_branches: List[list] = field(default_factory=list)
    residues: List[list] = field(default_factory=list)

    def rows(self, max_branches=2):
        """Return table rows ``(value, count, eps_1, Z_1, eps_2, Z_2, ...)``."""
        rows = []
        for value, eps, zs in zip(self.values, self.fbs_branches,
                                  self.residues):
            row = [float(value), len(eps)]
            for k in range(max_branches):
                row += [eps[k], zs[k]] if k < len(eps) else [None, None]
            rows.append(row)
        return rows


def default_n_max(p):
    """Return the truncation order ``ceil(A/omega_T) + 10``."""
    return math.ceil(p.A/p.omega_T) + 10


def _detuning(epsilon, m, p):
    return np.asarray(epsilon, dtype=float) - m*p.omega_T - p.omega_c


def self_energy(epsilon, m, p):
    r"""Return the self-energy of Brillouin copy *m* outside its band.

    .. math::

        \Sigma_m(\epsilon) = \frac{2g^2}{\pi x} K\left(\frac{16h^2}{x^2}\right),
        \qquad x = \epsilon - m\omega_T - \omega_c

    Raises
    ------
    DomainError
        If :math:`|x| \le 4h`.
    """
    x = _detuning(epsilon, m, p)
    if np.any(np.abs(x) <= 4*p.h):
        raise DomainError("self-energy evaluated inside a band copy",
                          value=epsilon)
    result = 2*p.g**2*special.ellipk((4*p.h/x)**2)/(np.pi*x)
    return float(result) if result.ndim == 0 else result


def self_energy_slope(epsilon, m, p):
    r"""Return the energy derivative of the self-energy,
    :math:`\partial_\epsilon\Sigma_m = -2g^2E(16h^2/x^2)/[\pi(x^2-16h^2)]`.
    """
    x = _detuning(epsilon, m, p)
    if np.any(np.abs(x) <= 4*p.h):
        raise DomainError("self-energy slope evaluated inside a band copy",
                          value=epsilon)
    result = -2*p.g**2*special.ellipe((4*p.h/x)**2)/(np.pi*(x**2 - 16*p.h**2))
    return float(result) if result.ndim == 0 else result


def _diagonal(epsilon, p, n_max):
    m = np.arange(-n_max, n_max + 1)
    eps = np.asarray(epsilon, dtype=float)[..., None]
    return (p.omega0 + m*p.omega_T + 0.5*p.A
            + self_energy(eps, m, p))


def floquet_matrix(epsilon, p, n_max):
    """Return the real symmetric tridiagonal matrix :math:`Y(\\epsilon)`.

    Rows and columns run over harmonics ``-n_max..n_max``.
    """
    diag = _diagonal(epsilon, p, n_max)
    off = np.full(2*n_max, -0.25*p.A)
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def normalization_matrix(epsilon, p, n_max):
    """Return the diagonal of the normalization form
    :math:`G(\\epsilon) = 1 - \\partial_\\epsilon\\Sigma`.
    """
    m = np.arange(-n_max, n_max + 1)
    return 1 - self_energy_slope(epsilon, m, p)


def band_copies(p, zone_center=0.0):
    """Return band copies ``(lo, hi)`` clipped to the Brillouin zone."""
    half = 0.5*p.omega_T
    zlo, zhi = zone_center - half, zone_center + half
    m_lo = math.floor((zlo - p.omega_c - 4*p.h)/p.omega_T)
    m_hi = math.ceil((zhi - p.omega_c + 4*p.h)/p.omega_T)
    copies = []
    for m in range(m_lo, m_hi + 1):
        lo = m*p.omega_T + p.omega_c - 4*p.h
        hi = m*p.omega_T + p.omega_c + 4*p.h
        if hi > zlo and lo < zhi:
            copies.append((max(lo, zlo), min(hi, zhi)))
    return copies


def gap_intervals(p, zone_center=0.0):
    """Return the gaps of the Brillouin zone centered at *zone_center*.

    An empty list means the band copies cover the zone, which happens for
    :math:`\\omega_T \\le 8h`.
    """
    half = 0.5*p.omega_T
    cursor, zhi = zone_center - half, zone_center + half
    gaps = []
    for lo, hi in sorted(band_copies(p, zone_center)):
        if lo > cursor:
            gaps.append((cursor, lo))
        cursor = max(cursor, hi)
    if cursor < zhi:
        gaps.append((cursor, zhi))
    return gaps


def _band_edge_set(p, zone_center):
    # unclipped edges; a clipped copy ends at the zone boundary, not an edge
    half = 0.5*p.omega_T
    zlo, zhi = zone_center - half, zone_center + half
    m_lo = math.floor((zlo - p.omega_c - 4*p.h)/p.omega_T)
    m_hi = math.ceil((zhi - p.omega_c + 4*p.h)/p.omega_T)
    edges = set()
    for m in range(m_lo, m_hi + 1):
        for edge in (m*p.omega_T + p.omega_c - 4*p.h,
                     m*p.omega_T + p.omega_c + 4*p.h):
            if zlo <= edge <= zhi:
                edges.add(edge)
    return edges


def _chi_grid(eps, p, n_max):
    diag = _diagonal(eps, p, n_max)
    size = 2*n_max + 1
    mats = np.zeros((len(eps), size, size))
    idx = np.arange(size)
    mats[:, idx, idx] = diag
    mats[:, idx[:-1], idx[1:]] = -0.25*p.A
    mats[:, idx[1:], idx[:-1]] = -0.25*p.A
    eigs = np.linalg.eigvalsh(mats)
    nearest = np.take_along_axis(
        eigs, np.argmin(np.abs(eigs - eps[:, None]), axis=1)[:, None], axis=1)
    return nearest[:, 0] - eps


def _chi(eps, p, n_max):
    diag = _diagonal(eps, p, n_max)
    off = np.full(2*n_max, -0.25*p.A)
    eigs = linalg.eigvalsh_tridiagonal(diag, off)
    return eigs[np.argmin(np.abs(eigs - eps))] - eps


def _fold(eps, p, zone_center):
    half = 0.5*p.omega_T
    return (eps - zone_center + half) % p.omega_T - half + zone_center


def _bound_state(eps, p, n_max):
    diag = _diagonal(eps, p, n_max)
    off = np.full(2*n_max, -0.25*p.A)
    eigs, vecs = linalg.eigh_tridiagonal(diag, off)
    k = np.argmin(np.abs(eigs - eps))
    vec = vecs[:, k]
    gdiag = normalization_matrix(eps, p, n_max)
    form = float(np.dot(vec, gdiag*vec))
    if not (np.isfinite(form) and form > 0):
        raise NumericalBranchError(
            f"normalization form {form} at epsilon = {eps:.12g} is not positive",
            epsilon=eps)
    coeffs = vec/np.sqrt(form)
    residual = abs(float(np.dot(coeffs, gdiag*coeffs)) - 1)
    return FloquetBoundState(epsilon_b=float(eps), coeffs=coeffs,
                             Z=float(np.sum(coeffs)**2), n_max=n_max,
                             normalization_residual=residual)


def solve_fbs(p, n_max=None, zone_center=0.0, grid_step=GRID_STEP,
              edge_margin=EDGE_MARGIN):
    r"""Return the Floquet bound states in the zone around *zone_center*.

    Each gap, shrunk by *edge_margin* at band edges, is sampled with spacing
    *grid_step*. On the grid
    :math:`\chi(\epsilon) = \lambda_\mathrm{near}(\epsilon) - \epsilon`
    is formed from the eigenvalue of :math:`Y(\epsilon)` nearest
    :math:`\epsilon`. Sign changes are refined with :func:`scipy.optimize.brentq`
    and kept only if :math:`|\chi| < 10^{-8}` at the root, which rejects
    jumps between eigenvalue branches. A sign change between an edge and the
    first grid point is reported as edge-unresolved and not returned.

    Parameters
    ----------
    p: :class:`~floqmet.model.ModelParams`
    n_max: int
        Fourier truncation; defaults to :func:`default_n_max`.

    Returns
    -------
    list of :class:`FloquetBoundState`
        Sorted by quasienergy; empty if the zone has no gap or no root.

    Raises
    ------
    NumericalBranchError
        If a normalization form is not positive.
    """
    if n_max is None:
        n_max = default_n_max(p)
    gaps = gap_intervals(p, zone_center)
    if not gaps:
        logger.info("omega_T = %g <= 8h: band copies fill the zone, no gap",
                    p.omega_T)
        return []

    edges = _band_edge_set(p, zone_center)
    roots = []
    for lo, hi in gaps:
        lo_edge, hi_edge = lo in edges, hi in edges
        a = lo + edge_margin*p.h if lo_edge else lo
        b = hi - edge_margin*p.h if hi_edge else hi
        if b <= a:
            continue
        npts = max(int(math.ceil((b - a)/(grid_step*p.h))) + 1, 2)
        eps = np.linspace(a, b, npts)
        chi = _chi_grid(eps, p, n_max)

        for i in np.nonzero(np.sign(chi[:-1])*np.sign(chi[1:]) <= 0)[0]:
            if chi[i] == 0:
                root = eps[i]
            elif chi[i+1] == 0:
                continue
            else:
                root = optimize.brentq(_chi, eps[i], eps[i+1],
                                       args=(p, n_max), xtol=1e-14,
                                       rtol=4*np.finfo(float).eps)
            if abs(_chi(root, p, n_max)) < ROOT_RESIDUAL*p.h:
                roots.append(root)

        for edge, inner, is_edge in ((lo, a, lo_edge), (hi, b, hi_edge)):
            if not is_edge:
                continue
            near = edge + np.sign(inner - edge)*1e-12*p.h
            if np.sign(_chi(near, p, n_max)) != np.sign(_chi(inner, p, n_max)):
                logger.info("edge-unresolved root within %.1e h of band edge "
                            "%.6g (A=%g, omega_T=%g)", edge_margin, edge,
                            p.A, p.omega_T)

    states = []
    for root in sorted(_fold(r, p, zone_center) for r in roots):
        if any(_zone_distance(root, s.epsilon_b, p) < 1e-9*p.h
               for s in states):
            continue
        states.append(_bound_state(root, p, n_max))
    if len(states) > 1:
        logger.info("%d bound states at A=%g, omega_T=%g", len(states), p.A,
                    p.omega_T)
    return states


def hellmann_feynman_slope(state):
    r"""Return :math:`\sum_n c_n^2` of a normalized bound state.

    For the :math:`G`-normalized state this equals
    :math:`\partial\epsilon_b/\partial\omega_0`, since
    :math:`\partial_{\omega_0} Y` is the identity.
    """
    return float(np.sum(state.coeffs**2))


def _zone_distance(a, b, p):
    d = (a - b) % p.omega_T
    return min(d, p.omega_T - d)


def _matched(p, n_max, ref_eps, zone_center, delta):
    states = solve_fbs(p, n_max=n_max, zone_center=zone_center)
    if not states:
        raise StencilError(p.omega0, delta)
    best = min(states, key=lambda s: _zone_distance(s.epsilon_b, ref_eps, p))
    if _zone_distance(best.epsilon_b, ref_eps, p) > 10*delta + 1e-6:
        raise StencilError(p.omega0, delta)
    return best


def _central(p, n_max, ref, zone_center, delta):
    plus = _matched(p.replace(omega0=p.omega0 + delta), n_max, ref.epsilon_b,
                    zone_center, delta)
    minus = _matched(p.replace(omega0=p.omega0 - delta), n_max, ref.epsilon_b,
                     zone_center, delta)
    d_eps = (plus.epsilon_b - minus.epsilon_b)
    # unwrap a zone-boundary crossing inside the stencil
    d_eps -= p.omega_T*round(d_eps/p.omega_T)
    return d_eps/(2*delta), (plus.Z2 - minus.Z2)/(2*delta)


def fbs_derivatives(p, n_max=None, delta=1e-3, state=None, zone_center=0.0,
                    rtol=1e-4):
    r"""Return a bound state with its :math:`\omega_0`-derivatives filled in.

    Central differences with half-widths *delta* and *delta*/2 are combined
    by Richardson extrapolation. The two estimates must agree to *rtol*
    (relative); disagreement is logged and the extrapolated value returned.

    Parameters
    ----------
    state: :class:`FloquetBoundState`
        Bound state to differentiate. Defaults to the one with the largest
        residue at *p*.

    Raises
    ------
    StencilError
        If no bound state exists at *p* or one of the shifted points has none
        near the reference quasienergy.
    """
    if n_max is None:
        n_max = default_n_max(p)
    if state is None:
        states = solve_fbs(p, n_max=n_max, zone_center=zone_center)
        if not states:
            raise StencilError(p.omega0, delta)
        state = max(states, key=lambda s: s.Z)

    coarse = _central(p, n_max, state, zone_center, delta)
    fine = _central(p, n_max, state, zone_center, delta/2)
    extrap = [(4*f - c)/3 for c, f in zip(coarse, fine)]

    for name, c, f in zip(("d_epsilon", "d_Z2"), coarse, fine):
        scale = max(abs(f), 1e-12)
        if abs(c - f)/scale > rtol:
            logger.warning("%s/d_omega0 Richardson check failed at A=%g: "
                           "%.10g (delta) vs %.10g (delta/2)", name, p.A, c, f)

    hf = hellmann_feynman_slope(state)
    logger.debug("d_epsilon/d_omega0: finite difference %.10g, "
                 "Hellmann-Feynman %.10g", extrap[0], hf)
    if not 0 < extrap[0] <= 1 + 1e-6:
        logger.warning("d_epsilon/d_omega0 = %.6g outside (0, 1] at A=%g",
                       extrap[0], p.A)

    return FloquetBoundState(
        epsilon_b=state.epsilon_b, coeffs=state.coeffs, Z=state.Z,
        n_max=state.n_max, d_epsilon_domega0=float(extrap[0]),
        d_Z2_domega0=float(extrap[1]),
        normalization_residual=state.normalization_residual)


def stroboscopic_prediction(states, t):
    r"""Return the long-time stroboscopic amplitude
    :math:`\sum_l Z_l e^{-i\epsilon_l t}` at times *t* (multiples of *T*)."""
    t = np.asarray(t, dtype=float)
    result = np.zeros(t.shape, dtype=np.complex128)
    for state in states:
        result += state.Z*np.exp(-1j*state.epsilon_b*t)
    return result


def _scan_point(value, p, axis, n_max, zone_center):
    q = p.replace(**{axis: value})
    states = solve_fbs(q, n_max=n_max, zone_center=zone_center)
    return (band_copies(q, zone_center), [s.epsilon_b for s in states],
            [s.Z for s in states])


def scan_spectrum(p, axis, values, n_max=None, zone_center=0.0, workers=1,
                  comm=None):
    """Solve for bound states over a sweep of ``A`` or ``omega_T``.

    Points are independent and are evaluated with
    :func:`~floqmet.simutil.distribute`; results keep the order of *values*.

    Raises
    ------
    ConfigurationError
        For an unknown *axis* or non-positive values.
    """
    if axis not in ("A", "omega_T"):
        raise ConfigurationError(f"scan axis must be 'A' or 'omega_T', "
                                 f"got '{axis}'", key="axis")
    values = np.asarray(values, dtype=float)
    lower = 0 if axis == "omega_T" else -np.inf
    if np.any(values <= lower) or np.any(values < 0):
        raise ConfigurationError(f"{axis} scan values out of range",
                                 key="values")
    results = distribute(partial(_scan_point, p=p, axis=axis, n_max=n_max,
                                 zone_center=zone_center),
                         values, workers=workers, comm=comm)
    scan = SpectrumScan(axis=axis, values=values)
    for bands, eps, zs in results:
        scan.band_edges.append(bands)
        scan.fbs_branches.append(eps)
        scan.residues.append(zs)
    return scan
