r""":mod:`floqmet.qfi` evaluates the quantum Fisher information of a GHZ probe.

Each of the *N* atoms of the probe evolves with the same amplitude
:math:`c(t)`. The probe state splits into a direct sum
:math:`\rho = \rho_1 \oplus \rho_2`, with the :math:`2\times 2` coherence block

.. math::

    \rho_1 = \frac{1}{2}\begin{pmatrix} p^N & c^N \\ \bar c^N & 1+(1-p)^N
    \end{pmatrix},
    \qquad p = |c|^2,

and the diagonal population block :math:`\rho_2` with entries
:math:`\tfrac12 p^m(1-p)^{N-m}`, :math:`0<m<N`. The information is additive,
:math:`F = F^{(1)} + F^{(2)}`.

Results
^^^^^^^
.. autoclass:: QfiResult
.. autoclass:: QfiSeries

Components
^^^^^^^^^^
.. autofunction:: population_derivative
.. autofunction:: qfi_f2
.. autofunction:: qfi_f1
.. autofunction:: qfi_series
.. autofunction:: qfi_from_eigensystem

Full density matrix
^^^^^^^^^^^^^^^^^^^
.. autofunction:: ghz_density_matrix
.. autofunction:: brute_force_qfi

Steady state
^^^^^^^^^^^^
.. autofunction:: steady_state_eigensystem
.. autofunction:: y_n_from_eigensystem
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
from scipy import linalg, special, stats

from floqmet.simutil import SizeError

logger = logging.getLogger(__name__)

#: Population clamp applied before evaluating closed forms.
P_CLAMP = 1e-12
#: Eigenvalues below this fraction of the trace count as zero.
EIGENVALUE_THRESHOLD = 1e-14
# above this atom count the population block is summed in log space
LOG_SPACE_N = 30
#: Largest probe built as a dense 2^N x 2^N matrix.
MAX_BRUTE_FORCE_N = 6


@dataclass(frozen=True)
class QfiResult:
    """QFI at one time point.

    .. attribute:: t
    .. attribute:: F_total
    .. attribute:: F1

        Contribution of the coherence block :math:`\\rho_1`.

    .. attribute:: F2

        Contribution of the population block :math:`\\rho_2`.
    """

    t: float
    F_total: float
    F1: float
    F2: float


@dataclass
class QfiSeries:
    """QFI along a trajectory, stored column-wise.

    Iterating yields one :class:`QfiResult` per time point.

    .. automethod:: columns
    """

    t: np.ndarray
    F_total: np.ndarray
    F1: np.ndarray
    F2: np.ndarray

    def __len__(self):
        return len(self.t)

    def __getitem__(self, i):
        return QfiResult(t=float(self.t[i]), F_total=float(self.F_total[i]),
                         F1=float(self.F1[i]), F2=float(self.F2[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def columns(self):
        """Return export column names and arrays.

        The normalized columns are *nan* at :math:`t = 0`.
        """
        with np.errstate(divide="ignore", invalid="ignore"):
            per_t2 = np.where(self.t > 0, self.F_total/self.t**2, np.nan)
            per_t = np.where(self.t > 0, self.F_total/self.t, np.nan)
        names = ["t", "F_total", "F1", "F2", "F_over_t2", "F_over_t"]
        return names, [self.t, self.F_total, self.F1, self.F2, per_t2, per_t]


def population_derivative(c, dc):
    r"""Return :math:`p' = 2\,\mathrm{Re}(\bar c\,c')`.

    Values at the rounding level of :math:`|c||c'|` are set to zero, so that
    a pure phase sensitivity yields exactly :math:`p' = 0`.
    """
    c = np.asarray(c, dtype=np.complex128)
    dc = np.asarray(dc, dtype=np.complex128)
    dp = 2*np.real(np.conj(c)*dc)
    floor = 8*np.finfo(float).eps*np.abs(c)*np.abs(dc)
    return np.where(np.abs(dp) <= floor, 0.0, dp)


def _f2_closed_form(p, dp, N):
    q = 1 - p
    bracket = 1/q - N*p*q**(N-2) - N*p**(N-1)
    return N*dp**2/(2*p)*bracket


def _f2_log_space(p, dp, N):
    m = np.arange(1, N)[:, None]
    logpmf = stats.binom.logpmf(m, N, p[None, :])
    score = m/p[None, :] - (N - m)/(1 - p[None, :])
    # sum of pmf*score^2; score^2 enters as a log-sum-exp weight
    total = special.logsumexp(logpmf, b=score**2, axis=0)
    return 0.5*dp**2*np.exp(total)


def qfi_f2(p_t, dp_t, N):
    r"""Return the QFI of the population block :math:`\rho_2`.

    .. math::

        F^{(2)} = \frac{1}{2}\sum_{m=1}^{N-1}\binom{N}{m}
            \frac{\{[p^m(1-p)^{N-m}]'\}^2}{p^m(1-p)^{N-m}}
        = \frac{Np'^2}{2p}\left[\frac{1}{1-p} - Np(1-p)^{N-2} - Np^{N-1}\right]

    The closed form is used up to ``N = 30``; larger probes sum the binomial
    terms in log space. *p_t* is clamped into ``[1e-12, 1-1e-12]``.
    """
    scalar = np.ndim(p_t) == 0 and np.ndim(dp_t) == 0
    p, dp = np.broadcast_arrays(np.asarray(p_t, dtype=float),
                                np.asarray(dp_t, dtype=float))
    p = np.clip(p.ravel(), P_CLAMP, 1 - P_CLAMP)
    dp = dp.ravel()
    if N == 1:
        result = np.zeros_like(p)
    elif N > LOG_SPACE_N:
        result = _f2_log_space(p, dp, N)
    else:
        result = _f2_closed_form(p, dp, N)
    result = np.where(dp == 0, 0.0, np.maximum(result, 0.0))
    if scalar:
        return float(result[0])
    return result.reshape(np.broadcast(p_t, dp_t).shape)


def _f1_lyapunov(c, dc, N):
    # F = Tr(drho L) with drho = (L rho + rho L)/2, solved in closed form for
    # rho_1 = [[a, b], [b*, d]]/2, using det = (p(1-p))^N/4 exactly
    p = np.clip(np.abs(c)**2, P_CLAMP, 1 - P_CLAMP)
    q = 1 - p
    dp = population_derivative(c, dc)
    s = 1 + p**N + q**N
    dcN_sq = N**2*p**(N-1)*np.abs(dc)**2
    log_det_rate = N*(1 - 2*p)*dp/(p*q)
    a_rate = N*dp/p
    d = 1 + q**N
    dd = -N*q**(N-1)*dp
    coupling = N*p**N*dp/q

    term_a = N**2*p**(N-2)*dp**2
    term_d = dd**2/d
    term_mix = -coupling*(a_rate + dd/d)/s
    term_off = (4*dcN_sq - N*p**(N-1)*dp*log_det_rate)/s
    return np.maximum(0.5*(term_a + term_d + term_mix + term_off), 0.0)


def _rho1_blocks(c, dc, N):
    p = np.abs(c)**2
    dp = population_derivative(c, dc)
    cN = c**N
    dcN = N*c**(N-1)*dc
    rho = np.zeros(c.shape + (2, 2), dtype=np.complex128)
    drho = np.zeros_like(rho)
    rho[..., 0, 0] = p**N
    rho[..., 0, 1] = cN
    rho[..., 1, 0] = np.conj(cN)
    rho[..., 1, 1] = 1 + (1 - p)**N
    drho[..., 0, 0] = N*p**(N-1)*dp
    drho[..., 0, 1] = dcN
    drho[..., 1, 0] = np.conj(dcN)
    drho[..., 1, 1] = -N*(1 - p)**(N-1)*dp
    return rho/2, drho/2


def qfi_from_eigensystem(lam, dlam, vecs, dvecs,
                         threshold=EIGENVALUE_THRESHOLD):
    r"""Sum the eigen-expansion of the QFI over nonzero eigenvalues.

    .. math::

        F = \sum_i \frac{\lambda_i'^2}{\lambda_i}
            + \sum_i 4\lambda_i\langle\lambda_i'|\lambda_i'\rangle
            - \sum_{i,j}\frac{8\lambda_i\lambda_j}{\lambda_i+\lambda_j}
              |\langle\lambda_i|\lambda_j'\rangle|^2

    Arrays may carry leading stack dimensions: *lam* and *dlam* have shape
    ``(..., n)``, *vecs* and *dvecs* hold eigenvectors as columns,
    ``(..., n, n)``. Eigenvalues below *threshold* times the trace are
    dropped; a dropped eigenvalue with non-negligible derivative is logged.
    """
    lam = np.asarray(lam, dtype=float)
    dlam = np.asarray(dlam, dtype=float)
    trace = np.sum(lam, axis=-1, keepdims=True)
    keep = lam > threshold*np.abs(trace)

    dropped = ~keep & (np.abs(dlam) > 1e-10*np.abs(trace))
    if np.any(dropped):
        logger.warning("dropped %d zero eigenvalue(s) with nonzero derivative "
                       "(max |lambda'| = %.3g)", int(np.count_nonzero(dropped)),
                       float(np.max(np.abs(dlam[dropped]))))

    safe = np.where(keep, lam, 1.0)
    first = np.sum(np.where(keep, dlam**2/safe, 0.0), axis=-1)

    dnorm = np.sum(np.abs(dvecs)**2, axis=-2)
    second = np.sum(np.where(keep, 4*lam*dnorm, 0.0), axis=-1)

    overlap = np.abs(np.einsum("...ki,...kj->...ij", np.conj(vecs), dvecs))**2
    pair = keep[..., :, None] & keep[..., None, :]
    lsum = lam[..., :, None] + lam[..., None, :]
    weight = np.where(pair, 8*lam[..., :, None]*lam[..., None, :]
                      / np.where(pair, lsum, 1.0), 0.0)
    third = np.sum(weight*overlap, axis=(-2, -1))
    return first + second - third


def _f1_eigen(c, dc, N):
    rho, drho = _rho1_blocks(c, dc, N)
    lam, vecs = np.linalg.eigh(rho)
    # drho in the eigenbasis
    mat = np.einsum("...ki,...kl,...lj->...ij", np.conj(vecs), drho, vecs)
    dlam = np.real(np.einsum("...ii->...i", mat))
    gap = lam[..., None, :] - lam[..., :, None]
    offdiag = ~np.eye(2, dtype=bool)
    nondeg = offdiag & (np.abs(gap) > 1e-300)
    # <k|d i> = <k|drho|i>/(lam_i - lam_k) in the gauge <i|d i> = 0
    coeff = np.where(nondeg, mat/np.where(nondeg, gap, 1.0), 0.0)
    dvecs = np.einsum("...lk,...ki->...li", vecs, coeff)
    return np.maximum(qfi_from_eigensystem(lam, dlam, vecs, dvecs), 0.0)


def qfi_f1(c, dc, N, method="lyapunov"):
    r"""Return the QFI of the coherence block :math:`\rho_1`.

    Parameters
    ----------
    c, dc:
        Amplitude and its :math:`\omega_0`-derivative (scalars or arrays).
    N: int
        Atom count.
    method: str
        ``"lyapunov"`` (default) solves :math:`\rho_1' =
        \frac12\{L, \rho_1\}` for the symmetric logarithmic derivative in
        closed form and returns :math:`\mathrm{Tr}(\rho_1' L)`, using the exact
        determinant :math:`\det\rho_1 = [p(1-p)]^N/4`. It keeps full relative
        accuracy when :math:`p^N` underflows the eigenvalue scale.
        ``"eigen"`` diagonalizes :math:`\rho_1`, differentiates its
        eigenvectors by first-order perturbation theory and sums
        :func:`qfi_from_eigensystem`.
    """
    scalar = np.ndim(c) == 0 and np.ndim(dc) == 0
    c, dc = np.broadcast_arrays(np.asarray(c, dtype=np.complex128),
                                np.asarray(dc, dtype=np.complex128))
    if np.any(np.abs(c) > 1 + 1e-9):
        raise ValueError("qfi_f1 requires |c| <= 1")
    if method == "lyapunov":
        result = _f1_lyapunov(c, dc, N)
    elif method == "eigen":
        result = _f1_eigen(c, dc, N)
    else:
        raise ValueError(f"unknown method '{method}'")
    return float(result) if scalar else result


def qfi_series(traj, N, method="lyapunov"):
    """Return the :class:`QfiSeries` of trajectory *traj* for *N* atoms.

    Raises
    ------
    ValueError
        If the trajectory carries no sensitivity.
    """
    if traj.dc_domega0 is None:
        raise ValueError("trajectory has no omega0-sensitivity; "
                         "solve with sensitivities enabled")
    c = np.asarray(traj.c)
    dc = np.asarray(traj.dc_domega0)
    F2 = qfi_f2(np.abs(c)**2, population_derivative(c, dc), N)
    F1 = qfi_f1(c, dc, N, method=method)
    return QfiSeries(t=np.asarray(traj.times), F_total=F1 + F2, F1=F1, F2=F2)


def ghz_density_matrix(c, N):
    r"""Return the full :math:`2^N\times 2^N` probe state for amplitude *c*.

    Basis states are tensor products with :math:`|e\rangle` first, so index 0
    is :math:`|e\rangle^{\otimes N}` and the last index is
    :math:`|g\rangle^{\otimes N}`.
    """
    if N > MAX_BRUTE_FORCE_N:
        raise SizeError(f"dense probe state limited to N <= "
                        f"{MAX_BRUTE_FORCE_N}, got {N}")
    p = abs(c)**2
    single = np.diag([p, 1 - p]).astype(np.complex128)
    rho = np.ones((1, 1), dtype=np.complex128)
    for _ in range(N):
        rho = np.kron(rho, single)
    last = 2**N - 1
    rho[last, last] += 1
    rho[0, last] += c**N
    rho[last, 0] += np.conj(c)**N
    return rho/2


def _degenerate_groups(lam, tol):
    groups = [[0]]
    for i in range(1, len(lam)):
        if lam[i] - lam[groups[-1][-1]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _aligned_eigensystem(rho, ref_vecs, groups):
    # eigenvectors of rho matched to ref_vecs group by group (largest overlap),
    # then rotated within each group by the polar factor of the overlap
    _, vecs = np.linalg.eigh(rho)
    aligned = np.empty_like(ref_vecs)
    for group in groups:
        ref = ref_vecs[:, group]
        weight = np.sum(np.abs(ref.conj().T @ vecs)**2, axis=0)
        pick = np.sort(np.argsort(weight)[::-1][:len(group)])
        sub = vecs[:, pick]
        rot, _ = linalg.polar(sub.conj().T @ ref)
        aligned[:, group] = sub @ rot
    lam = np.real(np.einsum("ki,kl,li->i", aligned.conj(), rho, aligned))
    return lam, aligned


def _brute_force_at_step(c, dc, N, delta, lam0, vecs0, groups):
    lam_p, vec_p = _aligned_eigensystem(ghz_density_matrix(c + delta*dc, N),
                                        vecs0, groups)
    lam_m, vec_m = _aligned_eigensystem(ghz_density_matrix(c - delta*dc, N),
                                        vecs0, groups)
    dlam = (lam_p - lam_m)/(2*delta)
    dvecs = (vec_p - vec_m)/(2*delta)
    return float(qfi_from_eigensystem(lam0, dlam, vecs0, dvecs))


def brute_force_qfi(c, dc, N, delta=1e-4, richardson_tol=1e-5):
    """Return the QFI from the full probe state by numerical differentiation.

    The state is built with :func:`ghz_density_matrix` at *c* and at
    :math:`c \\pm \\delta\\,c'` and diagonalized. Eigenvectors of the shifted
    states are aligned to the reference ones, inside degenerate groups by a
    polar (Procrustes) rotation. Eigen-derivatives come from central
    differences and enter :func:`qfi_from_eigensystem`. The result at
    *delta* is compared with the one at *delta*/2, and a relative difference
    above *richardson_tol* is logged.

    Raises
    ------
    SizeError
        If *N* > 6.
    """
    if N > MAX_BRUTE_FORCE_N:
        raise SizeError(f"brute-force QFI limited to N <= {MAX_BRUTE_FORCE_N}, "
                        f"got {N}")
    c = complex(c)
    dc = complex(dc)
    rho = ghz_density_matrix(c, N)
    lam0, vecs0 = np.linalg.eigh(rho)
    groups = _degenerate_groups(lam0, 1e-10*np.sum(lam0))

    coarse = _brute_force_at_step(c, dc, N, delta, lam0, vecs0, groups)
    fine = _brute_force_at_step(c, dc, N, delta/2, lam0, vecs0, groups)
    scale = max(abs(fine), np.finfo(float).tiny)
    if abs(coarse - fine)/scale > richardson_tol:
        logger.warning("brute-force QFI step disagreement: %.3g (delta) vs "
                       "%.3g (delta/2)", coarse, fine)
    return fine


def steady_state_eigensystem(x, N):
    r"""Return :math:`(\lambda_+, \lambda_-, \theta_+, \theta_-, s)` of the
    steady coherence block with :math:`p = x = Z^2`.

    :math:`s = 1 + x^N + (1-x)^N`, :math:`\lambda_\pm` are the eigenvalues of
    :math:`\rho_1` and its eigenvectors are
    :math:`(e^{i\varphi}\sin\theta_\pm, \cos\theta_\pm)`.
    """
    x = float(x)
    z = np.sqrt(x)
    s = 1 + x**N + (1 - x)**N
    det4 = (x*(1 - x))**N
    root = np.sqrt(max(1 - 4*det4/s**2, 0.0))
    lam_plus = s/4*(1 + root)
    lam_minus = det4/(4*lam_plus)
    theta = [np.arctan2(z**N, 2*lam - x**N) for lam in (lam_plus, lam_minus)]
    # keep both angles in (-pi/2, pi/2]
    theta = [t - np.pi if t > np.pi/2 else t for t in theta]
    return lam_plus, lam_minus, theta[0], theta[1], s


def y_n_from_eigensystem(x, N):
    r"""Return the steady prefactor :math:`y_N(x)` from the eigensystem.

    .. math::

        y_N = \sum_\pm \lambda_\pm\sin^2 2\theta_\pm
            - \frac{16\lambda_+\lambda_-(\sin\theta_+\sin\theta_-)^2}
                   {\lambda_+ + \lambda_-}
    """
    lp, lm, tp, tm, _ = steady_state_eigensystem(x, N)
    return (lp*np.sin(2*tp)**2 + lm*np.sin(2*tm)**2
            - 16*lp*lm*(np.sin(tp)*np.sin(tm))**2/(lp + lm))
