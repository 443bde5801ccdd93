"""Command-line driver.

``floqmet <command> [options]`` runs one kind of calculation and writes CSV
series and JSON summaries into the output directory. Parameters come from
defaults, then a ``key = value`` file given with ``--config``, then
command-line flags, later sources taking precedence.

========== ==========================================================
Command    Output
========== ==========================================================
evolve     amplitude trajectory, stroboscopic samples, run summary
qfi        QFI series with the Markovian closed form alongside
spectrum   bound-state quasienergies and residues over *A* or
           :math:`\\omega_T`, and the band copies
fbs        bound states with derivatives and their long-time QFI
markovian  Markovian QFI series and its optimum
optimize   designed drive amplitudes over a list of *N*
========== ==========================================================

Exit status is 0 on success, 2 for configuration and file errors and 3 for
numerical failures.

.. autoclass:: RunConfig
.. autofunction:: cmd_evolve
.. autofunction:: cmd_qfi
.. autofunction:: cmd_spectrum
.. autofunction:: cmd_fbs
.. autofunction:: cmd_markovian
.. autofunction:: cmd_optimize
.. autofunction:: main
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

import argparse
import dataclasses
import logging
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from floqmet import io
from floqmet.asymptotics import (
    asymptotic_qfi,
    markovian_optimum,
    markovian_optimum_numeric,
    markovian_qfi,
)
from floqmet.design import DEFAULT_A, default_amplitudes, design_sweep
from floqmet.dynamics import (
    lattice_oracle,
    markovian_params,
    markovian_trajectory,
    solve_amplitude,
    stroboscopic_samples,
)
from floqmet.floquet import (
    fbs_derivatives,
    gap_intervals,
    hellmann_feynman_slope,
    scan_spectrum,
    solve_fbs,
)
from floqmet.model import MarkovianModel, ModelParams
from floqmet.qfi import qfi_series
from floqmet.simutil import (
    ConfigurationError,
    DomainError,
    InfeasibleTargetError,
    NumericalBranchError,
    SizeError,
    SolverInstabilityError,
    StencilError,
    get_rank,
)

logger = logging.getLogger(__name__)

COMMANDS = ("evolve", "qfi", "spectrum", "fbs", "markovian", "optimize")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_NUMERICAL_ERRORS = (DomainError, SolverInstabilityError, NumericalBranchError,
                     StencilError, InfeasibleTargetError, SizeError)

_MODEL_KEYS = tuple(f.name for f in dataclasses.fields(ModelParams))


@dataclass
class RunConfig:
    """Model parameters and run options of one command.

    .. attribute:: params

        The :class:`~floqmet.model.ModelParams`.

    Run options (all optional in config files and on the command line):
    ``out``, ``t_max``, ``dt``, ``driven``, ``method``, ``n_max``, ``L``,
    ``a``, ``tol``, ``branch``, ``workers``, ``nstatus``, ``axis``,
    ``values``, ``N_values``, ``A_min``, ``A_max``, ``A_step``, ``T_R``,
    ``kappa``, ``delta``.

    .. automethod:: from_sources
    .. automethod:: options
    """

    command: str
    params: ModelParams = field(default_factory=ModelParams)
    out: str = "."
    t_max: float = 20.0
    dt: float = 0.005
    driven: bool = True
    method: str = "lyapunov"
    n_max: Optional[int] = None
    L: Optional[int] = None
    a: float = DEFAULT_A
    tol: float = 1e-4
    branch: int = 0
    workers: int = 1
    nstatus: int = -1
    axis: str = "A"
    values: Optional[list] = None
    N_values: Optional[list] = None
    A_min: Optional[float] = None
    A_max: Optional[float] = None
    A_step: float = 0.05
    T_R: float = 1.0
    kappa: Optional[float] = None
    delta: float = 0.0

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigurationError(f"unknown command '{self.command}'",
                                     key="command")
        if not self.t_max > 0:
            raise ConfigurationError(f"t_max must be > 0, got {self.t_max}",
                                     key="t_max")
        if self.workers < 1:
            raise ConfigurationError(
                f"workers must be >= 1, got {self.workers}", key="workers")
        if self.axis not in ("A", "omega_T"):
            raise ConfigurationError(
                f"axis must be 'A' or 'omega_T', got '{self.axis}'", key="axis")
        if self.method not in ("lyapunov", "eigen"):
            raise ConfigurationError(f"unknown QFI method '{self.method}'",
                                     key="method")
        if not self.tol > 0:
            raise ConfigurationError(f"tol must be > 0, got {self.tol}",
                                     key="tol")
        if self.branch < 0:
            raise ConfigurationError(f"branch must be >= 0, got {self.branch}",
                                     key="branch")

    @classmethod
    def from_sources(cls, command, file_entries=None, flag_entries=None):
        """Merge config-file entries and command-line flags over defaults.

        *None* flag values are treated as not given.

        Raises
        ------
        ConfigurationError
            For unknown keys and values of the wrong type.
        """
        merged = dict(file_entries or {})
        merged.update({k: v for k, v in (flag_entries or {}).items()
                       if v is not None})

        run_fields = {f.name: f for f in dataclasses.fields(cls)
                      if f.name not in ("command", "params")}
        model, run = {}, {}
        for key, value in merged.items():
            if key in _MODEL_KEYS:
                model[key] = value
            elif key in run_fields:
                run[key] = _coerce(key, value, run_fields[key].default)
            else:
                raise ConfigurationError(f"unknown configuration key '{key}'",
                                         key=key)
        return cls(command=command, params=ModelParams.from_dict(model), **run)

    def options(self):
        """Return the run options as a flat mapping for file headers."""
        opts = dataclasses.asdict(self)
        opts.pop("params")
        return opts


_LIST_KEYS = ("values", "N_values")
_INT_KEYS = ("n_max", "L", "branch", "workers", "nstatus")
_STR_KEYS = ("out", "axis", "method")


def _coerce(key, value, default):
    try:
        if key in _LIST_KEYS:
            items = value if isinstance(value, list) else [value]
            conv = int if key == "N_values" else float
            return [conv(v) for v in items]
        if isinstance(value, list):
            raise TypeError("list given")
        if key in _STR_KEYS:
            return str(value)
        if key == "driven":
            if not isinstance(value, bool):
                raise TypeError("boolean expected")
            return value
        if key in _INT_KEYS:
            if isinstance(value, bool) or int(value) != value:
                raise TypeError("integer expected")
            return int(value)
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad value {value!r} for '{key}': {exc}",
                                 key=key) from exc


class _Writer:
    """Writes result files on rank 0 only."""

    def __init__(self, cfg, comm=None):
        self.cfg = cfg
        self.active = get_rank(comm) == 0
        self.params = cfg.params.to_dict()
        self.written = []

    def fname(self, basename, suffix):
        return io.make_output_fname(self.cfg.out, basename, suffix)

    def series(self, basename, names, columns):
        if self.active:
            self.written.append(io.write_series(
                self.fname(basename, "csv"), names, columns, self.params,
                self.cfg.options()))

    def table(self, basename, names, rows):
        if self.active:
            self.written.append(io.write_table(
                self.fname(basename, "csv"), names, rows, self.params,
                self.cfg.options()))

    def json(self, basename, payload):
        if self.active:
            payload = dict(payload, options=self.cfg.options())
            self.written.append(io.write_json(
                self.fname(basename, "json"), payload, self.params))


def _trajectory(cfg):
    p = cfg.params
    if cfg.L is not None:
        return lattice_oracle(p, cfg.L, cfg.t_max, cfg.dt, driven=cfg.driven,
                              sensitivity=True, nstatus=cfg.nstatus)
    return solve_amplitude(p, cfg.t_max, cfg.dt, driven=cfg.driven,
                           nstatus=cfg.nstatus)


def cmd_evolve(cfg, comm=None):
    """Solve for the amplitude and write ``trajectory.csv``,
    ``stroboscopic.csv`` and ``evolve.json``."""
    out = _Writer(cfg, comm)
    traj = _trajectory(cfg)
    c, dc = traj.c, traj.dc_domega0
    out.series("trajectory",
               ["t", "re_c", "im_c", "abs_c2", "re_dc", "im_dc"],
               [traj.times, c.real, c.imag, np.abs(c)**2, dc.real, dc.imag])

    n, t_n, c_n = stroboscopic_samples(traj, cfg.params)
    out.series("stroboscopic", ["n", "t", "abs_c", "arg_c"],
               [n, t_n, np.abs(c_n), np.angle(c_n)])
    abs_c = np.abs(c)
    out.json("evolve", {
        "solver": "lattice" if cfg.L is not None else "volterra",
        "nsteps": len(traj) - 1,
        "dt": traj.dt,
        "max_abs_c": float(abs_c.max()),
        "min_abs_c": float(abs_c.min()),
        "final_abs_c": float(abs_c[-1]),
        "stroboscopic": {"n": n, "t": t_n, "abs_c": np.abs(c_n),
                         "arg_c": np.angle(c_n)},
    })
    return out.written


def _kappa(cfg):
    if cfg.kappa is not None:
        return MarkovianModel(kappa=cfg.kappa, delta=cfg.delta, T_R=cfg.T_R)
    return markovian_params(cfg.params, T_R=cfg.T_R)


def cmd_qfi(cfg, comm=None):
    """Write the QFI series ``qfi.csv`` with an ``F_markovian`` column."""
    out = _Writer(cfg, comm)
    traj = _trajectory(cfg)
    series = qfi_series(traj, cfg.params.N, method=cfg.method)
    names, columns = series.columns()
    model = _kappa(cfg)
    names.append("F_markovian")
    columns.append(markovian_qfi(model.kappa, cfg.params.N, series.t))
    out.series("qfi", names, columns)
    return out.written


def _scan_values(cfg):
    if cfg.values is not None:
        return np.asarray(cfg.values, dtype=float)
    if cfg.axis == "A":
        return default_amplitudes(cfg.params, cfg.A_min, cfg.A_max, cfg.A_step)
    return np.linspace(1.0, 20.0, 191)*cfg.params.h


def cmd_spectrum(cfg, comm=None):
    """Scan bound states and write ``spectrum.csv`` and ``bands.csv``."""
    out = _Writer(cfg, comm)
    scan = scan_spectrum(cfg.params, cfg.axis, _scan_values(cfg),
                         n_max=cfg.n_max, workers=cfg.workers, comm=comm)
    names = ["axis_value", "n_branches", "epsilon_b_1", "Z_1",
             "epsilon_b_2", "Z_2"]
    rows = scan.rows()
    out.table("spectrum", names, rows)
    out.table("bands", ["axis_value", "band_lo", "band_hi"],
              [(value, lo, hi) for value, bands in zip(scan.values,
                                                       scan.band_edges)
               for lo, hi in bands])
    if out.active:
        logger.info("\n%s", io.make_table(names, rows))
    return out.written


def _state_record(state):
    return {"epsilon_b": state.epsilon_b, "Z": state.Z, "Z2": state.Z2,
            "d_epsilon_domega0": state.d_epsilon_domega0,
            "d_Z2_domega0": state.d_Z2_domega0,
            "hellmann_feynman_slope": hellmann_feynman_slope(state),
            "normalization_residual": state.normalization_residual,
            "n_max": state.n_max, "coeffs": state.coeffs}


def cmd_fbs(cfg, comm=None):
    """Write the bound states at one parameter point to ``fbs.json``."""
    out = _Writer(cfg, comm)
    p = cfg.params
    states = [fbs_derivatives(p, n_max=cfg.n_max, state=s)
              for s in solve_fbs(p, n_max=cfg.n_max)]
    payload = {"gaps": gap_intervals(p),
               "states": [_state_record(s) for s in states]}
    if states:
        asym = asymptotic_qfi(max(states, key=lambda s: s.Z), p.N)
        payload["asymptotic"] = dict(dataclasses.asdict(asym),
                                     t2_coefficient=asym.t2_coefficient)
    else:
        logger.info("no bound state at A=%g, omega_T=%g", p.A, p.omega_T)
    out.json("fbs", payload)
    return out.written


def cmd_markovian(cfg, comm=None):
    """Write the Markovian series ``markovian.csv`` and ``markovian.json``."""
    out = _Writer(cfg, comm)
    p = cfg.params
    model = _kappa(cfg)
    nsteps = int(np.ceil(cfg.t_max/cfg.dt - 1e-9))
    times = cfg.dt*np.arange(nsteps + 1)
    traj = markovian_trajectory(model, p.omega0, times)
    out.series("markovian", ["t", "abs_c", "F_markovian"],
               [times, np.abs(traj.c), markovian_qfi(model.kappa, p.N, times)])

    payload = {"kappa": model.kappa, "delta": model.delta, "T_R": model.T_R}
    if model.kappa > 0:
        payload["optimum"] = dataclasses.asdict(
            markovian_optimum(model.kappa, p.N, model.T_R))
        t_star, f_star = markovian_optimum_numeric(model.kappa, p.N)
        payload["optimum_numeric"] = {"t_opt": t_star, "F_max": f_star}
    out.json("markovian", payload)
    return out.written


def cmd_optimize(cfg, comm=None):
    """Design the drive amplitude for each ``N_values`` entry.

    Writes ``design_N<N>.json`` per atom number, ``design.csv`` and
    ``design_summary.json`` with the fitted :math:`N`-exponent.
    """
    out = _Writer(cfg, comm)
    n_values = cfg.N_values or [cfg.params.N]
    sweep = design_sweep(cfg.params, n_values, a=cfg.a, tol=cfg.tol,
                         branch=cfg.branch, A_min=cfg.A_min, A_max=cfg.A_max,
                         A_step=cfg.A_step, n_max=cfg.n_max,
                         workers=cfg.workers, comm=comm)
    for res in sweep.results:
        out.json(f"design_N{res.N}", res.to_dict())
    names = ["N", "A_opt", "Z2", "y", "F_slope"]
    rows = [(r.N, r.A_opt, r.Z2_achieved, r.y_value, r.F_slope)
            for r in sweep.results]
    out.table("design", names, rows)
    out.json("design_summary", {"N_values": n_values, "a": cfg.a,
                                "exponent": sweep.exponent,
                                "prefactor": sweep.prefactor,
                                "scaled_exponent": sweep.scaled_exponent,
                                "scaled_prefactor": sweep.scaled_prefactor})
    if out.active:
        logger.info("\n%s", io.make_table(names, rows))
        logger.info("F_slope ~ N^%.4f, y_N N^2 ~ N^%.4f", sweep.exponent,
                    sweep.scaled_exponent)
    return out.written


_COMMAND_FUNCS = {
    "evolve": cmd_evolve, "qfi": cmd_qfi, "spectrum": cmd_spectrum,
    "fbs": cmd_fbs, "markovian": cmd_markovian, "optimize": cmd_optimize,
}


def _list_arg(conv):
    def parse(text):
        try:
            return [conv(v) for v in text.split(",") if v.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
    return parse


def build_parser():
    """Return the :mod:`argparse` parser of the ``floqmet`` command."""
    parser = argparse.ArgumentParser(
        prog="floqmet",
        description="Driven-atom metrology in a structured reservoir.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="key = value parameter file")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--mpi", action="store_true",
                        help="distribute scan points over MPI ranks")
    parser.add_argument("--verbose", "-v", action="store_true")

    model = parser.add_argument_group("model parameters")
    for key in ("omega0", "g", "h", "omega_c", "A", "omega_T"):
        model.add_argument(f"--{key}", type=float)
    model.add_argument("--N", type=int, help="atom number")

    run = parser.add_argument_group("run options")
    run.add_argument("--t-max", dest="t_max", type=float)
    run.add_argument("--dt", type=float)
    run.add_argument("--undriven", dest="driven", action="store_const",
                     const=False, help="switch the drive off")
    run.add_argument("--method", choices=("lyapunov", "eigen"))
    run.add_argument("--n-max", dest="n_max", type=int,
                     help="Fourier truncation order")
    run.add_argument("--L", type=int,
                     help="solve on an L x L lattice instead")
    run.add_argument("--a", type=float, help="design exponent")
    run.add_argument("--tol", type=float)
    run.add_argument("--branch", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--nstatus", type=int)
    run.add_argument("--axis", choices=("A", "omega_T"))
    run.add_argument("--values", type=_list_arg(float))
    run.add_argument("--N-values", dest="N_values", type=_list_arg(int))
    run.add_argument("--A-min", dest="A_min", type=float)
    run.add_argument("--A-max", dest="A_max", type=float)
    run.add_argument("--A-step", dest="A_step", type=float)
    run.add_argument("--T-R", dest="T_R", type=float)
    run.add_argument("--kappa", type=float)
    run.add_argument("--delta", type=float)
    return parser


def main(argv=None):
    """Run the ``floqmet`` command and return its exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(format="%(message)s",
                        level=logging.DEBUG if args.verbose else logging.INFO)

    comm = None
    if args.mpi:
        from mpi4py import MPI
        comm = MPI.COMM_WORLD

    flags = {k: v for k, v in vars(args).items()
             if k not in ("command", "config", "mpi", "verbose")}
    try:
        file_entries = io.read_config(args.config) if args.config else {}
        cfg = RunConfig.from_sources(args.command, file_entries, flags)
        if get_rank(comm) == 0:
            logger.info(io.make_init_message(casename=cfg.command,
                                             params=cfg.params.to_dict(),
                                             **cfg.options()))
        written = _COMMAND_FUNCS[cfg.command](cfg, comm=comm)
    except (ConfigurationError, OSError) as exc:
        logger.error("floqmet: configuration error: %s", exc)
        return EXIT_CONFIG
    except _NUMERICAL_ERRORS as exc:
        logger.error("floqmet: numerical error: %s", exc)
        return EXIT_NUMERICAL

    for fname in written:
        logger.info("wrote %s", fname)
    return EXIT_OK


def console_main():
    """Entry point of the ``floqmet`` console script."""
    sys.exit(main())
