"""I/O: configuration files, result files and run messages.

Configuration
^^^^^^^^^^^^^
.. autofunction:: read_config
.. autofunction:: parse_value

Result files
^^^^^^^^^^^^
.. autodata:: FORMAT_VERSION
.. autofunction:: make_header
.. autofunction:: write_series
.. autofunction:: write_table
.. autofunction:: write_json
.. autofunction:: make_output_fname

Messages
^^^^^^^^
.. autofunction:: make_init_message
.. autofunction:: make_status_message
.. autofunction:: make_table
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

import csv
import json
import logging
import os

import numpy as np
import pytools

from floqmet.simutil import ConfigurationError
from floqmet.version import VERSION_TEXT

logger = logging.getLogger(__name__)

#: Version of the layout of every file written by :mod:`floqmet`.
FORMAT_VERSION = 1


def parse_value(text):
    """Convert a config value to int, float, bool, str or a list of these.

    Comma-separated values become lists.
    """
    text = text.strip()
    if "," in text:
        return [parse_value(item) for item in text.split(",") if item.strip()]
    lowered = text.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def read_config(filename):
    """Read a flat ``key = value`` file into a :class:`dict`.

    Blank lines and text after ``#`` are ignored. A key may appear only once.

    Raises
    ------
    ConfigurationError
        For lines without ``=``, empty keys or values, and repeated keys.
    """
    entries = {}
    with open(filename, "r") as inf:
        for lineno, raw in enumerate(inf, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or not key or not value.strip():
                raise ConfigurationError(
                    f"{filename}:{lineno}: malformed entry '{raw.strip()}'",
                    key=key or None)
            if key in entries:
                raise ConfigurationError(
                    f"{filename}:{lineno}: key '{key}' given twice", key=key)
            entries[key] = parse_value(value)
    logger.debug("read %d entries from %s", len(entries), filename)
    return entries


def make_header(params, options=None):
    """Return the provenance lines (without comment markers) of a result file."""
    lines = [f"format_version = {FORMAT_VERSION}",
             f"floqmet_version = {VERSION_TEXT}"]
    for key, value in params.items():
        lines.append(f"{key} = {value!r}")
    for key, value in (options or {}).items():
        if value is None:
            continue
        if isinstance(value, (list, tuple, np.ndarray)):
            value = ", ".join(repr(v) for v in np.ravel(value).tolist())
        lines.append(f"{key} = {value!r}" if isinstance(value, float)
                     else f"{key} = {value}")
    return lines


def make_output_fname(outdir, basename, suffix):
    """Return ``outdir/basename.suffix``, creating *outdir* if necessary."""
    os.makedirs(outdir, exist_ok=True)
    return os.path.join(outdir, f"{basename}.{suffix}")


def write_series(filename, names, columns, params, options=None):
    """Write equal-length numeric *columns* as CSV with a provenance header."""
    data = np.column_stack([np.asarray(col, dtype=float) for col in columns])
    header = "\n".join(make_header(params, options) + [",".join(names)])
    np.savetxt(filename, data, delimiter=",", header=header, comments="# ",
               fmt="%.17g")
    return filename


def write_table(filename, names, rows, params, options=None):
    """Write ragged *rows* as CSV; *None* entries become empty fields."""
    with open(filename, "w", newline="") as outf:
        for line in make_header(params, options):
            outf.write(f"# {line}\n")
        writer = csv.writer(outf)
        writer.writerow(names)
        for row in rows:
            writer.writerow(["" if v is None else repr(float(v))
                             if isinstance(v, (float, np.floating)) else v
                             for v in row])
    return filename


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(filename, payload, params):
    """Write a JSON summary carrying the format version and parameter set."""
    doc = {"format_version": FORMAT_VERSION,
           "floqmet_version": VERSION_TEXT,
           "params": dict(params)}
    doc.update(payload)
    with open(filename, "w") as outf:
        json.dump(doc, outf, indent=2, sort_keys=True, default=_jsonable)
        outf.write("\n")
    return filename


def make_init_message(*, casename, params, **options):
    """Create a summary of the model parameters and run options."""
    lines = [f"Initialization for Case({casename})", "==="]
    lines += [f"{key:<16s} {value}" for key, value in params.items()]
    lines += [f"{key:<16s} {value}" for key, value in options.items()
              if value is not None]
    return "\n".join(lines)


def make_status_message(*, step, t, dt, c, norm=None):
    """Make a solver status message from the current amplitude."""
    statusmsg = (
        f"Status: {step=} t={t:.6g}\n"
        f"------- |c|={abs(c):.6g} arg(c)={np.angle(c):.6g}\n"
        f"------- dt={dt:.4g}"
    )
    if norm is not None:
        statusmsg += f" norm={norm:.12g}"
    return statusmsg


def make_table(names, rows, fmt=".6g"):
    """Return a :class:`pytools.Table` of *rows* for human-readable logs."""
    tbl = pytools.Table()
    tbl.add_row(list(names))
    for row in rows:
        tbl.add_row(["-" if v is None else format(v, fmt)
                     if isinstance(v, (float, np.floating)) else str(v)
                     for v in row])
    return tbl
