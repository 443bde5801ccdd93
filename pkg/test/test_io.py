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

import json
import logging

import numpy as np
import pytest

from floqmet import io
from floqmet.simutil import ConfigurationError

logger = logging.getLogger(__name__)


@pytest.mark.parametrize(("text", "value"), [
    ("3", 3), ("2.5", 2.5), (" true ", True), ("off", False),
    ("lyapunov", "lyapunov"), ("4, 8,16", [4, 8, 16]), ("1e-3", 1e-3),
])
def test_parse_value(text, value):
    assert io.parse_value(text) == value


def test_read_config(tmp_path):
    fname = tmp_path / "a.cfg"
    fname.write_text("# drive\nA = 11   # amplitude\n\nN_values = 4, 8\n"
                     "driven = yes\n")
    assert io.read_config(str(fname)) == {"A": 11, "N_values": [4, 8],
                                          "driven": True}

    for text in ["A = 1\nA = 2\n", "A\n", "A =\n", " = 3\n"]:
        fname.write_text(text)
        with pytest.raises(ConfigurationError):
            io.read_config(str(fname))


def test_write_series(tmp_path):
    fname = io.make_output_fname(str(tmp_path / "sub"), "s", "csv")
    t = np.linspace(0, 1, 5)
    io.write_series(fname, ["t", "x"], [t, t**2], {"A": 1.5},
                    {"dt": 0.1, "values": [1.0, 2.0], "n_max": None})
    with open(fname) as inf:
        header = [line for line in inf if line.startswith("#")]
    assert header[0] == "# format_version = 1\n"
    assert "# A = 1.5\n" in header
    assert "# values = 1.0, 2.0\n" in header
    assert not any("n_max" in line for line in header)
    assert header[-1] == "# t,x\n"

    data = np.loadtxt(fname, delimiter=",", comments="#")
    assert np.array_equal(data[:, 1], t**2)


def test_write_table_and_json(tmp_path):
    fname = io.write_table(str(tmp_path / "t.csv"), ["a", "b", "c"],
                           [(1.0, 2, None), (np.float64(0.1), 3, 4.0)],
                           {"g": 1.0})
    with open(fname) as inf:
        body = [line.strip() for line in inf if not line.startswith("#")]
    assert body == ["a,b,c", "1.0,2,", "0.1,3,4.0"]

    fname = io.write_json(str(tmp_path / "r.json"),
                          {"x": np.arange(3), "y": np.float64(2.5)},
                          {"g": 1.0})
    with open(fname) as inf:
        doc = json.load(inf)
    assert doc["format_version"] == io.FORMAT_VERSION
    assert doc["params"] == {"g": 1.0}
    assert doc["x"] == [0, 1, 2]
    assert doc["y"] == 2.5


def test_messages():
    msg = io.make_init_message(casename="fbs", params={"A": 11.0}, dt=0.005,
                               L=None)
    assert "Case(fbs)" in msg
    assert "dt" in msg and "L " not in msg

    status = io.make_status_message(step=3, t=0.5, dt=0.01, c=0.6j, norm=1.0)
    assert "step=3" in status
    assert "|c|=0.6" in status

    table = str(io.make_table(["N", "A"], [(4, 1.25), (8, None)]))
    assert "1.25" in table
    assert "-" in table


if __name__ == "__main__":
    import sys
    if len(sys.argv) > 1:
        exec(sys.argv[1])
    else:
        from pytest import main
        main([__file__])
