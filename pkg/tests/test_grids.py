import io
import tempfile

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expfunc.grids import GridCDF, GridDensity, ResidualReport, read_csv, write_csv


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=30))
def test_csv_round_trip_is_exact(vals):
    t = np.arange(len(vals), dtype=float)
    buf = io.StringIO()
    write_csv(buf, {"t": t, "f": vals}, {"seed": 3, "note": "x"})
    text = buf.getvalue()
    assert text.startswith("# note:")
    with tempfile.NamedTemporaryFile("w", suffix=".csv", delete=False) as fh:
        fh.write(text)
        path = fh.name
    cols, header = read_csv(path)
    assert header == {"note": "x", "seed": 3}
    assert np.array_equal(cols["f"], np.asarray(vals, float))


def test_power_cell_at_singular_edge():
    # f(t) = 0.5 t**-0.5 on [0, 1]: the first trapezoid cell would use f(0) = inf
    h = 1e-3
    t = np.linspace(0, 1, 1001)
    f = np.where(t > 0, 0.5 / np.sqrt(np.maximum(t, 1e-300)), np.inf)
    d = GridDensity(t, f, edge="left", edge_exponent=0.5)
    assert d.mass() == pytest.approx(1.0, abs=2e-3)
    assert d.cumulative()[1] == pytest.approx(np.sqrt(h), rel=1e-12)
    right = GridDensity(t, f[::-1].copy(), edge="right", edge_exponent=0.5)
    assert right.mass() == pytest.approx(d.mass())


def test_density_laplace_and_cdf():
    t = np.linspace(0, 40, 40001)
    d = GridDensity(t, np.exp(-t), edge="left", edge_exponent=1.0)
    assert np.allclose(d.laplace([0.0, 1.0, 3.0]), [1.0, 0.5, 0.25], atol=1e-6)
    F = d.cdf()
    assert F.is_monotone()
    assert F(np.array([-1.0, 1.0, 100.0])) == pytest.approx([0.0, 1 - np.exp(-1), 1.0], abs=1e-6)
    assert d(np.array([-1.0, 50.0])).tolist() == [0.0, 0.0]


def test_density_csv_round_trip(tmp_path):
    t = np.linspace(0, 1, 11)
    d = GridDensity(t, t**2, meta={"case": "i"})
    p = tmp_path / "d.csv"
    d.to_csv(p)
    back, df = GridDensity.from_csv(p)
    assert np.array_equal(back.values, d.values) and df is None
    cols, header = read_csv(p)
    assert header["case"] == "i" and header["grid"]["n"] == 11


def test_density_csv_needs_uniform_grid(tmp_path):
    p = tmp_path / "bad.csv"
    write_csv(p, {"t": [0.0, 0.1, 0.5], "f": [1.0, 1.0, 1.0]}, {})
    with pytest.raises(ValueError):
        GridDensity.from_csv(p)


def test_grid_cdf_and_residual_report():
    F = GridCDF(np.array([0.0, 1.0, 2.0]), np.array([0.0, 0.5, 0.9]))
    assert F(np.array([3.0]))[0] == 0.9
    assert F.to_csv().splitlines()[-1] == "2.0,0.9"
    r = ResidualReport(np.array([0.0, 1.0]), np.array([1e-3, -2e-3]), "iii")
    assert r.max_abs == 2e-3 and r.argmax == 1.0 and r.to_dict()["variant"] == "iii"
