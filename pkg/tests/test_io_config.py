import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from shearflex.config import DEFAULTS, RunConfig, parse_grid
from shearflex.errors import (ConditionVError, ConfigurationError, PlateauViolation,
                              WindowOverlap)
from shearflex.grid import Grid
from shearflex.shear import taylor_remainder
from shearflex.io import read_efk, read_scalar, read_vector, write_csv, write_efk, write_table


class TestEfk:
    @settings(max_examples=25, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(4, 9), st.integers(3, 7)),
                  elements=st.floats(allow_nan=False, allow_infinity=False)))
    def test_round_trip_bitwise(self, tmp_path_factory, a):
        p = tmp_path_factory.mktemp("efk") / "a.efk"
        write_efk(p, [a, -a])
        b = read_efk(p)
        assert b.shape == (2,) + a.shape
        assert b[0].tobytes() == a.tobytes()

    def test_header_layout(self, tmp_path):
        a = np.arange(12.0).reshape(4, 3)
        raw = write_efk(tmp_path / "f.efk", [a]).read_bytes()
        assert raw[:4] == b"EFK1"
        assert np.frombuffer(raw[4:12], "<i4").tolist() == [4, 3]
        assert np.frombuffer(raw[12:], "<f8")[:4].tolist() == [0.0, 1.0, 2.0, 3.0]
        assert len(raw) == 12 + 8 * 12

    def test_scalar_and_vector(self, tmp_path):
        a = np.random.default_rng(0).standard_normal((8, 9))
        write_efk(tmp_path / "s.efk", [a])
        write_efk(tmp_path / "v.efk", [a, 2 * a])
        s = read_scalar(tmp_path / "s.efk")
        assert s.grid == Grid(8, 9) and np.array_equal(s.values, a)
        v = read_vector(tmp_path / "v.efk")
        assert np.array_equal(v.u2, 2 * a)
        with pytest.raises(ConfigurationError):
            read_vector(tmp_path / "s.efk")

    @pytest.mark.parametrize("raw", [b"", b"EFK", b"XXXX" + bytes(8) + bytes(8),
                                     b"EFK1" + np.array([2, 2], "<i4").tobytes() + bytes(24)])
    def test_corrupt(self, tmp_path, raw):
        p = tmp_path / "bad.efk"
        p.write_bytes(raw)
        with pytest.raises(ConfigurationError):
            read_efk(p)

    def test_shape_mismatch(self, tmp_path):
        with pytest.raises(ConfigurationError):
            write_efk(tmp_path / "x.efk", [np.zeros((2, 3)), np.zeros((3, 2))])


class TestCsv:
    def test_rows_and_exact_values(self, tmp_path):
        g = Grid(8, 9)
        vals = np.random.default_rng(1).standard_normal(g.shape)
        text = write_csv(tmp_path / "f.csv", g, {"psi": vals}).read_text().splitlines()
        assert text[0] == "x,y,psi" and len(text) == 1 + 72
        got = np.array([float(r.split(",")[2]) for r in text[1:]])
        assert np.array_equal(got, vals.ravel())

    def test_table(self, tmp_path):
        p = write_table(tmp_path / "t.csv", ["a", "b"], [(1, 0.1), ("x", np.float64(2.5))])
        assert p.read_text().splitlines() == ["a,b", "1,0.1", "x,2.5"]


class TestConfig:
    def test_defaults(self):
        cfg = RunConfig({})
        assert cfg.grid() == Grid(256, 257)
        assert cfg["tolerances"] == DEFAULTS["tolerances"]
        assert cfg.flow().vortices == ()

    def test_partial_merge(self):
        cfg = RunConfig({"tolerances": {"spread": 1e-3}})
        assert cfg["tolerances"]["spread"] == 1e-3 and cfg["tolerances"]["shear"] == 1e-10

    def test_load_relative_fields(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"fields": {"psi": "psi.efk", "omega": "/abs/om.efk"}}))
        cfg = RunConfig.load(p)
        assert cfg.field_path("psi") == tmp_path / "psi.efk"
        assert str(cfg.field_path("omega")) == "/abs/om.efk"
        assert cfg.field_path("u") is None

    def test_json_round_trip(self):
        cfg = RunConfig({"grid": {"nx": 64, "ny": 65}, "alpha": 0.25})
        assert RunConfig(json.loads(cfg.to_json())).data == cfg.data

    def test_nested_children(self):
        cfg = RunConfig({"shear": {"kind": "rest"}, "vortices": [{
            "center": [3.0, 0.0], "eps": 0.8, "profile": "plateau",
            "children": [{"radius": 0.4, "angle": 0.0, "eps": 0.1}]}]})
        v = cfg.flow().vortices[0]
        assert len(v.children) == 1 and v.children[0].radius < v.radius

    @pytest.mark.parametrize("data", [
        {"bogus": 1},
        {"grid": {"nx": 64}},
        {"grid": {"nx": 64, "ny": 64}},
        {"grid": {"nx": 7, "ny": 9}},
        {"alpha": 1.5},
        {"levels": {"energy": 10}},
        {"levels": {"laminar": 8}},
        {"levels": {"bins": 4}},
        {"evolution": {"cfl": 2.0}},
        {"tolerances": {"spread": -1.0}},
        {"shear": {"kind": "polynomial"}},
        {"shear": {"kind": "cubic"}},
        {"sweep": {"samples": 10}},
        {"output": {"format": "hdf5"}},
    ])
    def test_rejected(self, data):
        with pytest.raises(ConfigurationError):
            RunConfig(data)

    def test_overlapping_windows(self):
        with pytest.raises(WindowOverlap):
            RunConfig({"windows": [{"y0": 0.0, "eps": 0.2}, {"y0": 0.1, "eps": 0.2}]})

    def test_window_off_a_zero(self):
        # any cutoff of a shear is still a steady shear; only the remainder needs a zero
        flow = RunConfig({"windows": [{"y0": 0.5, "eps": 0.1}]}).flow()
        with pytest.raises(ConditionVError):
            taylor_remainder(flow.shear, 0.5, 0)

    def test_child_outside_plateau(self):
        with pytest.raises(PlateauViolation):
            RunConfig({"shear": {"kind": "rest"}, "vortices": [{
                "center": [3.0, 0.0], "eps": 0.8,
                "children": [{"radius": 0.79, "angle": 0.0, "eps": 0.1}]}]})

    def test_sweep_needs_four(self):
        with pytest.raises(ConfigurationError):
            RunConfig({"sweep": {"eps": [0.1, 0.05]}}).sweep_eps()

    def test_unreadable(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text("{not json")
        with pytest.raises(ConfigurationError):
            RunConfig.load(p)
        with pytest.raises(ConfigurationError):
            RunConfig.load(tmp_path / "missing.json")


@pytest.mark.parametrize("text,expected", [("64x65", (64, 65)), ("128X129", (128, 129))])
def test_parse_grid(text, expected):
    assert parse_grid(text) == expected


@pytest.mark.parametrize("text", ["64", "axb", "64x64x1", "3x65"])
def test_parse_grid_bad(text):
    with pytest.raises(ConfigurationError):
        parse_grid(text)
