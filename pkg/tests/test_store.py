import json

import numpy as np
import pytest

from starfan.core.fan import type_b_fan
from starfan.data.models import LabeledDataset
from starfan.data.service import default_fan_for, resolve_dataset, resolve_fan, split_dataset, vary_fan
from starfan.data.store import DataStore, load_fan, load_params, read_csv, save_fan, write_csv
from starfan.infra.errors import DataError, FanError, LabelError, ParseError


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_csv_round_trip_is_exact(tmp_path, rng):
    data = LabeledDataset(rng.normal(size=(50, 3)) * 10.0 ** rng.integers(-8, 8, size=(50, 1)), rng.integers(0, 2, 50))
    path = str(tmp_path / "out" / "data.csv")
    write_csv(data, path)
    again = read_csv(path)
    assert np.array_equal(again.points, data.points)
    assert np.array_equal(again.labels, data.labels)


def test_read_simple_file(tmp_path):
    data = read_csv(write(tmp_path, "x1,x2,y\n1,2,0\n-0.5,3e-1,1\n"))
    assert data.points.tolist() == [[1.0, 2.0], [-0.5, 0.3]]
    assert data.labels.tolist() == [0, 1]


def test_bad_number_reports_row_and_column(tmp_path):
    with pytest.raises(ParseError) as excinfo:
        read_csv(write(tmp_path, "x1,x2,y\n1,2,0\n3,abc,1\n"))
    assert excinfo.value.row == 2
    assert excinfo.value.column == "x2"


def test_non_finite_value(tmp_path):
    with pytest.raises(ParseError) as excinfo:
        read_csv(write(tmp_path, "x1,y\ninf,0\n"))
    assert excinfo.value.row == 1


def test_label_outside_zero_one(tmp_path):
    with pytest.raises(LabelError):
        read_csv(write(tmp_path, "x1,y\n1,0\n2,2\n"))


@pytest.mark.parametrize("text", ["a,b,y\n1,2,0\n", "x1,x2\n1,2\n", "y\n1\n", "x2,x1,y\n1,2,0\n"])
def test_bad_header(tmp_path, text):
    with pytest.raises(ParseError) as excinfo:
        read_csv(write(tmp_path, text))
    assert excinfo.value.row == 0


def test_header_only(tmp_path):
    with pytest.raises(ParseError):
        read_csv(write(tmp_path, "x1,y\n"))


def test_empty_file(tmp_path):
    with pytest.raises(ParseError):
        read_csv(write(tmp_path, ""))


def test_missing_file(tmp_path):
    with pytest.raises(DataError):
        read_csv(str(tmp_path / "nope.csv"))


def test_fan_json_round_trip(tmp_path):
    path = str(tmp_path / "fan.json")
    save_fan(type_b_fan(2), path)
    payload = json.loads(open(path).read())
    assert min(min(c) for c in payload["cones"]) == 1
    assert np.array_equal(load_fan(path).rays, type_b_fan(2).rays)


def test_broken_fan_json(tmp_path):
    with pytest.raises(FanError):
        load_fan(write(tmp_path, "{not json", "fan.json"))


def test_params_plain_and_translated(tmp_path):
    a, t = load_params(write(tmp_path, "[1, 2.5]", "a.json"))
    assert a.tolist() == [1.0, 2.5]
    assert t is None
    a, t = load_params(write(tmp_path, '{"a": [1, 2], "t": [0.5, -1]}', "at.json"))
    assert t.tolist() == [0.5, -1.0]


@pytest.mark.parametrize("text", ["[1, 0]", '{"t": [1]}', "[1,"])
def test_bad_params(tmp_path, text):
    with pytest.raises(DataError):
        load_params(write(tmp_path, text, "a.json"))


def test_report_is_stable(tmp_path):
    store = DataStore(str(tmp_path / "run"))
    path = store.write_report({"b": 1, "a": [0.1, 2]})
    first = open(path, "rb").read()
    store.write_report({"a": [0.1, 2], "b": 1})
    assert open(path, "rb").read() == first
    assert json.loads(first)["schema"] == 1
    assert first.decode().index('"a"') < first.decode().index('"b"')


def test_grid_file_layout(tmp_path):
    store = DataStore(str(tmp_path))
    path = store.write_grid(np.array([0.5, 1.0]), np.array([2.0]), np.array([[3.0, 4.0]]), "grid.csv")
    header, row = open(path).read().splitlines()
    assert header == "y\\x,0.5,1"
    assert [float(v) for v in row.split(",")] == [2.0, 3.0, 4.0]


def test_resolve_fan_names():
    assert resolve_fan("kite:2").n == 4
    assert resolve_fan("typeb:2").n == 8
    assert resolve_fan("line").n == 2


@pytest.mark.parametrize("name", ["square:2", "kite:x", "typeb:"])
def test_resolve_fan_rejects(name):
    with pytest.raises(FanError):
        resolve_fan(name)


def test_rays_file(tmp_path):
    fan = resolve_fan("rays2d:" + write(tmp_path, "[[1,0],[0,1],[-1,-1]]", "rays.json"))
    assert fan.k == 3


def test_vary_fan():
    fan = vary_fan(type_b_fan(2), refine=(2.0, 1.0))
    assert fan.n == 9
    assert vary_fan(fan, coarsen=0).n == 8


def test_resolve_builtin_datasets():
    assert resolve_dataset("builtin:line8", "inner").labels.tolist() == [0, 0, 1, 1, 1, 1, 0, 0]
    assert resolve_dataset("builtin:diagonal3").m == 3
    assert default_fan_for("builtin:diagonal3") == "typeb:2"
    assert default_fan_for("data.csv") is None


def test_resolve_dataset_rejects():
    with pytest.raises(ValueError):
        resolve_dataset("builtin:circle")
    with pytest.raises(ValueError):
        resolve_dataset("builtin:diagonal3", "inner")
    with pytest.raises(ValueError):
        resolve_dataset("builtin:line8", "shuffled")


def test_split_is_seeded_and_disjoint(line_listed):
    train, held = split_dataset(line_listed, 0.25, seed=7)
    again, _ = split_dataset(line_listed, 0.25, seed=7)
    assert (train.m, held.m) == (6, 2)
    assert np.array_equal(train.points, again.points)
    joined = sorted(train.points.ravel().tolist() + held.points.ravel().tolist())
    assert joined == sorted(line_listed.points.ravel().tolist())


def test_split_edges(line_listed):
    assert split_dataset(line_listed, 0.0) == (line_listed, None)
    with pytest.raises(ValueError):
        split_dataset(line_listed, 0.01)
    with pytest.raises(ValueError):
        split_dataset(line_listed, 1.0)
