import json

import numpy as np
import pytest

from multiras import (
    DuplicateCellError,
    IdentityViolationError,
    MarginSet,
    MissingCellError,
    NegativeValueError,
    ParseError,
    Tensor,
    check_margin_compatibility,
    read_io_table,
    read_margins,
    read_tensor,
    read_tensor_wide,
    write_margins,
    write_tensor,
)

from .conftest import positive_tensor


def write_lines(path, *lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class TestReadTensor:
    def test_2x2_example(self, tmp_path):
        path = tmp_path / "t.csv"
        write_lines(path, "r,c,value", "a,x,1", "a,y,2", "b,x,3", "b,y,4")
        t = read_tensor(path)
        assert t.values.tolist() == [[1.0, 2.0], [3.0, 4.0]]
        assert t.dim_names == ("r", "c")
        assert t.labels == (("a", "b"), ("x", "y"))

    def test_dimension_order_is_column_order(self, tmp_path):
        path = tmp_path / "t.csv"
        write_lines(path, "c,r,value", "x,a,1", "x,b,2", "y,a,3", "y,b,4")
        t = read_tensor(path)
        assert t.dim_names == ("c", "r")
        assert t.shape == (2, 2)
        assert t.get((0, 1)) == 2.0  # (c=x, r=b)

    def test_label_order_is_first_appearance(self, tmp_path):
        path = tmp_path / "t.csv"
        write_lines(path, "d,value", "zebra,1", "apple,2", "mango,3")
        t = read_tensor(path)
        assert t.labels == (("zebra", "apple", "mango"),)
        assert t.values.tolist() == [1.0, 2.0, 3.0]

    def test_missing_cell(self, tmp_path):
        path = tmp_path / "t.csv"
        write_lines(path, "r,c,value", "a,x,1", "a,y,2", "b,x,3")
        with pytest.raises(MissingCellError) as err:
            read_tensor(path)
        assert "('b', 'y')" in str(err.value)

    def test_duplicate_cell_line_number(self, tmp_path):
        path = tmp_path / "t.csv"
        write_lines(path, "r,value", "a,1", "b,2", "a,3")
        with pytest.raises(DuplicateCellError) as err:
            read_tensor(path)
        assert err.value.line == 4

    def test_negative_value_line_number(self, tmp_path):
        path = tmp_path / "t.csv"
        write_lines(path, "r,value", "a,1", "b,-2")
        with pytest.raises(NegativeValueError) as err:
            read_tensor(path)
        assert err.value.line == 3

    def test_bad_number_line(self, tmp_path):
        path = tmp_path / "t.csv"
        write_lines(path, "r,value", "a,1", "b,oops")
        with pytest.raises(ParseError) as err:
            read_tensor(path)
        assert err.value.line == 3

    def test_nan_rejected(self, tmp_path):
        path = tmp_path / "t.csv"
        write_lines(path, "r,value", "a,nan")
        with pytest.raises(ParseError):
            read_tensor(path)

    def test_wrong_field_count(self, tmp_path):
        path = tmp_path / "t.csv"
        write_lines(path, "r,c,value", "a,x,1,9")
        with pytest.raises(ParseError) as err:
            read_tensor(path)
        assert err.value.line == 2

    def test_missing_value_header(self, tmp_path):
        path = tmp_path / "t.csv"
        write_lines(path, "r,c,amount", "a,x,1")
        with pytest.raises(ParseError) as err:
            read_tensor(path)
        assert err.value.line == 1

    def test_empty_file(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(ParseError):
            read_tensor(path)

    def test_header_only(self, tmp_path):
        path = tmp_path / "t.csv"
        write_lines(path, "r,value")
        with pytest.raises(ParseError):
            read_tensor(path)


class TestRoundTrip:
    def test_write_read_bit_identical(self, tmp_path, rng):
        t = Tensor(
            rng.uniform(0.0, 10.0, (3, 4, 2)),
            ("row", "col", "layer"),
        )
        path = tmp_path / "t.csv"
        write_tensor(t, path)
        back = read_tensor(path)
        np.testing.assert_array_equal(back.values, t.values)
        assert back.dim_names == t.dim_names
        assert back.labels == t.labels

    def test_rewrite_is_byte_identical(self, tmp_path, rng):
        t = positive_tensor(rng, (4, 3))
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        write_tensor(t, first)
        write_tensor(read_tensor(first), second)
        assert first.read_bytes() == second.read_bytes()


class TestWideReader:
    def test_wide_matrix(self, tmp_path):
        path = tmp_path / "w.csv"
        write_lines(path, "industry,x,y", "a,1,2", "b,3,4")
        t = read_tensor_wide(path)
        assert t.values.tolist() == [[1.0, 2.0], [3.0, 4.0]]
        assert t.dim_names == ("industry", "col")
        assert t.labels == (("a", "b"), ("x", "y"))

    def test_wide_negative_rejected(self, tmp_path):
        path = tmp_path / "w.csv"
        write_lines(path, "r,x", "a,-1")
        with pytest.raises(NegativeValueError):
            read_tensor_wide(path)


class TestMargins:
    def test_write_read_roundtrip_compatible(self, tmp_path, rng):
        t = positive_tensor(rng, (3, 4, 2), names=("row", "col", "layer"))
        margins = MarginSet.from_tensor(t)
        manifest = write_margins(margins, tmp_path / "m")
        back = read_margins(manifest)
        assert len(back) == 3
        assert back.parent_dim_names == ("row", "col", "layer")
        assert back.parent_shape == (3, 4, 2)
        assert check_margin_compatibility(back, 1e-9) == []
        for d in range(3):
            np.testing.assert_array_equal(back[d].values, margins[d].values)

    def test_manifest_missing_margin(self, tmp_path, rng):
        t = positive_tensor(rng, (2, 2), names=("r", "c"))
        manifest = write_margins(MarginSet.from_tensor(t), tmp_path / "m")
        raw = json.loads(manifest.read_text())
        raw["margins"] = raw["margins"][:1]
        manifest.write_text(json.dumps(raw))
        with pytest.raises(ParseError):
            read_margins(manifest)

    def test_manifest_duplicate_drop(self, tmp_path, rng):
        t = positive_tensor(rng, (2, 2), names=("r", "c"))
        manifest = write_margins(MarginSet.from_tensor(t), tmp_path / "m")
        raw = json.loads(manifest.read_text())
        raw["margins"][1]["dropped_dim"] = "r"
        manifest.write_text(json.dumps(raw))
        with pytest.raises(ParseError):
            read_margins(manifest)

    def test_margin_file_with_wrong_dims(self, tmp_path, rng):
        t = positive_tensor(rng, (2, 3), names=("r", "c"))
        margins = MarginSet.from_tensor(t)
        manifest = write_margins(margins, tmp_path / "m")
        # overwrite one margin file with wrong dimension names
        bad = Tensor(np.ones(3), ("wrong",))
        write_tensor(bad, tmp_path / "m" / "margins_drop_r.csv")
        with pytest.raises(ParseError):
            read_margins(manifest)

    def test_bad_json(self, tmp_path):
        manifest = tmp_path / "m.json"
        manifest.write_text("{not json", encoding="utf-8")
        with pytest.raises(ParseError):
            read_margins(manifest)


def write_io_fixture(tmp_path, flows, u1, u2, p, v1, v2):
    names = {}
    flows_t = Tensor(flows, ("i", "j"))
    write_tensor(flows_t, tmp_path / "flows.csv")
    names["flows"] = "flows.csv"
    for key, vec in (("u1", u1), ("u2", u2), ("p", p), ("v1", v1), ("v2", v2)):
        write_tensor(Tensor(vec, ("i",)), tmp_path / f"{key}.csv")
        names[key] = f"{key}.csv"
    manifest = tmp_path / "table.json"
    manifest.write_text(json.dumps(names), encoding="utf-8")
    return manifest


class TestIOTableReader:
    def test_valid_table(self, tmp_path):
        manifest = write_io_fixture(
            tmp_path,
            [[1.0, 1.0], [1.0, 1.0]],
            u1=[2.0, 2.0],
            u2=[2.0, 2.0],
            p=[3.0, 3.0],
            v1=[1.0, 1.0],
            v2=[1.0, 1.0],
        )
        table = read_io_table(manifest)
        assert table.n == 2
        np.testing.assert_array_equal(table.p, [3.0, 3.0])

    def test_identity_violation(self, tmp_path):
        manifest = write_io_fixture(
            tmp_path,
            [[1.0, 1.0], [1.0, 1.0]],
            u1=[2.0, 2.0],
            u2=[2.0, 2.0],
            p=[3.0, 4.0],
            v1=[1.0, 1.0],
            v2=[1.0, 1.0],
        )
        with pytest.raises(IdentityViolationError) as err:
            read_io_table(manifest)
        assert err.value.index == 1

    def test_missing_key(self, tmp_path):
        manifest = write_io_fixture(
            tmp_path, [[1.0]], u1=[1.0], u2=[1.0], p=[2.0], v1=[1.0], v2=[1.0]
        )
        raw = json.loads(manifest.read_text())
        del raw["v2"]
        manifest.write_text(json.dumps(raw))
        with pytest.raises(ParseError):
            read_io_table(manifest)

    def test_non_square_flows(self, tmp_path):
        manifest = write_io_fixture(
            tmp_path, [[1.0]], u1=[1.0], u2=[1.0], p=[2.0], v1=[1.0], v2=[1.0]
        )
        write_tensor(Tensor(np.ones((1, 2)), ("i", "j")), tmp_path / "flows.csv")
        with pytest.raises(ParseError):
            read_io_table(manifest)

    def test_mapping_source(self, tmp_path):
        manifest = write_io_fixture(
            tmp_path, [[1.0]], u1=[1.0], u2=[1.0], p=[2.0], v1=[1.0], v2=[1.0]
        )
        raw = {k: str(tmp_path / v) for k, v in json.loads(manifest.read_text()).items()}
        table = read_io_table(raw)
        assert table.n == 1
