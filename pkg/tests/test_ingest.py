import numpy as np
import pytest

from topmix.errors import ParseError, SchemaError
from topmix.ingest import binarize_target, parse_dataset
from topmix.schema import Attribute, PositiveRule, SchemaSpec, cleveland_schema

from conftest import CLEVELAND_DATA, requires_cleveland


@pytest.fixture
def toy_schema():
    return SchemaSpec(
        attributes=(
            Attribute("x", "numeric"),
            Attribute("c", "categorical", ("a", "b")),
        ),
        target="y",
        positive_rule=PositiveRule(kind="greater-than", threshold=0.0),
    )


def _write(tmp_path, text):
    path = tmp_path / "data.csv"
    path.write_text(text, encoding="utf-8")
    return path


def test_drops_rows_with_missing_token(tmp_path, toy_schema):
    path = _write(tmp_path, "1.0,a,0\n2.0,?,1\n3.0,b,1\n")
    dataset, report = parse_dataset(path, toy_schema)
    assert report.total_rows == 3
    assert report.kept_rows == 2
    assert report.dropped_rows == 1
    assert report.dropped_indices == (1,)
    assert report.kept_rows + report.dropped_rows == report.total_rows
    assert dataset.rows == ((1.0, "a"), (3.0, "b"))
    assert dataset.labels.tolist() == [0, 1]


def test_empty_file(tmp_path, toy_schema):
    dataset, report = parse_dataset(_write(tmp_path, ""), toy_schema)
    assert dataset.n == 0
    assert report.total_rows == 0
    assert report.dropped_rows == 0


def test_blank_lines_are_not_data_rows(tmp_path, toy_schema):
    dataset, report = parse_dataset(_write(tmp_path, "1.0,a,0\n\n2.0,b,1\n\n"), toy_schema)
    assert report.total_rows == 2
    assert dataset.n == 2


def test_header_skipping(tmp_path, toy_schema):
    path = _write(tmp_path, "x,c,y\n1.0,a,0\n")
    dataset, _ = parse_dataset(path, toy_schema, has_header=True)
    assert dataset.n == 1


def test_wrong_field_count_reports_row(tmp_path, toy_schema):
    path = _write(tmp_path, "1.0,a,0\n2.0,b\n")
    with pytest.raises(ParseError, match="row 1"):
        parse_dataset(path, toy_schema)


def test_token_outside_domain(tmp_path, toy_schema):
    with pytest.raises(SchemaError, match="'zz'"):
        parse_dataset(_write(tmp_path, "1.0,zz,0\n"), toy_schema)


@pytest.mark.parametrize("bad", ["inf", "nan", "-inf", "abc"])
def test_bad_numeric_is_parse_error(tmp_path, toy_schema, bad):
    with pytest.raises(ParseError):
        parse_dataset(_write(tmp_path, f"{bad},a,0\n"), toy_schema)


def test_bad_target_is_parse_error(tmp_path, toy_schema):
    with pytest.raises(ParseError, match="row 0"):
        parse_dataset(_write(tmp_path, "1.0,a,huh\n"), toy_schema)


def test_row_order_preserved_and_deterministic(tmp_path, toy_schema):
    path = _write(tmp_path, "3.0,b,1\n1.0,a,0\n2.0,a,4\n")
    d1, r1 = parse_dataset(path, toy_schema)
    d2, r2 = parse_dataset(path, toy_schema)
    assert d1.rows == d2.rows == ((3.0, "b"), (1.0, "a"), (2.0, "a"))
    assert np.array_equal(d1.labels, d2.labels)
    assert r1 == r2


def test_alternate_delimiter(tmp_path, toy_schema):
    dataset, _ = parse_dataset(_write(tmp_path, "1.0;a;0\n"), toy_schema, delimiter=";")
    assert dataset.rows == ((1.0, "a"),)


@pytest.mark.parametrize(
    "token,expected",
    [("0", 0), ("1", 1), ("2", 1), ("3", 1), ("4", 1)],
)
def test_binarize_target_heart_rule(token, expected):
    rule = PositiveRule(kind="greater-than", threshold=0.0)
    assert binarize_target(token, rule) == expected


@requires_cleveland
def test_cleveland_parses_to_297_complete_rows():
    dataset, report = parse_dataset(CLEVELAND_DATA, cleveland_schema())
    assert report.total_rows == 303
    assert report.dropped_rows == 6
    assert dataset.n == 297
    frac0 = (dataset.labels == 0).mean()
    assert 0.52 <= frac0 <= 0.56  # ~54% healthy
