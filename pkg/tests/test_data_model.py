import json

import numpy as np
import pytest

from masc.data_model import (
    CategoryEncoder,
    Dataset,
    Schema,
    SchemaError,
    concat,
    group_cardinalities,
    joint_scale,
    load_csv,
    load_many,
    load_schema,
    output_schema,
    standard_scale,
    write_csv,
)

from conftest import counts_dataset, make_dataset

CSV = """age,job,hours,race,income
39,clerk,40,1,<=50K
50,manager,13,2,>50K
38,clerk,40,6,<=50K
53,?,40,1,>50K
28,driver,,3,<=50K
37,manager,40,8,>50K
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_csv_basic(tmp_path, csv_schema):
    ds = load_csv(write(tmp_path, "a.csv", CSV), csv_schema)
    assert ds.id == "a"
    assert ds.n == 4 and ds.meta["rows_dropped"] == 2
    assert ds.group_labels.tolist() == [0, 1, 2, 2]
    assert ds.targets.tolist() == [0, 1, 0, 1]
    # job: clerk -> 0, manager -> 1 by first appearance
    assert ds.features[:, 1].tolist() == [0, 1, 0, 1]
    assert ds.features[:, 0].tolist() == [39, 50, 38, 37]


def test_unmapped_category_names_column(tmp_path, csv_schema):
    bad = CSV.replace("37,manager,40,8", "37,manager,40,9")
    with pytest.raises(SchemaError, match="unmapped category '9'.*race"):
        load_csv(write(tmp_path, "b.csv", bad), csv_schema)


def test_missing_column(tmp_path, csv_schema):
    with pytest.raises(SchemaError, match="missing column"):
        load_csv(write(tmp_path, "c.csv", "age,race,income\n1,1,>50K\n"), csv_schema)


def test_shared_encoder_across_files(tmp_path, csv_schema):
    a = write(tmp_path, "a.csv", "age,job,hours,race,income\n1,x,2,1,>50K\n2,y,2,2,<=50K\n")
    b = write(tmp_path, "b.csv", "age,job,hours,race,income\n1,y,2,1,>50K\n2,z,2,2,<=50K\n")
    a_ds, b_ds = load_many({"a": a, "b": b}, csv_schema)
    assert a_ds.features[:, 1].tolist() == [0, 1]
    assert b_ds.features[:, 1].tolist() == [1, 2]


def test_encoder_rejects_text_in_numeric_column():
    import pandas as pd

    enc = CategoryEncoder()
    enc.encode("age", pd.Series(["1", "2"]))
    with pytest.raises(SchemaError, match="numeric"):
        enc.encode("age", pd.Series(["3", "old"]))


def test_schema_invariants():
    base = dict(
        feature_names=["a"], protected_attribute="g", protected_groups=["A", "B"],
        aggregation_map={"1": "A"}, target="y", positive_label="1",
    )
    Schema(**base)
    with pytest.raises(SchemaError):
        Schema(**{**base, "protected_groups": ["A"]})
    with pytest.raises(SchemaError):
        Schema(**{**base, "aggregation_map": {"1": "C"}})
    with pytest.raises(SchemaError):
        Schema(**{**base, "feature_names": ["a", "y"]})
    with pytest.raises(SchemaError):
        Schema(**{**base, "feature_names": []})


def test_schema_roundtrip(tmp_path, csv_schema):
    p = tmp_path / "schema.json"
    p.write_text(json.dumps(csv_schema.to_dict()))
    assert load_schema(p) == csv_schema
    y = tmp_path / "schema.yaml"
    y.write_text("feature_names: [a]\nprotected_attribute: g\nprotected_groups: [A, B]\n"
                 "aggregation_map: {1: A, 2: B}\ntarget: y\npositive_label: yes\n")
    s = load_schema(y)
    assert s.group_index("2") == 1
    q = tmp_path / "bad.json"
    q.write_text(json.dumps({"feature_names": ["a"]}))
    with pytest.raises(SchemaError, match="missing keys"):
        load_schema(q)


def test_standard_scale_example():
    ds = make_dataset([0, 1], features=np.array([[1.0, 5.0], [3.0, 5.0]]))
    out = standard_scale(ds).features
    assert out[:, 0].tolist() == [-1.0, 1.0]
    assert out[:, 1].tolist() == [0.0, 0.0]


def test_standard_scale_idempotent():
    ds = counts_dataset([30, 10, 5])
    once = standard_scale(ds)
    twice = standard_scale(once)
    assert np.allclose(once.features, twice.features, atol=1e-12)
    assert np.allclose(once.features.mean(0), 0, atol=1e-12)
    assert np.allclose(once.features.std(0), 1, atol=1e-12)


def test_standard_scale_needs_two_rows():
    with pytest.raises(ValueError):
        standard_scale(make_dataset([0]))


def test_joint_scale_keeps_shift():
    a = make_dataset([0] * 4, features=np.zeros((4, 2)), id="a")
    b = make_dataset([0] * 4, features=np.ones((4, 2)), id="b")
    sa, sb = joint_scale([a, b])
    assert np.allclose(sa.features, -1) and np.allclose(sb.features, 1)


def test_cardinalities():
    ds = counts_dataset([3, 0, 2])
    assert group_cardinalities(ds).tolist() == [3, 0, 2]


def test_dataset_validation(schema3):
    with pytest.raises(ValueError, match="0/1"):
        Dataset("x", np.zeros((2, 2)), [0, 1], [0, 2], schema3)
    with pytest.raises(ValueError, match="out of range"):
        Dataset("x", np.zeros((2, 2)), [0, 3], [0, 1], schema3)
    with pytest.raises(ValueError, match="columns"):
        Dataset("x", np.zeros((2, 3)), [0, 1], [0, 1], schema3)
    ds = Dataset("x", np.zeros((2, 2)), [0, 1], [0, 1], schema3)
    with pytest.raises(ValueError):
        ds.features[0, 0] = 1.0


def test_take_and_concat_provenance():
    a = counts_dataset([2, 1], id="a")
    b = counts_dataset([1, 1], id="b")
    joined = concat([a.take([2, 0]), b.take([1])], id="j")
    assert joined.source_ids.tolist() == ["a", "a", "b"]
    assert joined.source_rows.tolist() == [2, 0, 1]
    assert joined.group_labels.tolist() == [1, 0, 1]


def test_write_csv_roundtrip(tmp_path, csv_schema):
    ds = load_csv(write(tmp_path, "a.csv", CSV), csv_schema)
    out = tmp_path / "out.csv"
    write_csv(ds, out, with_provenance=True)
    text = out.read_bytes().decode()
    assert text.splitlines()[0] == "age,job,hours,race,income,source_id,source_row"
    back = load_csv(out, output_schema(csv_schema))
    assert np.array_equal(back.features, ds.features)
    assert np.array_equal(back.group_labels, ds.group_labels)
    assert np.array_equal(back.targets, ds.targets)
