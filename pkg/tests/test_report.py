from fractions import Fraction

import pytest

from pouw.report import (
    MINER_COLUMNS,
    Table,
    format_value,
    metrics_table,
    read_csv,
    update_summary,
    write_csv,
    write_table,
)
from pouw.simulator import MempoolModel, SimConfig, equal_miners, run_sim


def test_format_value():
    assert format_value(0.1) == "0.1"
    assert format_value(1 / 3) == repr(1 / 3)
    assert format_value(True) == "true"
    assert format_value(Fraction(1, 2)) == "1/2"
    assert format_value(Fraction(4, 2)) == "2"
    assert format_value("auto") == "auto"


def test_table_rows():
    table = Table("t", ("a", "b"))
    table.add(1, 2.5)
    table.add(3, 4.5)
    assert table.column("b") == [2.5, 4.5]
    assert table.as_dicts()[1] == {"a": 3, "b": 4.5}
    with pytest.raises(ValueError):
        table.add(1)


def test_write_table(tmp_path):
    table = Table("t", ("name", "value"))
    table.add("x, y", 0.25)
    path = write_table(table, tmp_path / "nested")
    assert path == tmp_path / "nested" / "t.csv"
    assert path.read_text().splitlines() == ["name,value", '"x, y",0.25']
    assert read_csv(path) == [{"name": "x, y", "value": "0.25"}]


def test_metrics_table(tmp_path):
    config = SimConfig(
        miners=equal_miners(3),
        kappa0=1000,
        mempool=MempoolModel(c_min=50, c_max=150),
        max_blocks=20,
        seed=1,
    )
    metrics = run_sim(config)
    table = metrics_table(metrics)
    assert table.name == "sim"
    assert table.columns == MINER_COLUMNS
    assert table.column("miner_id") == [0, 1, 2]
    assert sum(table.column("blocks_won")) == 20
    rows = read_csv(write_table(table, tmp_path))
    assert [int(r["blocks_won"]) for r in rows] == table.column("blocks_won")


def test_update_summary_replaces_own_rows(tmp_path):
    update_summary(tmp_path, "sim", {"blocks": 10, "psi": 0.5})
    update_summary(tmp_path, "h1", {"ratio=2:block_reward_ratio": 2.0})
    update_summary(tmp_path, "sim", {"blocks": 12})
    rows = read_csv(tmp_path / "summary.csv")
    assert [(r["name"], r["metric"], r["value"]) for r in rows] == [
        ("h1", "ratio=2:block_reward_ratio", "2.0"),
        ("sim", "blocks", "12"),
    ]


def test_write_csv_is_byte_stable(tmp_path):
    rows = [(1, 0.1 + 0.2, Fraction(2, 3))]
    a = write_csv(tmp_path / "a.csv", ("i", "x", "f"), rows).read_bytes()
    b = write_csv(tmp_path / "b.csv", ("i", "x", "f"), rows).read_bytes()
    assert a == b
    assert b"0.30000000000000004" in a
