import csv
import json
import logging

import numpy as np
import pytest

from blockbloom import bench
from blockbloom.bench import (
    CSV_FIELDS,
    AllocationError,
    frontier_configs,
    frontier_sweep,
    generate_unique_keys,
    layout_grid_search,
    measure_fpr,
    measure_throughput,
    random_access_baseline,
    write_reports,
)
from blockbloom.config import FilterConfig, Variant
from blockbloom.core import BloomFilter
from blockbloom.layout import Layout

SMALL_SBF = FilterConfig("SBF", m=1 << 16, B=256, S=64, k=8)


def test_keys_unique_and_deterministic():
    a = generate_unique_keys(200_000, seed=1)
    assert a.dtype == np.uint64
    assert len(np.unique(a)) == len(a)
    np.testing.assert_array_equal(a, generate_unique_keys(200_000, seed=1))
    assert not np.array_equal(a[:100], generate_unique_keys(100, seed=2))


def test_key_streams_disjoint():
    a = generate_unique_keys(100_000, seed=5, stream=0)
    b = generate_unique_keys(100_000, seed=5, stream=1)
    assert len(np.intersect1d(a, b)) == 0


def test_key_offsets_concatenate():
    whole = generate_unique_keys(1000, seed=4, stream=1)
    parts = [generate_unique_keys(250, seed=4, stream=1, start=s) for s in range(0, 1000, 250)]
    np.testing.assert_array_equal(np.concatenate(parts), whole)


def test_keys_reject_zero():
    with pytest.raises(ValueError):
        generate_unique_keys(0)


@pytest.mark.parametrize("op", ["add", "contains"])
def test_measure_throughput_report(op):
    rep = measure_throughput(SMALL_SBF, op, 20_000, repetitions=4)
    assert rep.op == op
    assert rep.keys_processed == 20_000
    assert 1 <= rep.repetitions <= 4 and len(rep.timings) == rep.repetitions
    assert rep.throughput == pytest.approx(20_000 * rep.repetitions / rep.elapsed)
    assert rep.throughput > 0
    assert (rep.theta, rep.phi) == ((1, 1) if op == "add" else (1, 4))
    assert 0 < rep.fill_ratio < 1


def test_measure_throughput_workers_and_layout():
    rep = measure_throughput(SMALL_SBF, "contains", 10_000, workers=2, layout=Layout(2, 2), repetitions=2)
    assert rep.worker_count == 2 and rep.layout == Layout(2, 2)


def test_measure_throughput_input_errors():
    with pytest.raises(ValueError):
        measure_throughput(SMALL_SBF, "contains", 0)
    with pytest.raises(ValueError):
        measure_throughput(SMALL_SBF, "delete", 10)


def test_allocation_failure_is_reported(monkeypatch):
    def boom(config):
        raise MemoryError

    monkeypatch.setattr(bench, "BloomFilter", boom)
    with pytest.raises(AllocationError, match="cannot allocate"):
        measure_fpr(SMALL_SBF, 100)


def test_measure_fpr_fields():
    res = measure_fpr(SMALL_SBF, 50_000, seed=3)
    assert res.queries == 50_000
    assert res.fpr == res.positives / res.queries
    assert res.inserted == round(SMALL_SBF.m_effective * np.log(2) / SMALL_SBF.k)
    assert 0.4 < res.fill_ratio <= 0.5
    assert res.stderr == pytest.approx(np.sqrt(res.fpr * (1 - res.fpr) / res.queries))


def test_measure_fpr_chunking_consistent():
    # a query count past one chunk must give the same positives as a single pass
    cfg = FilterConfig("CBF", m=1 << 12, k=3)
    total = (1 << 22) + 1000
    big = measure_fpr(cfg, total, seed=7)
    f = BloomFilter(cfg)
    f.bulk_add(generate_unique_keys(big.inserted, 7, stream=0))
    assert big.positives == int(f.bulk_contains(generate_unique_keys(total, 7, stream=1)).sum())


def test_grid_search_covers_all_layouts(tmp_path):
    res = layout_grid_search(SMALL_SBF, "contains", 8000, repetitions=2)
    assert len(res.rows) == 6
    assert {(r.theta, r.phi) for r in res.rows} == {(1, 1), (1, 2), (1, 4), (2, 1), (2, 2), (4, 1)}
    assert res.best.throughput == max(r.throughput for r in res.rows)
    out = tmp_path / "grid.csv"
    res.to_csv(out)
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 6
    assert sum(int(r["best"]) for r in rows) == 1
    assert "*" in res.table()


def test_write_reports_schema(tmp_path):
    rep = measure_throughput(SMALL_SBF, "add", 5000, repetitions=2)
    path = tmp_path / "r.csv"
    write_reports([rep], path)
    with path.open() as fh:
        reader = csv.DictReader(fh)
        assert reader.fieldnames == CSV_FIELDS
        row = next(reader)
    assert row["variant"] == "SBF" and row["op"] == "add" and row["fpr"] == ""
    jpath = tmp_path / "r.json"
    write_reports([rep], jpath, fmt="json")
    assert set(json.loads(jpath.read_text())[0]) == set(CSV_FIELDS)


def test_baseline_rates():
    for op in ("read", "write"):
        assert random_access_baseline(1 << 16, op, access_count=50_000, repetitions=2) > 0
    with pytest.raises(ValueError):
        random_access_baseline(1024, "scan")


def test_frontier_configs_expansion():
    cfgs = frontier_configs(["RBBF", "SBF", "CSBF", "CBF"], [64, 256], 1 << 16, S=64, k=16)
    kinds = [(c.variant, c.B, c.z) for c in cfgs]
    assert (Variant.RBBF, 64, 0) in kinds
    assert (Variant.SBF, 256, 0) in kinds
    assert (Variant.SBF, 64, 0) in kinds
    assert [(v, z) for v, B, z in kinds if v is Variant.CSBF] == [(Variant.CSBF, 2), (Variant.CSBF, 4)]
    assert sum(v is Variant.CBF for v, _, _ in kinds) == 1
    # k=6 is not a multiple of s=4, so that SBF is skipped
    skipped = frontier_configs(["SBF"], [128, 256], 1 << 16, S=64, k=6)
    assert [c.B for c in skipped] == [128]


def test_frontier_sweep_writes_rows(tmp_path):
    out, js = tmp_path / "f.csv", tmp_path / "f.json"
    reports = frontier_sweep(
        ["SBF", "CBF"], [256], [1 << 15], out, k=8, key_count=3000, query_count=5000,
        grid=False, json_path=js, baseline_accesses=20_000,
    )
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == len(reports) == 4
    assert {r["op"] for r in rows} == {"add", "contains"}
    assert all(float(r["sol_fraction"]) > 0 and r["fpr"] != "" for r in rows)
    assert len(json.loads(js.read_text())) == 4


def test_frontier_sweep_survives_failed_cell(tmp_path, monkeypatch, caplog):
    real = bench.measure_fpr

    def flaky(config, *a, **kw):
        if config.variant is Variant.CBF:
            raise RuntimeError("simulated failure")
        return real(config, *a, **kw)

    monkeypatch.setattr(bench, "measure_fpr", flaky)
    out = tmp_path / "f.csv"
    with caplog.at_level(logging.ERROR):
        reports = frontier_sweep(
            ["CBF", "SBF"], [256], [1 << 15], out, k=8, key_count=2000, query_count=2000,
            grid=False, baseline_accesses=10_000,
        )
    assert {r.variant for r in reports} == {"SBF"}
    assert len(list(csv.DictReader(out.open()))) == 2
    assert "failed" in caplog.text
