import json
import math

import pytest

import spatialfair as sf

UNIT = sf.Region(0.0, 0.0, 1.0, 1.0)


def test_llr_values():
    assert sf.log_lik_null_max(10, 5) == pytest.approx(10 * math.log(0.5), abs=1e-12)
    expected = math.log((1 / 6) * (5 / 6) ** 5) - 10 * math.log(0.5)
    assert sf.llr_from_counts(4, 4, 10, 5) == pytest.approx(expected, abs=1e-9)
    assert sf.llr_from_counts(4, 2, 10, 5) == 0.0
    assert sf.llr_from_counts(4, 4, 10, 5, "lower-inside") == 0.0


def test_dataset_and_range_count(tmp_path):
    d = sf.dataset_from_columns([0.0, 1.0, 0.0, 1.0], [0.0, 0.0, 1.0, 1.0], [1, 0, 1, 1])
    assert (d.N, d.P) == (4, 3)
    assert d.rho == pytest.approx(0.75)
    bb = d.bbox
    assert (bb.xmin, bb.ymin, bb.xmax, bb.ymax) == (0.0, 0.0, 1.0, 1.0)
    counts = sf.range_count(d, [(0.0, 0.0, 1.0, 1.0), (0.0, 0.0, 0.5, 0.5), (2.0, 2.0, 3.0, 3.0)])
    assert counts == [(4, 3), (1, 1), (0, 0)]

    path = tmp_path / "d.csv"
    d.save(str(path))
    back = sf.load_dataset(str(path))
    assert back.outcomes() == d.outcomes()


def test_bad_csv_reports_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,lon,lat,outcome\na,0,0,1\nb,0,0,2\n")
    with pytest.raises(sf.DataError, match="line 3"):
        sf.load_dataset(str(path))
    with pytest.raises(ValueError):
        sf.load_dataset(str(path))


def test_p_value_and_cutoff():
    simulated = [50.0 - i for i in range(199)]
    assert sf.global_p_value(51.0, simulated) == 0.005
    assert sf.critical_value(simulated, 0.005) == 50.0
    with pytest.raises(ValueError):
        sf.critical_value(simulated[:99], 0.005)


def test_region_generators():
    assert len(sf.regular_grid(UNIT, 2, 2)) == 4
    parts = sf.random_partitionings(UNIT, 3, 10, 40, seed=7)
    assert len(parts) == 3
    assert all(121 <= len(p) <= 1681 for p in parts)
    assert [len(p) for p in parts] == [len(p) for p in sf.random_partitionings(UNIT, 3, 10, 40, seed=7)]


def test_audit_uniform_split_is_unfair():
    d = sf.gen_uniform_split(4000, UNIT, seed=1)
    report = sf.audit(d, json.dumps({"kind": "random", "count": 5}), worlds=200, seed=1)
    assert report["verdict"]["fair"] is False
    assert report["verdict"]["p_value"] == pytest.approx(0.005)
    assert report["evidence"]
    assert report["dataset"]["P"] == 2000


def test_audit_fair_data_is_fair():
    locs = sf.gen_uniform_split(2000, UNIT, seed=2).locations()
    d = sf.gen_fair_bernoulli(locs, 0.5, seed=2)
    report = sf.audit(d, json.dumps({"kind": "regular", "mx": 5, "my": 5}), worlds=200, seed=2)
    assert report["verdict"]["fair"] is True
    assert report["evidence"] == []


def test_mean_var():
    d = sf.gen_uniform_split(2000, UNIT, seed=3)
    assert sf.mean_var(d, [sf.regular_grid(d.bbox, 1, 1)])["mean_var"] == 0.0
    halves = [sf.Region(d.bbox.xmin, d.bbox.ymin, 0.5, d.bbox.ymax), sf.Region(0.5, d.bbox.ymin, d.bbox.xmax, d.bbox.ymax)]
    rep = sf.mean_var(d, [halves], top_k=2)
    assert rep["mean_var"] == pytest.approx(((0.667 - 0.333) / 2) ** 2, rel=1e-12)
    assert len(rep["top_contributors"]) == 2


def test_planted_and_kmeans():
    rect = sf.Region(0.0, 0.0, 5.0, 5.0)
    d = sf.gen_planted(2000, rect, sf.Region(1.0, 1.0, 2.0, 2.0), 0.5, 0.9, seed=4)
    assert d.N == 2000
    centers = sf.kmeans_centers(d, 5, seed=1)
    assert len(centers) == 5
    assert centers == sf.kmeans_centers(d, 5, seed=1)
