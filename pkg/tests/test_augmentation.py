import numpy as np
import pytest

from masc.augmentation import augment, build_pool, majority_group
from masc.data_model import group_cardinalities
from masc.discrepancy import mmd
from masc.fairness import group_ratio
from masc.pipeline import PipelineConfig, cluster_datasets, run_pipeline

from conftest import counts_dataset, make_dataset


def test_singleton_cluster_pool_empty():
    t = counts_dataset([3, 1, 1], id="t")
    pool = build_pool([t], exclude="t")
    assert pool.N == 0 and pool.N_per_group == {0: 0, 1: 0, 2: 0}


def test_pool_counts_direct():
    t = counts_dataset([3, 1, 1], id="t")
    donor = counts_dataset([2, 7, 0], id="d")
    assert build_pool([t, donor], exclude="t").N_per_group[1] == 7


def test_pool_excludes_target_and_requires_membership():
    t = counts_dataset([3, 1, 1], id="t")
    with pytest.raises(ValueError, match="not a member"):
        build_pool([counts_dataset([1, 1, 1], id="d")], exclude="t")
    pool = build_pool([t, counts_dataset([1, 1, 1], id="d")], exclude="t")
    assert all(d != "t" for rows in pool.per_group_instances.values() for d, _ in rows)


def test_pool_matches_concatenate_and_count(planted_benchmark):
    members = planted_benchmark.datasets[:3]
    pool = build_pool(members, exclude=members[0].id)
    stacked = np.concatenate([ds.group_labels for ds in members[1:]])
    expected = np.bincount(stacked, minlength=3)
    assert [pool.N_per_group[g] for g in range(3)] == expected.tolist()


def test_balance_example():
    t = counts_dataset([90, 10, 10], id="t")
    donor = counts_dataset([50, 100, 100], id="d", seed=1)
    res = augment(t, build_pool([t, donor], "t"), seed=42)
    assert res.per_group_before.tolist() == [90, 10, 10]
    assert res.per_group_after.tolist() == [90, 90, 90]
    assert np.allclose(group_ratio(res.augmented), 1 / 3)
    assert res.shortfall == {}
    assert len(res.borrowed) == 160
    # borrowed rows are distinct (without replacement)
    assert len(set(res.borrowed)) == 160


def test_starved_pool_shortfall():
    t = counts_dataset([100, 20], id="t")
    t = make_dataset(t.group_labels, id="t", schema=_two_group_schema())
    donor = make_dataset(np.repeat([0, 1], [5, 30]), id="d", schema=_two_group_schema())
    res = augment(t, build_pool([t, donor], "t"), seed=0)
    assert res.per_group_after.tolist() == [100, 50]
    assert res.shortfall == {1: 50}
    assert sorted(i for _, i in res.borrowed) == list(range(5, 35))


def _two_group_schema():
    from masc.benchmark import default_schema

    return default_schema(2, groups=("A", "B"))


def test_empty_pool_noop():
    t = counts_dataset([5, 2, 1], id="t")
    res = augment(t, build_pool([t], "t"), seed=0)
    assert res.augmented is t
    assert res.shortfall == {1: 3, 2: 4}


def test_borrowed_rows_are_copies_of_donor_rows():
    t = counts_dataset([10, 2, 2], id="t")
    donor = counts_dataset([3, 20, 20], id="d", seed=5)
    res = augment(t, build_pool([t, donor], "t"), seed=3)
    extra = res.augmented.take(np.arange(t.n, res.augmented.n))
    for j, (d, i) in enumerate(res.borrowed):
        assert d == "d"
        assert np.array_equal(extra.features[j], donor.features[i])
        assert extra.group_labels[j] == donor.group_labels[i]
        assert extra.source_ids[j] == "d" and extra.source_rows[j] == i
    # original rows unchanged and first
    assert np.array_equal(res.augmented.features[: t.n], t.features)


def test_determinism():
    t = counts_dataset([30, 3, 5], id="t")
    donor = counts_dataset([10, 40, 40], id="d", seed=2)
    pool = build_pool([t, donor], "t")
    a, b = augment(t, pool, seed=9), augment(t, pool, seed=9)
    assert a.borrowed == b.borrowed
    assert np.array_equal(a.augmented.features, b.augmented.features)
    assert augment(t, pool, seed=10).borrowed != a.borrowed


def test_majority_tie_lowest_index():
    assert majority_group(np.array([5, 5, 1])) == 0
    assert majority_group(np.array([1, 5, 5])) == 1


def test_provenance_dict():
    t = counts_dataset([4, 1, 1], id="t")
    donor = counts_dataset([0, 2, 5], id="d")
    prov = augment(t, build_pool([t, donor], "t"), seed=0).provenance()
    assert prov["per_group_after"] == [4, 3, 4]
    assert prov["shortfall"] == {"Black": 1}
    assert len(prov["borrowed"]) == 5


def test_pipeline_twin_donor():
    rng = np.random.default_rng(0)
    base = rng.standard_normal((200, 2))
    groups = np.repeat([0, 1, 2], [160, 20, 20])
    a = make_dataset(groups, features=base, id="a")
    twin = make_dataset(groups[::-1].copy(), features=rng.standard_normal((200, 2)), id="twin")
    far = make_dataset(groups[::-1].copy(), features=rng.standard_normal((200, 2)) + 6, id="far")
    res = run_pipeline([a, twin, far], "a")
    assert {d for d, _ in res.borrowed} == {"twin"}
    assert res.clustering.assignment.cluster_of("far") != res.clustering.assignment.cluster_of("a")


def test_pipeline_single_dataset_error():
    with pytest.raises(ValueError):
        run_pipeline([counts_dataset([3, 2, 2], id="a")], "a")


def test_pipeline_unknown_target():
    with pytest.raises(ValueError, match="unknown target"):
        run_pipeline([counts_dataset([3, 2, 2], id="a"), counts_dataset([3, 2, 2], id="b")], "zz")


def test_benchmark_targets_borrow_within_family(planted_benchmark):
    ds = planted_benchmark.datasets
    family = dict(zip((d.id for d in ds), planted_benchmark.families))
    clustering = cluster_datasets(ds, PipelineConfig())
    assert clustering.k == 5
    for target in ("ds00", "ds17", "ds49"):
        res = run_pipeline(ds, target, clustering=clustering)
        assert {family[d] for d, _ in res.borrowed} == {family[target]}
        n_hat = res.augmented.n
        assert np.all(np.abs(group_ratio(res.augmented) - 1 / 3) <= 1 / (2 * n_hat))


def test_augmentation_keeps_pool_distribution(planted_benchmark):
    # borrowed rows come from the target's family, so the MMD stays small
    ds = planted_benchmark.datasets
    res = run_pipeline(ds, "ds00")
    assert mmd(ds[0].features, res.augmented.features) < mmd(ds[0].features, ds[10].features)
    assert group_cardinalities(res.augmented).tolist() == res.per_group_after.tolist()
