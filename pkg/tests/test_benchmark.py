import numpy as np
import pytest

from masc.benchmark import BenchmarkSpec, family_means, generate
from masc.fairness import group_ratio


def test_default_shape(planted_benchmark):
    b = planted_benchmark
    assert len(b.datasets) == 50
    assert b.families == [i // 10 for i in range(50)]
    assert all(ds.n == 500 and ds.d == 4 for ds in b.datasets)


def test_family_means_equidistant():
    m = family_means(5, 4, 5.0, np.random.default_rng(0))
    diff = m[:, None] - m[None]
    dist = np.sqrt((diff**2).sum(-1))[~np.eye(5, dtype=bool)]
    assert np.allclose(dist, 5.0)


def test_family_means_high_count():
    m = family_means(6, 2, 3.0, np.random.default_rng(1))
    diff = m[:, None] - m[None]
    dist = np.sqrt((diff**2).sum(-1))[~np.eye(6, dtype=bool)]
    assert dist.min() == pytest.approx(3.0)


def test_extra_datasets_round_robin():
    spec = BenchmarkSpec(n_families=5, datasets_per_family=2, extra_datasets=1, samples=(50, 50))
    b = generate(spec)
    assert len(b.datasets) == 11 and b.families[-1] == 0
    assert b.datasets[-1].id == "ds10"


def test_deterministic():
    spec = BenchmarkSpec(n_families=2, datasets_per_family=2, samples=(60, 80))
    a, b = generate(spec), generate(spec)
    for x, y in zip(a.datasets, b.datasets):
        assert np.array_equal(x.features, y.features) and np.array_equal(x.targets, y.targets)


def test_group_ratios_and_positive_rates():
    spec = BenchmarkSpec(n_families=1, datasets_per_family=1, samples=(40000, 40000))
    ds = generate(spec).datasets[0]
    assert np.allclose(group_ratio(ds), [0.8, 0.1, 0.1], atol=0.01)
    for g, rate in enumerate([0.4, 0.3, 0.3]):
        assert ds.targets[ds.group_labels == g].mean() == pytest.approx(rate, abs=0.02)


def test_shared_label_rule():
    # one threshold on x labels every group correctly when there is no noise
    spec = BenchmarkSpec(n_families=1, datasets_per_family=1, samples=(30000, 30000), label_noise=0.0)
    b = generate(spec)
    ds = b.datasets[0]
    # recover the label direction by least squares
    w =np.linalg.lstsq(np.hstack([ds.features, np.ones((ds.n, 1))]), ds.targets * 2.0 - 1, rcond=None)[0][:-1]
    score = (ds.features - b.means[0]) @ (w / np.linalg.norm(w))
    pred = (score > 0).astype(int)
    for g in range(3):
        assert (pred[ds.group_labels == g] == ds.targets[ds.group_labels == g]).mean() > 0.95


def test_spec_validation():
    with pytest.raises(ValueError):
        BenchmarkSpec(group_ratios=((0.5, 0.5),))
    with pytest.raises(ValueError):
        BenchmarkSpec(positive_rates=((0.0, 0.3, 0.3),))
    with pytest.raises(ValueError):
        BenchmarkSpec(samples=(1, 5))
    spec = BenchmarkSpec.from_dict({"group_ratios": [0.6, 0.2, 0.2], "samples": [10, 20]})
    assert spec.group_ratios == ((0.6, 0.2, 0.2),) and spec.samples == (10, 20)


def test_region_map_crosses_families(planted_benchmark):
    regions = planted_benchmark.region_map()
    fams = dict(zip((d.id for d in planted_benchmark.datasets), planted_benchmark.families))
    members = [i for i, r in regions.items() if r == "R0"]
    assert len({fams[i] for i in members}) == 5


def test_fifty_one_datasets():
    spec = BenchmarkSpec(extra_datasets=1, samples=(20, 30))
    assert len(generate(spec).datasets) == 51


def _within_cross(bench):
    from masc.discrepancy import pairwise_distance_matrix

    w = pairwise_distance_matrix(bench.datasets, normalize=False).values
    fam = np.asarray(bench.families)
    same = fam[:, None] == fam[None, :]
    upper = np.triu(np.ones_like(same), k=1)
    return w[same & upper], w[~same & upper]


def _auc(cross, within):
    """P(cross > within) over all pairs of pairs, ties counted as one half."""
    c, w = cross[:, None], within[None, :]
    return float(np.mean(c > w) + 0.5 * np.mean(c == w))


def test_cross_family_exceeds_within(planted_benchmark):
    within, cross = _within_cross(planted_benchmark)
    assert np.mean(cross[:, None] > within[None, :]) >= 0.99


def test_zero_shift_has_no_structure():
    within, cross = _within_cross(generate(BenchmarkSpec(shift=0.0, datasets_per_family=4)))
    # same generating distribution: cross pairs are not systematically larger
    assert 0.3 < _auc(cross, within) < 0.7


def test_group_ratios_within_tolerance(planted_benchmark):
    for ds in planted_benchmark.datasets:
        assert np.all(np.abs(group_ratio(ds) - [0.8, 0.1, 0.1]) <= 2 / np.sqrt(ds.n))
