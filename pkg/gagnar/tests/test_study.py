from dataclasses import replace

import numpy as np
import pytest

from gagnar.core.errors import ValidationError
from gagnar.core.sampler import SamplerConfig
from gagnar.core.simgen import find_scenario, load_scenario
from gagnar.core.study import run_study, write_study_report

from .conftest import two_group_spec


def quick_config(seed=11):
    return SamplerConfig(rng_seed=seed, total_iters=80, burn_in=30)


def test_small_study_report(tmp_path):
    spec = two_group_spec(n_nodes=20, n_times=10, replicates=2)
    seen = []
    report = run_study(spec, h_grid=[0.0, 1.0], config=quick_config(), on_replicate_done=seen.append)
    assert report.n_replicates == 2
    assert sorted(o.replicate for o in seen) == [0, 1]
    assert report.k_true == 2
    assert set(report.rmse) == {"beta0", "beta1", "beta2", "gamma", "sigma2"}
    assert 0.0 <= report.share_k_correct <= 1.0
    assert sum(report.h_counts().values()) == 2
    for h in (0.0, 1.0):
        assert sum(report.k_histograms[h].values()) == 2

    paths = write_study_report(report, tmp_path)
    assert [p.name for p in paths] == ["study_replicates.csv", "metrics.csv", "k_histograms.csv"]
    rows = paths[0].read_text().splitlines()
    assert rows[0] == "replicate,h_best,k_hat,ari,lpml"
    assert rows[1].startswith("1,")


def test_study_is_reproducible_across_workers():
    spec = two_group_spec(n_nodes=16, n_times=8, replicates=2)
    serial = run_study(spec, h_grid=[0.5], config=quick_config(), workers=1)
    threaded = run_study(spec, h_grid=[0.5], config=quick_config(), workers=2)
    assert [o.lpml for o in serial.outcomes] == [o.lpml for o in threaded.outcomes]
    assert serial.mean_ari == threaded.mean_ari


def test_separated_groups_are_recovered():
    spec = two_group_spec(n_nodes=30, n_times=12, replicates=2)
    report = run_study(spec, h_grid=[0.0], config=SamplerConfig(rng_seed=2, total_iters=200, burn_in=100))
    assert report.mean_ari > 0.9
    assert report.rmse["beta0"] < 2.0


def test_study_rejects_empty_grid():
    with pytest.raises(ValidationError):
        run_study(two_group_spec(), h_grid=[], config=quick_config())


@pytest.mark.slow
def test_first_scenario_at_desk_scale():
    spec = replace(load_scenario(find_scenario("example1_scenario1")), replicates=20)
    grid = list(np.round(np.arange(0.0, 2.01, 0.4), 10))
    report = run_study(spec, h_grid=grid, config=SamplerConfig(rng_seed=spec.seed), workers=4)
    assert report.share_k_correct >= 0.8
    assert report.mean_ari >= 0.8
    assert report.rmse["beta0"] <= 1.0
