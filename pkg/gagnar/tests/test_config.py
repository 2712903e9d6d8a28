import argparse

import pytest

from gagnar.cli.shared.config import (
    OPTIONS,
    RunConfig,
    effective_config,
    hyper_from_args,
    parse_floats,
    resolve_workers,
    sampler_from_args,
)
from gagnar.core.errors import DataIOError, ValidationError


def blank_args(**overrides):
    values = {option.attr: None for option in OPTIONS}
    values.update(overrides)
    return argparse.Namespace(**values)


def test_parse_floats_lists_and_ranges():
    assert parse_floats("0, 0.5,1") == (0.0, 0.5, 1.0)
    assert parse_floats("0:1:0.25") == (0.0, 0.25, 0.5, 0.75, 1.0)
    assert len(parse_floats("0:5:0.2")) == 26
    with pytest.raises(ValueError):
        parse_floats("0:1:0")


def test_defaults_fill_unset_arguments():
    args = RunConfig().apply_to_args(blank_args(seed=3))
    assert args.iterations == 1500
    assert args.burn_in == 500
    assert args.alpha == 1.0
    assert args.seed == 3
    assert args.output_dir == "."


def test_file_values_yield_to_command_line(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(
        "[sampler]\niterations = 300\nburn_in = 100\nseed = 9\n"
        "[smoothing]\nh_grid = 0:1:0.5\n"
        "[data]\nresponses = data/Y.csv\n"
    )
    config = RunConfig(str(path))
    assert config.has_config()
    args = config.apply_to_args(blank_args(iterations=50))
    assert args.iterations == 50
    assert args.burn_in == 100
    assert args.seed == 9
    assert args.h_grid == (0.0, 0.5, 1.0)
    # data paths resolve against the config file
    assert args.responses == str(tmp_path / "data" / "Y.csv")


def test_bad_values_and_missing_file(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[sampler]\niterations = many\n")
    with pytest.raises(ValidationError):
        RunConfig(str(path)).apply_to_args(blank_args())
    with pytest.raises(DataIOError):
        RunConfig(str(tmp_path / "missing.ini"))


def test_effective_config_lists_every_section():
    args = RunConfig().apply_to_args(blank_args(seed=1))
    text = effective_config(args)
    for section in ("[data]", "[prior]", "[sampler]", "[smoothing]", "[split]"):
        assert section in text
    assert "iterations = 1500" in text
    assert "seed = 1" in text


def test_sampler_from_args():
    args = RunConfig().apply_to_args(blank_args(seed=5, iterations=40, burn_in=10, h=0.8))
    config = sampler_from_args(args, 4)
    assert config.rng_seed == 5 and config.total_iters == 40 and config.h == 0.8
    assert config.hyper.tau0.shape == (4,)
    assert sampler_from_args(args, 4, h=0.2).h == 0.2


def test_seed_is_required():
    args = RunConfig().apply_to_args(blank_args())
    with pytest.raises(ValidationError):
        sampler_from_args(args, 3)


def test_tau0_length_must_match():
    args = RunConfig().apply_to_args(blank_args(tau0=(1.0, 2.0)))
    with pytest.raises(ValidationError):
        hyper_from_args(args, 3)
    args.tau0 = (1.0, 2.0, 3.0)
    assert hyper_from_args(args, 3).tau0.tolist() == [1.0, 2.0, 3.0]


def test_workers_from_flag_and_environment(monkeypatch):
    monkeypatch.setenv("GAGNAR_WORKERS", "3")
    assert resolve_workers(argparse.Namespace(workers=None)) == 3
    assert resolve_workers(argparse.Namespace(workers=2)) == 2
    monkeypatch.setenv("GAGNAR_WORKERS", "lots")
    with pytest.raises(ValidationError):
        resolve_workers()
    monkeypatch.delenv("GAGNAR_WORKERS")
    assert resolve_workers() >= 1
