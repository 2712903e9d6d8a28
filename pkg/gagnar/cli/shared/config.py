"""Run configuration: an INI file plus command-line overrides."""

import configparser
import io
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, List, Optional, Tuple

from ...core.errors import DataIOError, ValidationError
from ...core.model import NIGHyper
from ...core.posthoc import DEFAULT_H_GRID
from ...core.sampler import SamplerConfig
from .constants import ENV_WORKERS


@dataclass(frozen=True)
class Option:
    """One config key and the argparse attribute that overrides it."""

    section: str
    key: str
    attr: str
    kind: str  # str | int | float | bool | floats
    default: Any = None


def _grid_text(values) -> str:
    return ", ".join(f"{v:g}" for v in values)


OPTIONS: Tuple[Option, ...] = (
    Option("data", "edges", "edges", "str"),
    Option("data", "responses", "responses", "str"),
    Option("data", "covariates", "covariates", "str"),
    Option("data", "output_dir", "output_dir", "str", "."),
    Option("data", "one_based", "one_based", "bool", False),
    Option("data", "responses_header", "responses_header", "bool", False),
    Option("prior", "tau0", "tau0", "floats", (0.0,)),
    Option("prior", "sigma0_scale", "sigma0_scale", "float", 100.0),
    Option("prior", "a0", "a0", "float", 0.01),
    Option("prior", "b0", "b0", "float", 0.01),
    Option("prior", "alpha", "alpha", "float", 1.0),
    Option("sampler", "iterations", "iterations", "int", 1500),
    Option("sampler", "burn_in", "burn_in", "int", 500),
    Option("sampler", "seed", "seed", "int"),
    Option("sampler", "shuffle_order", "shuffle_order", "bool", False),
    Option("sampler", "dense_threshold", "dense_threshold", "int", 2000),
    Option("smoothing", "h", "h", "float", 0.0),
    Option("smoothing", "h_grid", "h_grid", "floats", DEFAULT_H_GRID),
    Option("split", "train_end", "train_end", "int"),
)


def parse_floats(text: str) -> Tuple[float, ...]:
    """Comma separated numbers; ``a:b:step`` expands to an inclusive range."""
    text = text.strip()
    if ":" in text and "," not in text:
        start, stop, step = (float(p) for p in text.split(":"))
        if step <= 0:
            raise ValueError("step must be positive")
        count = int(round((stop - start) / step)) + 1
        return tuple(round(start + k * step, 10) for k in range(count))
    return tuple(float(p) for p in text.split(",") if p.strip())


class RunConfig:
    """Handle configuration from an INI file given with ``--config``."""

    def __init__(self, path: Optional[str] = None):
        self.config = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        self.loaded_files: List[str] = []
        if path:
            self._load(Path(path))

    def _load(self, path: Path) -> None:
        if not path.is_file():
            raise DataIOError(f"Config file '{path}' not found")
        try:
            self.config.read(path)
        except configparser.Error as exc:
            raise DataIOError(f"Could not read {path}: {exc}") from exc
        self.loaded_files.append(str(path))

    def get(self, option: Option) -> Any:
        """Typed value from the file, or the option default."""
        if not self.config.has_option(option.section, option.key):
            return option.default
        raw = self.config.get(option.section, option.key)
        try:
            if option.kind == "int":
                return int(raw)
            if option.kind == "float":
                return float(raw)
            if option.kind == "bool":
                return self.config.getboolean(option.section, option.key)
            if option.kind == "floats":
                return parse_floats(raw)
        except ValueError as exc:
            raise ValidationError(
                f"[{option.section}] {option.key} = {raw!r} is not a valid {option.kind}"
            ) from exc
        if option.section == "data" and option.key != "output_dir" and raw:
            return self._relative_to_file(raw)
        return raw

    def _relative_to_file(self, raw: str) -> str:
        path = Path(raw).expanduser()
        if path.is_absolute() or not self.loaded_files:
            return str(path)
        return str(Path(self.loaded_files[-1]).parent / path)

    def apply_to_args(self, args):
        """Apply config values to argparse args (if not already set by CLI)."""
        for option in OPTIONS:
            if hasattr(args, option.attr) and getattr(args, option.attr) is None:
                setattr(args, option.attr, self.get(option))
        return args

    def has_config(self) -> bool:
        return len(self.loaded_files) > 0


def effective_config(args) -> str:
    """INI text of every option in effect for ``args``."""
    parser = configparser.ConfigParser()
    for option in OPTIONS:
        if not hasattr(args, option.attr):
            continue
        value = getattr(args, option.attr)
        if not parser.has_section(option.section):
            parser.add_section(option.section)
        if value is None:
            text = ""
        elif option.kind == "floats":
            text = _grid_text(value)
        elif option.kind == "bool":
            text = "true" if value else "false"
        else:
            text = str(value)
        parser.set(option.section, option.key, text)
    buffer = io.StringIO()
    parser.write(buffer)
    return buffer.getvalue()


def require_seed(args) -> int:
    if getattr(args, "seed", None) is None:
        raise ValidationError("A seed is required (--seed or [sampler] seed)")
    return int(args.seed)


def hyper_from_args(args, n_regressors: int) -> NIGHyper:
    """Prior from [prior]; a single tau0 value fills every coordinate."""
    tau0 = tuple(args.tau0)
    if len(tau0) == 1:
        tau0 = tau0 * n_regressors
    if len(tau0) != n_regressors:
        raise ValidationError(
            f"tau0 has {len(tau0)} entries but the model has {n_regressors} regressors"
        )
    return NIGHyper.default(
        n_regressors,
        tau0=tau0,
        sigma0_scale=args.sigma0_scale,
        a0=args.a0,
        b0=args.b0,
        alpha=args.alpha,
    )


def sampler_from_args(args, n_regressors: int, h: Optional[float] = None) -> SamplerConfig:
    return SamplerConfig(
        rng_seed=require_seed(args),
        total_iters=args.iterations,
        burn_in=args.burn_in,
        h=getattr(args, "h", 0.0) if h is None else h,
        hyper=hyper_from_args(args, n_regressors),
        shuffle_order=bool(args.shuffle_order),
        dense_threshold=args.dense_threshold,
    )


def resolve_workers(args=None) -> int:
    """--workers, then GAGNAR_WORKERS, then the CPU count."""
    if args is not None and getattr(args, "workers", None):
        return max(1, int(args.workers))
    raw = os.environ.get(ENV_WORKERS)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError as exc:
            raise ValidationError(f"{ENV_WORKERS} must be an integer, got {raw!r}") from exc
    return os.cpu_count() or 1
