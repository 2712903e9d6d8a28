"""Simulate datasets from a scenario file."""

from .simulate import run_simulate_command

__all__ = ["run_simulate_command"]
