"""Replicate simulation study."""

from .study import run_study_command

__all__ = ["run_study_command"]
