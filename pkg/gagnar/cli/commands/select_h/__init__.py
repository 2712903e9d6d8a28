"""Choose the smoothing scale by LPML."""

from .select_h import run_select_h_command

__all__ = ["run_select_h_command"]
