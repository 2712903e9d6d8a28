"""Root logger setup for the command line."""

import logging
import os
import sys

from .constants import DEFAULT_LOG_LEVEL, ENV_LOG_LEVEL


def setup_logging(verbose: bool = False, quiet: bool = False) -> int:
    """
    Configure the root logger once; returns the level in effect.

    Level comes from GAGNAR_LOG_LEVEL, ``verbose`` lowers it to INFO and
    ``quiet`` raises it to ERROR.
    """
    level_name = os.environ.get(ENV_LOG_LEVEL, DEFAULT_LOG_LEVEL).upper()
    level = getattr(logging, level_name, logging.WARNING)
    if not isinstance(level, int):
        level = logging.WARNING
    if verbose:
        level = min(level, logging.INFO)
    if quiet:
        level = max(level, logging.ERROR)

    logging.basicConfig(
        level=level,
        format="[%(levelname)s] %(message)s",
        stream=sys.stderr,
        force=True,
    )
    return level
