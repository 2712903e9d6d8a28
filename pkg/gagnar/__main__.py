#!/usr/bin/env python3
"""
Entry point for the gagnar command line:
    python -m gagnar
"""

from .cli.cli import main

if __name__ == "__main__":
    main()
