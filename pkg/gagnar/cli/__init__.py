"""Command line surface: simulate, fit, select-h, predict, evaluate, study."""
