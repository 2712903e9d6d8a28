"""Constants for the gagnar command line."""

# Exit codes
EXIT_OK = 0
EXIT_VALIDATION = 1  # bad input or configuration
EXIT_NUMERICAL = 2
EXIT_DATA_IO = 3
EXIT_INTERRUPTED = 130

# Environment
ENV_WORKERS = "GAGNAR_WORKERS"
ENV_LOG_LEVEL = "GAGNAR_LOG_LEVEL"
DEFAULT_LOG_LEVEL = "WARNING"

# Output files
DRAWS_FILE = "draws.jsonl"
SUMMARY_FILE = "summary.json"
LABELS_FILE = "labels.csv"
COMEMBERSHIP_FILE = "comembership.csv"
LPML_FILE = "lpml.csv"
PREDICTIONS_FILE = "predictions.csv"
METRICS_FILE = "metrics.csv"
HPD_FILE = "hpd.csv"
TRUTH_PARAMS_FILE = "truth_params.csv"
REPLICATE_DIR = "rep_{:03d}"

# Display
PROGRESS_WIDTH = 40
PROGRESS_EVERY = 10  # sweeps between progress bar redraws
HPD_MASS = 0.95
