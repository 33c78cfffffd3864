"""Package constants."""

VERSION = "4.0"
DEFAULT_TIMEOUT = 30
NAMES = ["alpha", "beta", "gamma"]
