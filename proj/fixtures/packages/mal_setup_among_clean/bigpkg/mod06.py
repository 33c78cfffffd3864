"""Package constants."""

VERSION = "3.0"
DEFAULT_TIMEOUT = 30
NAMES = ["alpha", "beta", "gamma"]
