"""Package constants."""

VERSION = "2.0"
DEFAULT_TIMEOUT = 30
NAMES = ["alpha", "beta", "gamma"]
