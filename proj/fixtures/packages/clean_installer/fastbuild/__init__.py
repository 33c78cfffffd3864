"""Package constants."""

VERSION = "1.0"
DEFAULT_TIMEOUT = 30
NAMES = ["alpha", "beta", "gamma"]
