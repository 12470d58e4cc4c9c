"""Circle packings from finite subdivision rules and their gasket limit sets."""

__version__ = "0.1.0"
