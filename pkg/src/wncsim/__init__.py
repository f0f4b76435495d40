"""Binary wireless network coding toolkit."""

__version__ = "0.1.0"
