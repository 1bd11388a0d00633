"""modelps: collaborative model-editing service with a transfer-learning trainer zoo."""

__version__ = "0.1.0"
