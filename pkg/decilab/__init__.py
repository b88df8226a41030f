"""decilab: exact and BP decimation experiments on random k-SAT."""

from . import digest, harness, lib, protocol

__version__ = "0.1.0"

__all__ = [
    "digest",
    "harness",
    "lib",
    "protocol",
]
