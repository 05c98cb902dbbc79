"""Phase detection in spin chains through learned single-qubit disentangling circuits."""

__version__ = "0.1.0"
