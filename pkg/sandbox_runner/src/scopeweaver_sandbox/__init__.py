"""Isolated compile/import worker for untrusted module candidates."""

__version__ = "0.1.0"

from .runner import classify, handle_request, serve
