"""Readers and writers for the interchange formats the flow consumes and emits."""

from .templates import tokenize_with_lines  # noqa: F401
