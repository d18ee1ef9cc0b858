"""Utility modules for the application."""

from .file_utils import check_file, read_f32, read_json, write_f32, write_json

__all__ = [
    "check_file",
    "read_f32",
    "write_f32",
    "read_json",
    "write_json",
]
