import json
import logging
import os
import time
from functools import wraps
from typing import Any, Dict

import numpy as np

from coep.errors import (
    CoEPError,
    FileTooLargeError,
    InvalidInputError,
    MatrixFileError,
    ShapeError,
)
from coep.linalg_core import ComplexMatrix, as_matrix

MAX_FILE_SIZE = 16 * 1024 * 1024  # 16 MB, far above a 16x16 matrix


def retry(max_attempts=3, delay=0.5):
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            attempts = 0
            while attempts < max_attempts:
                try:
                    return func(*args, **kwargs)
                except (FileNotFoundError, IsADirectoryError, PermissionError):
                    raise
                except (IOError, ConnectionError):
                    attempts += 1
                    if attempts == max_attempts:
                        raise
                    time.sleep(delay)
                    logging.warning(f"Retrying {func.__name__} (attempt {attempts}/{max_attempts})")
        return wrapper
    return decorator


def encode_matrix(a: ComplexMatrix) -> Dict[str, Any]:
    """Row-major {"rows", "cols", "entries": [[re, im], ...]} form.

    Python's json writes floats with repr, so finite doubles round-trip bit-exactly.
    """
    matrix = np.asarray(a, dtype=complex)
    rows, cols = matrix.shape
    entries = [[float(z.real), float(z.imag)] for z in matrix.reshape(-1)]
    return {"rows": int(rows), "cols": int(cols), "entries": entries}


def decode_matrix(data: Any) -> ComplexMatrix:
    if not isinstance(data, dict):
        raise MatrixFileError("Matrix document must be a JSON object")
    missing = [key for key in ("rows", "cols", "entries") if key not in data]
    if missing:
        raise MatrixFileError(f"Matrix document is missing {', '.join(missing)}")
    rows, cols, entries = data["rows"], data["cols"], data["entries"]
    if not isinstance(rows, int) or not isinstance(cols, int) or rows < 1 or cols < 1:
        raise MatrixFileError(f"rows and cols must be positive integers, got {rows!r}, {cols!r}")
    if not isinstance(entries, list) or len(entries) != rows * cols:
        count = len(entries) if isinstance(entries, list) else "no"
        raise MatrixFileError(f"Expected {rows * cols} entries, found {count}")
    values = []
    for index, entry in enumerate(entries):
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not all(isinstance(part, (int, float)) and not isinstance(part, bool) for part in entry)
        ):
            raise MatrixFileError(f"Entry {index} is not a [re, im] pair of numbers")
        values.append(complex(entry[0], entry[1]))
    try:
        return as_matrix(np.array(values, dtype=complex).reshape(rows, cols))
    except (InvalidInputError, ShapeError) as e:
        raise MatrixFileError(f"Invalid matrix: {str(e)}")


def dumps_matrix(a: ComplexMatrix) -> str:
    return json.dumps(encode_matrix(a))


def write_matrix(a: ComplexMatrix, file_path: str) -> None:
    with open(file_path, "w", encoding="utf-8") as f:
        f.write(dumps_matrix(a))
        f.write("\n")


class MatrixParser:
    def __init__(self, max_file_size: int = MAX_FILE_SIZE):
        self.logger = logging.getLogger(__name__)
        self.max_file_size = max_file_size

    def check_file_size(self, file_path):
        """Check if the file size is within the allowed limit."""
        file_size = os.path.getsize(file_path)
        if file_size > self.max_file_size:
            raise FileTooLargeError(
                f"File is too large ({file_size} bytes). Maximum allowed size is {self.max_file_size} bytes."
            )

    @retry(max_attempts=3, delay=0.5)
    def read_text(self, file_path):
        """Read the raw file contents."""
        with open(file_path, "r", encoding="utf-8") as file:
            return file.read()

    def parse_text(self, text: str, source: str = "<string>") -> ComplexMatrix:
        """Decode a matrix document held in a string."""
        try:
            # NaN and Infinity literals are not part of the format
            data = json.loads(text, parse_constant=self._reject_constant)
        except json.JSONDecodeError as e:
            raise MatrixFileError(f"Malformed JSON in {source}: {str(e)}")
        return decode_matrix(data)

    def parse_file(self, file_path) -> ComplexMatrix:
        """Parse a matrix file in the JSON matrix format."""
        if not os.path.exists(file_path):
            raise MatrixFileError(f"File not found: {file_path}")

        self.check_file_size(file_path)

        try:
            matrix = self.parse_text(self.read_text(file_path), source=file_path)
        except CoEPError:
            raise
        except Exception as e:
            self.logger.error(f"Unexpected error parsing file: {str(e)}")
            raise MatrixFileError(f"Failed to parse file: {str(e)}")
        self.logger.debug("Parsed %dx%d matrix from %s", *matrix.shape, file_path)
        return matrix

    @staticmethod
    def _reject_constant(name):
        raise MatrixFileError(f"Non-finite literal {name} is not allowed")
