"""
Helpers for the line-oriented model file formats.

Floats are written with 17 significant digits, which is enough for every
float64 to read back bit-identical.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ModelFormatError


def format_floats(values: Sequence[float]) -> str:
    return " ".join(f"{float(v):.17g}" for v in values)


def format_array(name: str, array: np.ndarray) -> List[str]:
    """``param <name> <dims...>`` followed by one line per row."""
    array = np.asarray(array, dtype=float)
    lines = [f"param {name} " + " ".join(str(d) for d in array.shape)]
    if array.ndim == 1:
        lines.append(format_floats(array))
    else:
        lines.extend(format_floats(row) for row in array)
    return lines


class LineReader:
    """Iterates over the lines of a model file, keeping 1-based line numbers for errors."""

    def __init__(self, lines: Sequence[str]):
        self._lines = list(lines)
        self._pos = 0

    @property
    def line_number(self) -> int:
        return self._pos

    def error(self, message: str) -> ModelFormatError:
        return ModelFormatError(message, self._pos or None)

    def next(self) -> str:
        if self._pos >= len(self._lines):
            raise ModelFormatError("unexpected end of file", self._pos)
        line = self._lines[self._pos].rstrip("\n")
        self._pos += 1
        return line

    def expect(self, expected: str) -> None:
        line = self.next()
        if line != expected:
            raise self.error(f"expected {expected!r}, found {line!r}")

    def keyword(self, key: str) -> List[str]:
        """Read ``<key> <fields...>`` and return the fields."""
        fields = self.next().split()
        if not fields or fields[0] != key:
            raise self.error(f"expected {key!r} line")
        return fields[1:]

    def int_field(self, key: str) -> int:
        fields = self.keyword(key)
        try:
            (value,) = fields
            return int(value)
        except ValueError:
            raise self.error(f"{key!r} needs one integer") from None

    def floats(self, expected: Optional[int] = None) -> np.ndarray:
        try:
            values = np.array([float(v) for v in self.next().split()], dtype=float)
        except ValueError:
            raise self.error("malformed number") from None
        if expected is not None and values.size != expected:
            raise self.error(f"expected {expected} values, found {values.size}")
        if not np.all(np.isfinite(values)):
            raise self.error("non-finite value")
        return values

    def array(self, name: str, shape: Optional[Tuple[int, ...]] = None) -> np.ndarray:
        fields = self.keyword("param")
        if not fields or fields[0] != name:
            raise self.error(f"expected parameter {name!r}")
        try:
            dims = tuple(int(d) for d in fields[1:])
        except ValueError:
            raise self.error(f"bad shape for {name!r}") from None
        if shape is not None and dims != tuple(shape):
            raise self.error(f"{name!r} has shape {dims}, expected {tuple(shape)}")
        if len(dims) == 1:
            return self.floats(dims[0])
        if len(dims) != 2:
            raise self.error(f"{name!r} must be 1- or 2-dimensional")
        if dims[0] == 0:
            return np.zeros(dims)
        return np.vstack([self.floats(dims[1]) for _ in range(dims[0])]).reshape(dims)
