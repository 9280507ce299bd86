"""On-disk formats: function files, set files, and NDJSON report streams.

Function files carry a real-valued array over F_p^n ("FPN 1" text, "FPNB"
binary); spectrum files carry the complex transform ("FPNC 1", text only).
Set files ("FPSET 1") carry strictly increasing member indices.  Text values
use 17 significant digits so binary64 round-trips; the binary variant is
bit-exact.
"""

from __future__ import annotations

import json
import struct
import sys

import numpy as np

from .fourier import GFunction, Spectrum
from .space import Space

_TEXT_MAGIC = "FPN 1"
_BINARY_MAGIC = b"FPNB"
_COMPLEX_MAGIC = "FPNC 1"
_SET_MAGIC = "FPSET 1"


class FormatError(ValueError):
    pass


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _read_header_fields(lines, n_fields):
    out = []
    for name in n_fields:
        raw = next(lines, None)
        if raw is None:
            raise FormatError(f"truncated header: missing {name!r}")
        parts = raw.split()
        if len(parts) != 2 or parts[0] != name:
            raise FormatError(f"expected '{name} <value>', got {raw.strip()!r}")
        out.append(int(parts[1]))
    return out


def _check_space(p: int, n: int) -> Space:
    if p < 2 or n < 0:
        raise FormatError(f"bad header p={p} n={n}")
    return Space(p, n)


def write_function(path: str, f: GFunction, binary: bool = False) -> None:
    if binary:
        with open(path, "wb") as fh:
            fh.write(_BINARY_MAGIC)
            fh.write(struct.pack("<ii", f.space.p, f.space.n))
            fh.write(np.asarray(f.values, dtype="<f8").tobytes())
        return
    with open(path, "w") as fh:
        fh.write(f"{_TEXT_MAGIC}\n")
        fh.write(f"p {f.space.p}\nn {f.space.n}\n")
        for v in f.values:
            fh.write(_fmt(float(v)) + "\n")


def read_function(path: str, signed: bool = False) -> GFunction:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic == _BINARY_MAGIC:
            p, n = struct.unpack("<ii", fh.read(8))
            sp = _check_space(p, n)
            vals = np.frombuffer(fh.read(8 * sp.N), dtype="<f8")
            if vals.size != sp.N:
                raise FormatError(f"expected {sp.N} values, found {vals.size}")
            if not np.all(np.isfinite(vals)):
                raise FormatError("non-finite value in function file")
            return GFunction(sp, vals.astype(np.float64), signed=signed)
    with open(path) as fh:
        lines = iter(fh)
        first = next(lines, "").strip()
        if first != _TEXT_MAGIC:
            raise FormatError(f"unrecognized function file header {first!r}")
        p, n = _read_header_fields(lines, ("p", "n"))
        sp = _check_space(p, n)
        vals = np.array([float(next(lines)) for _ in range(sp.N)])
        if not np.all(np.isfinite(vals)):
            raise FormatError("non-finite value in function file")
        return GFunction(sp, vals, signed=signed)


def write_spectrum(path: str, s: Spectrum) -> None:
    """Complex transform file: one 're im' pair per line, 17 digits each."""
    with open(path, "w") as fh:
        fh.write(f"{_COMPLEX_MAGIC}\n")
        fh.write(f"p {s.space.p}\nn {s.space.n}\n")
        for c in s.coeffs:
            fh.write(f"{_fmt(c.real)} {_fmt(c.imag)}\n")


def read_spectrum(path: str) -> Spectrum:
    with open(path) as fh:
        lines = iter(fh)
        first = next(lines, "").strip()
        if first != _COMPLEX_MAGIC:
            raise FormatError(f"unrecognized spectrum file header {first!r}")
        p, n = _read_header_fields(lines, ("p", "n"))
        sp = _check_space(p, n)
        coeffs = np.empty(sp.N, dtype=np.complex128)
        for i in range(sp.N):
            re, im = next(lines).split()
            coeffs[i] = complex(float(re), float(im))
        if not np.all(np.isfinite(coeffs)):
            raise FormatError("non-finite value in spectrum file")
        return Spectrum(sp, coeffs)


def write_set(path: str, space: Space, members: np.ndarray) -> None:
    members = np.asarray(members, dtype=np.int64)
    with open(path, "w") as fh:
        fh.write(f"{_SET_MAGIC}\n")
        fh.write(f"p {space.p}\nn {space.n}\nk {members.size}\n")
        for x in members:
            fh.write(f"{int(x)}\n")


def read_set(path: str) -> tuple[Space, np.ndarray]:
    with open(path) as fh:
        lines = iter(fh)
        first = next(lines, "").strip()
        if first != _SET_MAGIC:
            raise FormatError(f"unrecognized set file header {first!r}")
        p, n, k = _read_header_fields(lines, ("p", "n", "k"))
        sp = _check_space(p, n)
        members = np.array([int(next(lines)) for _ in range(k)], dtype=np.int64)
    if members.size and (members[0] < 0 or members[-1] >= sp.N):
        raise FormatError("set member out of range")
    if np.any(np.diff(members) <= 0):
        raise FormatError("set members must be strictly increasing")
    return sp, members


class ReportStream:
    """Newline-delimited JSON records; the byte stream is a pure function of
    the record sequence, so identical runs produce identical reports."""

    def __init__(self, fh=None):
        self._fh = fh if fh is not None else sys.stdout
        self._summary_emitted = False

    def emit(self, record: dict) -> None:
        if record.get("type") == "summary":
            if self._summary_emitted:
                raise RuntimeError("summary emitted twice")
            self._summary_emitted = True
        self._fh.write(json.dumps(record, separators=(",", ":"),
                                  allow_nan=False) + "\n")

    def close_check(self) -> None:
        if not self._summary_emitted:
            raise RuntimeError("report stream closed without a summary")
