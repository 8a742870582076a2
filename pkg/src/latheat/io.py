"""
Binary and CSV serialization.

Grid / spectral function files (little-endian)::

    magic   4 bytes   b"LHGF" (grid) or b"LHSF" (spectral)
    version u32       1
    n, N, hbar        3 x float64
    data              N^n x (re, im) float64, row-major natural index order

Kernel cache files::

    magic   4 bytes   b"LHKC"
    version u32       1
    alpha   float64
    n, R, M 3 x u32
    coeffs  (2R+1)^n float64, row-major over j in [-R, R]^n
    tail    float64   tail mass sum_{|j|>R} |a_j|

All writers go through a temp file in the target directory followed by a
rename, so readers never observe a partial file.
"""

from __future__ import annotations

import csv
import io as _io
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .lattice import GridFunction, LatticeSpec, SpectralFunction

VERSION = 1
GRID_MAGIC = b"LHGF"
SPECTRAL_MAGIC = b"LHSF"
KERNEL_MAGIC = b"LHKC"
_HEADER = struct.Struct("<4sI3d")
_KHEADER = struct.Struct("<4sId3I")


def fmt(x: float) -> str:
    """17-significant-digit representation used in every text artifact."""
    return format(float(x), ".17g")


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def encode_function(f: GridFunction | SpectralFunction) -> bytes:
    magic = SPECTRAL_MAGIC if isinstance(f, SpectralFunction) else GRID_MAGIC
    spec = f.spec
    head = _HEADER.pack(magic, VERSION, float(spec.n), float(spec.N), spec.hbar)
    body = np.ascontiguousarray(f.values, dtype="<c16").tobytes()
    return head + body


def decode_function(data: bytes) -> GridFunction | SpectralFunction:
    if len(data) < _HEADER.size:
        raise InvalidInputError("truncated function file")
    magic, version, n, N, hbar = _HEADER.unpack_from(data)
    if magic not in (GRID_MAGIC, SPECTRAL_MAGIC):
        raise InvalidInputError(f"bad magic {magic!r}")
    if version != VERSION:
        raise InvalidInputError(f"unsupported version {version}")
    spec = LatticeSpec(int(n), hbar, int(N))
    vals = np.frombuffer(data, dtype="<c16", offset=_HEADER.size)
    if vals.size != spec.size:
        raise InvalidInputError(f"expected {spec.size} values, found {vals.size}")
    cls = SpectralFunction if magic == SPECTRAL_MAGIC else GridFunction
    return cls(spec, vals.reshape(spec.shape).astype(complex))


def write_function(path, f) -> None:
    atomic_write_bytes(path, encode_function(f))


def read_function(path):
    return decode_function(Path(path).read_bytes())


def function_csv(f) -> str:
    """CSV text with columns index, m1..mn, re, im."""
    spec = f.spec
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index"] + [f"m{i + 1}" for i in range(spec.n)] + ["re", "im"])
    ax = spec.axis_indices()
    flat = f.values.reshape(-1)
    for idx, multi in enumerate(np.ndindex(*spec.shape)):
        v = flat[idx]
        w.writerow([idx] + [int(ax[i]) for i in multi] + [fmt(v.real), fmt(v.imag)])
    return buf.getvalue()


def encode_kernel(kernel) -> bytes:
    head = _KHEADER.pack(KERNEL_MAGIC, VERSION, kernel.alpha, kernel.n, kernel.R, kernel.M)
    body = np.ascontiguousarray(kernel.coeffs, dtype="<f8").tobytes()
    return head + body + struct.pack("<d", kernel.tail_mass)


def decode_kernel(data: bytes):
    from .fraclap import StencilKernel

    magic, version, alpha, n, R, M = _KHEADER.unpack_from(data)
    if magic != KERNEL_MAGIC:
        raise InvalidInputError(f"bad kernel magic {magic!r}")
    if version != VERSION:
        raise InvalidInputError(f"unsupported kernel version {version}")
    count = (2 * R + 1) ** n
    end = _KHEADER.size + 8 * count
    if len(data) != end + 8:
        raise InvalidInputError("kernel file has wrong length")
    coeffs = np.frombuffer(data, dtype="<f8", count=count, offset=_KHEADER.size)
    (tail,) = struct.unpack_from("<d", data, end)
    return StencilKernel(alpha, n, R, M, coeffs.reshape((2 * R + 1,) * n), tail, False)


def write_kernel(path, kernel) -> None:
    atomic_write_bytes(path, encode_kernel(kernel))


def read_kernel(path):
    return decode_kernel(Path(path).read_bytes())


def kernel_csv(kernel) -> str:
    """CSV rows (j1..jn, a_j) for every stored coefficient."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"j{i + 1}" for i in range(kernel.n)] + ["a_j"])
    offs = kernel.offsets()
    for multi in np.ndindex(*kernel.coeffs.shape):
        w.writerow([int(offs[i]) for i in multi] + [fmt(kernel.coeffs[multi])])
    return buf.getvalue()
