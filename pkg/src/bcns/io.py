"""Snapshot file format.

Layout: one ASCII header line ``BCNS1 d N rank t`` (``rank`` is the number
of components: 1 for a scalar, d for a vector; ``t`` is the snapshot time,
written with ``repr`` so it round-trips bit-exactly), followed by raw
little-endian 64-bit float pairs (re, im), one pair per lattice mode, in
row-major (C) order over the FFT-ordered frequency axes with components
outermost.  Round-trips are bit-exact.
"""

from __future__ import annotations

import numpy as np

from .spectral import SpectralField, SpectralError, make_grid

MAGIC = "BCNS1"


class SnapshotError(SpectralError):
    """Malformed snapshot file."""


def write_snapshot(path, f: SpectralField, t: float) -> None:
    g = f.grid
    rank = f.ncomp
    header = f"{MAGIC} {g.d} {g.N} {rank} {float(t)!r}\n"
    data = np.ascontiguousarray(f.coeffs, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(data.tobytes())


def read_snapshot(path) -> tuple[SpectralField, float]:
    """Read a snapshot; returns the field and its time stamp."""
    with open(path, "rb") as fh:
        header = fh.readline()
        try:
            text = header.decode("ascii").strip()
        except UnicodeDecodeError as exc:
            raise SnapshotError(f"{path}: undecodable header") from exc
        parts = text.split()
        if len(parts) != 5 or parts[0] != MAGIC:
            raise SnapshotError(f"{path}: bad header {text!r}")
        try:
            d = int(parts[1])
            N = int(parts[2])
            rank = int(parts[3])
            t = float(parts[4])
        except ValueError as exc:
            raise SnapshotError(f"{path}: unparsable header fields {text!r}") from exc
        grid = make_grid(d, N)
        if rank not in (1, d):
            raise SnapshotError(f"{path}: rank {rank} not in (1, {d})")
        count = rank * N**d
        raw = fh.read(count * 16)
        if len(raw) != count * 16:
            raise SnapshotError(f"{path}: truncated payload "
                                f"({len(raw)} of {count * 16} bytes)")
        extra = fh.read(1)
        if extra:
            raise SnapshotError(f"{path}: trailing bytes after payload")
    coeffs = np.frombuffer(raw, dtype="<c16").astype(np.complex128)
    shape = grid.shape if rank == 1 else (rank,) + grid.shape
    return SpectralField(grid, coeffs.reshape(shape)), t
