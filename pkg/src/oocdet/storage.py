"""On-disk matrix format, scratchpad, cache table, and block-level I/O.

Matrix file layout (all little-endian):

    bytes 0..7    magic ``MEMDET01``
    bytes 8..11   format version, u32 (currently 1)
    byte  12      dtype code, u8: 0 = float64, 1 = float32
    byte  13      symmetry code, u8: 0 = generic, 1 = symmetric, 2 = spd
    bytes 14..15  zero padding
    bytes 16..23  matrix dimension m, u64
    bytes 24..63  zero padding
    bytes 64..    m*m elements, row-major

Total file length is exactly ``64 + m*m*itemsize`` bytes.  Files with a
symmetric or spd code must hold bit-exactly symmetric data; that is the
generator's responsibility, not enforced on read.

The scratchpad is a headerless preallocated file of ``capacity * b * b *
itemsize`` bytes holding updated blocks so the input file is never modified.
Slots are assigned in first-write order and never reassigned; a cache table
maps each block to its current source (original file or scratch slot).
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .errors import ScratchCapacityError, StorageError
from .layout import BlockLayout

MAGIC = b"MEMDET01"
HEADER_SIZE = 64
VERSION = 1

DTYPE_CODES = {"f64": 0, "f32": 1}
DTYPE_BY_CODE = {0: np.dtype(np.float64), 1: np.dtype(np.float32)}
SYMMETRY_CODES = {"generic": 0, "symmetric": 1, "spd": 2}
SYMMETRY_BY_CODE = {v: k for k, v in SYMMETRY_CODES.items()}

SCRATCH_DIR_ENV = "OOCDET_SCRATCH_DIR"


def _pack_header(m: int, dtype_code: int, symmetry_code: int) -> bytes:
    head = struct.pack("<8sIBBxxQ", MAGIC, VERSION, dtype_code, symmetry_code, m)
    return head.ljust(HEADER_SIZE, b"\0")


class MatrixFile:
    """A dense m-by-m matrix stored on disk in the format above."""

    def __init__(self, path: str, m: int, dtype: np.dtype, symmetry: str):
        self.path = str(path)
        self.m = m
        self.dtype = np.dtype(dtype)
        self.symmetry = symmetry

    @classmethod
    def create(cls, path, m: int, dtype="f64", symmetry: str = "generic") -> "MatrixFile":
        """Create a zero-initialized matrix file with a valid header."""
        if m < 1:
            raise ValueError(f"matrix dimension must be >= 1, got {m}")
        dtype_key = {"f64": "f64", "f32": "f32",
                     np.dtype(np.float64): "f64",
                     np.dtype(np.float32): "f32"}.get(
            dtype if isinstance(dtype, str) else np.dtype(dtype))
        if dtype_key is None:
            raise ValueError(f"unsupported dtype {dtype!r}; use f64 or f32")
        if symmetry not in SYMMETRY_CODES:
            raise ValueError(f"unknown symmetry {symmetry!r}")
        npdtype = DTYPE_BY_CODE[DTYPE_CODES[dtype_key]]
        try:
            with open(path, "wb") as f:
                f.write(_pack_header(m, DTYPE_CODES[dtype_key], SYMMETRY_CODES[symmetry]))
                f.truncate(HEADER_SIZE + m * m * npdtype.itemsize)
        except OSError as exc:
            raise StorageError(f"cannot create matrix file {path}: {exc}") from exc
        return cls(path, m, npdtype, symmetry)

    @classmethod
    def open(cls, path) -> "MatrixFile":
        """Open an existing file, validating header and exact length."""
        try:
            with open(path, "rb") as f:
                head = f.read(HEADER_SIZE)
        except OSError as exc:
            raise StorageError(f"cannot open matrix file {path}: {exc}") from exc
        if len(head) < HEADER_SIZE:
            raise StorageError(f"{path}: truncated header")
        magic, version, dtype_code, symmetry_code, m = struct.unpack_from("<8sIBBxxQ", head)
        if magic != MAGIC:
            raise StorageError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise StorageError(f"{path}: unsupported version {version}")
        if dtype_code not in DTYPE_BY_CODE:
            raise StorageError(f"{path}: unknown dtype code {dtype_code}")
        if symmetry_code not in SYMMETRY_BY_CODE:
            raise StorageError(f"{path}: unknown symmetry code {symmetry_code}")
        dtype = DTYPE_BY_CODE[dtype_code]
        expected = HEADER_SIZE + m * m * dtype.itemsize
        actual = os.path.getsize(path)
        if actual != expected:
            raise StorageError(f"{path}: length {actual} != expected {expected}")
        return cls(path, int(m), dtype, SYMMETRY_BY_CODE[symmetry_code])

    def memmap(self, mode: str = "r") -> np.memmap:
        """Memory-map the data region as an (m, m) array."""
        return np.memmap(self.path, dtype=self.dtype, mode=mode,
                         offset=HEADER_SIZE, shape=(self.m, self.m))

    def layout(self, n_b: int) -> BlockLayout:
        return BlockLayout.from_grid(self.m, n_b, self.dtype.itemsize)


@dataclass
class IoCounters:
    """Whole-block transfer counts; ragged blocks count as one block."""

    blocks_read: int = 0
    blocks_written: int = 0

    def reset(self):
        self.blocks_read = 0
        self.blocks_written = 0


ORIGINAL = -1  # cache-table source sentinel; >= 0 means scratch slot index


@dataclass
class CacheTable:
    """Per-block source resolution: original file or a scratch slot."""

    sources: dict = field(default_factory=dict)

    def source(self, i: int, j: int) -> int:
        return self.sources.get((i, j), ORIGINAL)

    def point_to_scratch(self, i: int, j: int, slot: int):
        self.sources[(i, j)] = slot


class Scratchpad:
    """Preallocated headerless slot file for updated blocks."""

    def __init__(self, directory, layout: BlockLayout, capacity: int):
        self.capacity = capacity
        self.slot_elems = layout.b * layout.b
        self.slot_map: dict[tuple[int, int], int] = {}
        self.next_free = 0
        self.path = None
        self._mm = None
        if capacity > 0:
            fd, self.path = tempfile.mkstemp(prefix="oocdet-scratch-", dir=directory)
            try:
                os.ftruncate(fd, capacity * self.slot_elems * layout.dtype_bytes)
            finally:
                os.close(fd)
            dtype = np.float64 if layout.dtype_bytes == 8 else np.float32
            self._mm = np.memmap(self.path, dtype=dtype, mode="r+",
                                 shape=(capacity, self.slot_elems))

    def slot_for(self, i: int, j: int) -> int:
        """Slot holding (i, j), assigning a fresh one on first write."""
        key = (i, j)
        slot = self.slot_map.get(key)
        if slot is None:
            if self.next_free >= self.capacity:
                raise ScratchCapacityError(
                    f"scratchpad full ({self.capacity} slots) writing block {key}")
            slot = self.next_free
            self.next_free += 1
            self.slot_map[key] = slot
        return slot

    @property
    def peak_slots_used(self) -> int:
        return self.next_free

    def write(self, slot: int, data: np.ndarray):
        self._mm[slot, :data.size] = data.ravel()

    def read(self, slot: int, out: np.ndarray):
        # out may be a non-contiguous tile view; assign through its shape
        out[:] = self._mm[slot, :out.size].reshape(out.shape)

    def close(self):
        if self._mm is not None:
            del self._mm
            self._mm = None
        if self.path is not None and os.path.exists(self.path):
            os.unlink(self.path)
            self.path = None


def resolve_scratch_dir(scratch_dir=None) -> str:
    """CLI flag wins, then the environment variable, then the system tmpdir."""
    if scratch_dir:
        return str(scratch_dir)
    return os.environ.get(SCRATCH_DIR_ENV) or tempfile.gettempdir()


class BlockStore:
    """Block-granular reads/writes over one matrix file plus its scratchpad.

    Reads resolve through the cache table; every read or scratch write bumps
    the counters by one whole block.  The original file is mapped read-only
    and is never modified.
    """

    def __init__(self, matrix: MatrixFile, layout: BlockLayout,
                 scratch_capacity: int, scratch_dir=None):
        self.layout = layout
        self.cache = CacheTable()
        self.counters = IoCounters()
        self._orig = matrix.memmap(mode="r")
        self.scratch = Scratchpad(resolve_scratch_dir(scratch_dir), layout, scratch_capacity)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def read_block(self, i: int, j: int, out: np.ndarray, transpose: bool = False):
        """Fill ``out`` with block (i, j) from its current source.

        With ``transpose=True`` the stored block is transposed into ``out``
        (so ``out`` must be shaped (cols, rows) of the stored block).
        """
        lay = self.layout
        rows, cols = lay.block_size(i), lay.block_size(j)
        shape = (cols, rows) if transpose else (rows, cols)
        if out.shape != shape:
            raise StorageError(f"destination shape {out.shape} != block shape {shape}")
        slot = self.cache.source(i, j)
        if slot == ORIGINAL:
            r0, r1 = lay.block_span(i)
            c0, c1 = lay.block_span(j)
            src = self._orig[r0:r1, c0:c1]
            if transpose:
                out[:] = src.T
            else:
                out[:] = src
        else:
            if transpose:
                tmp = np.empty((rows, cols), dtype=out.dtype)
                self.scratch.read(slot, tmp)
                out[:] = tmp.T
            else:
                self.scratch.read(slot, out)
        self.counters.blocks_read += 1

    def write_block_scratch(self, i: int, j: int, src: np.ndarray):
        """Store block (i, j) on the scratchpad and repoint the cache to it."""
        slot = self.scratch.slot_for(i, j)
        self.scratch.write(slot, src)
        self.cache.point_to_scratch(i, j, slot)
        self.counters.blocks_written += 1

    @property
    def peak_scratch_slots(self) -> int:
        return self.scratch.peak_slots_used

    def close(self):
        if self._orig is not None:
            del self._orig
            self._orig = None
        self.scratch.close()
