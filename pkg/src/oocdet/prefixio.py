"""Sidecar file holding prefix log-determinants, one record per q.

Layout (little-endian):

    bytes 0..7    magic ``MDPREFIX``
    bytes 8..11   version, u32 (currently 1)
    bytes 12..15  zero padding
    bytes 16..23  record count, u64
    then count records of (q: u64, logabsdet: f64, sign: i64)

Records are appended in q order (q = 1..m); the count is finalized on close,
so a scaling-law fit can consume the sequence without re-running the
factorization.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import StorageError

MAGIC = b"MDPREFIX"
VERSION = 1
HEADER = struct.Struct("<8sIxxxxQ")
RECORD_DTYPE = np.dtype([("q", "<u8"), ("logabsdet", "<f8"), ("sign", "<i8")])


class PrefixWriter:
    def __init__(self, path):
        self.path = str(path)
        self._count = 0
        try:
            self._f = open(self.path, "wb")
        except OSError as exc:
            raise StorageError(f"cannot create prefix file {path}: {exc}") from exc
        self._f.write(HEADER.pack(MAGIC, VERSION, 0))

    def append(self, prefix, signs):
        rec = np.empty(len(prefix), dtype=RECORD_DTYPE)
        rec["q"] = np.arange(self._count + 1, self._count + 1 + len(prefix))
        rec["logabsdet"] = prefix
        rec["sign"] = signs
        self._f.write(rec.tobytes())
        self._count += len(prefix)

    def close(self):
        self._f.seek(0)
        self._f.write(HEADER.pack(MAGIC, VERSION, self._count))
        self._f.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_prefix(path) -> tuple[np.ndarray, np.ndarray]:
    """Return (logabsdet prefix, signs) arrays indexed by q - 1."""
    try:
        with open(path, "rb") as f:
            head = f.read(HEADER.size)
            if len(head) < HEADER.size:
                raise StorageError(f"{path}: truncated prefix header")
            magic, version, count = HEADER.unpack(head)
            if magic != MAGIC:
                raise StorageError(f"{path}: bad magic {magic!r}")
            if version != VERSION:
                raise StorageError(f"{path}: unsupported version {version}")
            rec = np.fromfile(f, dtype=RECORD_DTYPE, count=count)
    except OSError as exc:
        raise StorageError(f"cannot read prefix file {path}: {exc}") from exc
    if len(rec) != count:
        raise StorageError(f"{path}: expected {count} records, found {len(rec)}")
    if count and not np.array_equal(rec["q"], np.arange(1, count + 1)):
        raise StorageError(f"{path}: record indices are not 1..{count}")
    return rec["logabsdet"].astype(np.float64), rec["sign"].astype(np.int64)
