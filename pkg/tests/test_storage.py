import hashlib
import os

import numpy as np
import pytest

from oocdet import BlockStore, MatrixFile, ScratchCapacityError, StorageError
from oocdet.storage import HEADER_SIZE, MAGIC

from conftest import write_matrix


def test_create_file_sizes(tmp_path):
    mf = MatrixFile.create(tmp_path / "a.mdm", 4, "f64", "spd")
    assert os.path.getsize(mf.path) == 64 + 128
    mf = MatrixFile.create(tmp_path / "b.mdm", 1, "f32", "generic")
    assert os.path.getsize(mf.path) == 64 + 4
    mf = MatrixFile.create(tmp_path / "c.mdm", 1000, "f64", "symmetric")
    assert os.path.getsize(mf.path) == 8_000_064


def test_header_magic_and_zero_data(tmp_path):
    mf = MatrixFile.create(tmp_path / "a.mdm", 8, "f64", "generic")
    with open(mf.path, "rb") as f:
        assert f.read(8) == MAGIC
    assert np.count_nonzero(mf.memmap()) == 0


def test_open_roundtrip(tmp_path, rng):
    vals = rng.standard_normal((9, 9))
    write_matrix(tmp_path / "a.mdm", vals, "generic")
    mf = MatrixFile.open(tmp_path / "a.mdm")
    assert (mf.m, mf.symmetry, mf.dtype) == (9, "generic", np.float64)
    np.testing.assert_array_equal(mf.memmap(), vals)


def test_open_rejects_corrupt_files(tmp_path):
    path = tmp_path / "bad.mdm"
    path.write_bytes(b"NOTMAGIC" + bytes(64))
    with pytest.raises(StorageError):
        MatrixFile.open(path)
    mf = MatrixFile.create(tmp_path / "short.mdm", 4, "f64", "generic")
    with open(mf.path, "r+b") as f:
        f.truncate(HEADER_SIZE + 10)
    with pytest.raises(StorageError):
        MatrixFile.open(mf.path)
    with pytest.raises(ValueError):
        MatrixFile.create(tmp_path / "x.mdm", 0, "f64", "generic")


def test_read_block_slices_and_counts(tmp_path, rng):
    vals = rng.standard_normal((4, 4))
    mf = write_matrix(tmp_path / "a.mdm", vals, "generic")
    lay = mf.layout(2)
    with BlockStore(mf, lay, 0) as store:
        out = np.empty((2, 2))
        store.read_block(0, 0, out)
        np.testing.assert_array_equal(out, vals[:2, :2])
        store.read_block(1, 0, out, transpose=True)
        np.testing.assert_array_equal(out, vals[2:, :2].T)
        assert store.counters.blocks_read == 2
        assert store.counters.blocks_written == 0


def test_scratch_roundtrip_and_cache(tmp_path, rng):
    vals = rng.standard_normal((6, 6))
    mf = write_matrix(tmp_path / "a.mdm", vals, "generic")
    lay = mf.layout(3)
    with BlockStore(mf, lay, 5, scratch_dir=tmp_path) as store:
        block = rng.standard_normal((2, 2))
        store.write_block_scratch(1, 2, block)
        out = np.empty((2, 2))
        store.read_block(1, 2, out)
        np.testing.assert_array_equal(out, block)  # scratch, not original
        # rewrite reuses the same slot
        store.write_block_scratch(1, 2, 2 * block)
        assert store.peak_scratch_slots == 1
        # first-write order of fresh slots
        store.write_block_scratch(0, 1, block)
        assert store.scratch.slot_map == {(1, 2): 0, (0, 1): 1}
        assert store.counters.blocks_written == 3


def test_ragged_scratch_roundtrip_via_noncontiguous_view(tmp_path, rng):
    vals = rng.standard_normal((5, 5))
    mf = write_matrix(tmp_path / "a.mdm", vals, "generic")
    lay = mf.layout(2)  # b=3, tail=2
    buf = np.empty((3, 3))
    view = buf[:2, :3]  # non-contiguous destination
    with BlockStore(mf, lay, 3, scratch_dir=tmp_path) as store:
        store.write_block_scratch(1, 0, vals[3:, :3])
        store.read_block(1, 0, view)
        np.testing.assert_array_equal(view, vals[3:, :3])


def test_capacity_exceeded_signals_bug(tmp_path, rng):
    mf = write_matrix(tmp_path / "a.mdm", rng.standard_normal((4, 4)), "generic")
    lay = mf.layout(2)
    with BlockStore(mf, lay, 1, scratch_dir=tmp_path) as store:
        store.write_block_scratch(0, 1, np.zeros((2, 2)))
        with pytest.raises(ScratchCapacityError):
            store.write_block_scratch(1, 0, np.zeros((2, 2)))


def test_no_scratch_file_for_zero_capacity(tmp_path, rng):
    mf = write_matrix(tmp_path / "a.mdm", rng.standard_normal((4, 4)), "generic")
    with BlockStore(mf, mf.layout(2), 0, scratch_dir=tmp_path) as store:
        assert store.scratch.path is None
        assert [p.name for p in tmp_path.iterdir()] == ["a.mdm"]


def test_original_file_untouched(tmp_path, rng):
    vals = rng.standard_normal((6, 6))
    mf = write_matrix(tmp_path / "a.mdm", vals, "generic")
    digest = hashlib.sha256(open(mf.path, "rb").read()).hexdigest()
    lay = mf.layout(3)
    with BlockStore(mf, lay, 5, scratch_dir=tmp_path) as store:
        out = np.empty((2, 2))
        store.read_block(0, 0, out)
        store.write_block_scratch(0, 0, out + 1)
        store.read_block(0, 0, out)
    assert hashlib.sha256(open(mf.path, "rb").read()).hexdigest() == digest


def test_counters_reset(tmp_path, rng):
    mf = write_matrix(tmp_path / "a.mdm", rng.standard_normal((4, 4)), "generic")
    with BlockStore(mf, mf.layout(1), 0) as store:
        store.read_block(0, 0, np.empty((4, 4)))
        assert store.counters.blocks_read == 1
        store.counters.reset()
        assert store.counters.blocks_read == 0
