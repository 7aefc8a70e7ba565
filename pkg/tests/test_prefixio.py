import numpy as np
import pytest

from oocdet import PrefixWriter, StorageError, read_prefix


def test_roundtrip(tmp_path):
    path = tmp_path / "p.pfx"
    ell = np.array([0.5, 1.25, -3.0])
    signs = np.array([1, -1, -1])
    with PrefixWriter(path) as w:
        w.append(ell[:2], signs[:2])
        w.append(ell[2:], signs[2:])
    got_ell, got_signs = read_prefix(path)
    np.testing.assert_array_equal(got_ell, ell)
    np.testing.assert_array_equal(got_signs, signs)


def test_empty_file(tmp_path):
    path = tmp_path / "e.pfx"
    with PrefixWriter(path):
        pass
    ell, signs = read_prefix(path)
    assert len(ell) == 0 and len(signs) == 0


def test_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.pfx"
    path.write_bytes(b"WRONGMAG" + bytes(16))
    with pytest.raises(StorageError):
        read_prefix(path)


def test_rejects_truncated_records(tmp_path):
    path = tmp_path / "t.pfx"
    with PrefixWriter(path) as w:
        w.append(np.array([1.0, 2.0]), np.array([1, 1]))
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(StorageError):
        read_prefix(path)
