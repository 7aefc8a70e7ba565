import pytest

from oocdet import BlockLayout


@pytest.mark.parametrize("m,n_b", [(1, 1), (4, 2), (5, 2), (100, 7), (24, 8),
                                   (1000, 1), (97, 13), (64, 64)])
def test_invariants(m, n_b):
    lay = BlockLayout.from_grid(m, n_b)
    assert lay.b == 1 + (m - 1) // lay.n_b
    assert 1 <= lay.tail <= lay.b
    assert (lay.n_b - 1) * lay.b + lay.tail == m
    assert sum(lay.block_size(k) for k in range(lay.n_b)) == m


@pytest.mark.parametrize("m,n_b,expect_nb", [
    (4, 3, 2),    # b=2 covers m in 2 blocks; trailing block would be empty
    (5, 4, 3),    # b=2, needs 3 blocks
    (10, 9, 5),
    (7, 7, 7),
])
def test_degenerate_grid_shrinks(m, n_b, expect_nb):
    lay = BlockLayout.from_grid(m, n_b)
    assert lay.n_b == expect_nb
    assert (lay.n_b - 1) * lay.b + lay.tail == m


def test_exhaustive_small_grids():
    for m in range(1, 50):
        for n_b in range(1, m + 1):
            lay = BlockLayout.from_grid(m, n_b)
            assert lay.n_b <= n_b
            assert 1 <= lay.tail <= lay.b
            assert (lay.n_b - 1) * lay.b + lay.tail == m


def test_block_spans_tile_the_matrix():
    lay = BlockLayout.from_grid(23, 5)
    spans = [lay.block_span(k) for k in range(lay.n_b)]
    assert spans[0][0] == 0
    assert spans[-1][1] == 23
    for (a0, a1), (b0, _) in zip(spans, spans[1:]):
        assert a1 == b0


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        BlockLayout.from_grid(0, 1)
    with pytest.raises(ValueError):
        BlockLayout.from_grid(4, 0)
    with pytest.raises(ValueError):
        BlockLayout(m=4, n_b=2, b=2, tail=0, dtype_bytes=8)
    with pytest.raises(ValueError):
        BlockLayout(m=4, n_b=2, b=3, tail=1, dtype_bytes=8)
    with pytest.raises(ValueError):
        BlockLayout(m=4, n_b=2, b=2, tail=2, dtype_bytes=2)
