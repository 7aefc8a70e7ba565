"""Block-grid geometry for an m-by-m matrix split into an n_b-by-n_b grid.

Nominal block size is ``b = 1 + (m - 1) // n_b``; every block is b-by-b
except the last row/column of the grid, which is ``tail``-by-b (or b-by-tail),
with ``1 <= tail <= b`` and ``(n_b - 1) * b + tail == m``.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class BlockLayout:
    m: int
    n_b: int
    b: int
    tail: int
    dtype_bytes: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"matrix dimension must be >= 1, got {self.m}")
        if self.n_b < 1:
            raise ValueError(f"block count must be >= 1, got {self.n_b}")
        if self.dtype_bytes not in (4, 8):
            raise ValueError(f"dtype_bytes must be 4 or 8, got {self.dtype_bytes}")
        if self.b != 1 + (self.m - 1) // self.n_b:
            raise ValueError(f"inconsistent block size {self.b} for m={self.m}, n_b={self.n_b}")
        if not (1 <= self.tail <= self.b):
            raise ValueError(f"tail block size {self.tail} out of range [1, {self.b}]")
        if (self.n_b - 1) * self.b + self.tail != self.m:
            raise ValueError("block grid does not tile the matrix")

    @classmethod
    def from_grid(cls, m: int, n_b: int, dtype_bytes: int = 8) -> "BlockLayout":
        """Layout for a requested grid, shrinking n_b if trailing blocks would be empty.

        A requested n_b close to m can make ``(n_b - 1) * b >= m``; the grid is
        then reduced to the smallest n_b that yields the same coverage.
        """
        if m < 1 or n_b < 1:
            raise ValueError(f"m and n_b must be >= 1, got m={m}, n_b={n_b}")
        n_b = min(n_b, m)
        while True:
            b = 1 + (m - 1) // n_b
            needed = -(-m // b)  # ceil(m / b)
            if needed == n_b:
                break
            n_b = needed
        return cls(m=m, n_b=n_b, b=b, tail=m - (n_b - 1) * b, dtype_bytes=dtype_bytes)

    def block_size(self, k: int) -> int:
        """Row (= column) count of block index k, 0-based."""
        if not 0 <= k < self.n_b:
            raise IndexError(f"block index {k} out of range for n_b={self.n_b}")
        return self.tail if k == self.n_b - 1 else self.b

    def block_span(self, k: int) -> tuple[int, int]:
        """Half-open element range [start, stop) covered by block index k."""
        start = k * self.b
        return start, start + self.block_size(k)
