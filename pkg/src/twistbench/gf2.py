"""Dense GF(2) linear algebra on bit-packed rows.

Rows are packed little-endian into uint64 words so that row operations are
word-parallel XORs. Only the handful of routines the stabilizer code needs
are provided: row reduction, rank, a right inverse, and nullspaces.
"""

from __future__ import annotations

import numpy as np

WORD = 64


def pack(bits) -> np.ndarray:
    """Pack a (rows, cols) 0/1 array into (rows, ceil(cols/64)) uint64 words."""
    bits = np.asarray(bits, dtype=bool)
    if bits.ndim == 1:
        bits = bits[None, :]
    rows, cols = bits.shape
    nwords = max(1, -(-cols // WORD))
    padded = np.zeros((rows, nwords * WORD), dtype=bool)
    padded[:, :cols] = bits
    packed = np.packbits(padded.reshape(rows, nwords, WORD), axis=-1, bitorder="little")
    return packed.view(np.uint64).reshape(rows, nwords).copy()


def unpack(words: np.ndarray, cols: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype=np.uint64)
    rows = words.shape[0]
    bits = np.unpackbits(words.view(np.uint8).reshape(rows, -1), axis=-1, bitorder="little")
    return bits[:, :cols].astype(bool)


def _column(words: np.ndarray, c: int) -> np.ndarray:
    return ((words[:, c // WORD] >> np.uint64(c % WORD)) & np.uint64(1)).astype(bool)


def rref(bits, ncols: int | None = None):
    """Reduced row echelon form over GF(2).

    `ncols` limits pivot search to the leading columns (useful for augmented
    systems). Returns (reduced_bits, pivot_columns); zero rows sit at the
    bottom.
    """
    bits = np.asarray(bits, dtype=bool)
    rows, cols = bits.shape
    if ncols is None:
        ncols = cols
    m = pack(bits)
    pivots = []
    r = 0
    for c in range(ncols):
        if r == rows:
            break
        col = _column(m, c)
        cand = np.flatnonzero(col[r:])
        if cand.size == 0:
            continue
        p = r + cand[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
            col[[r, p]] = col[[p, r]]
        col[r] = False
        hit = np.flatnonzero(col)
        if hit.size:
            m[hit] ^= m[r]
        pivots.append(c)
        r += 1
    return unpack(m, cols), pivots


def rank(bits) -> int:
    bits = np.asarray(bits, dtype=bool)
    if bits.size == 0:
        return 0
    return len(rref(bits)[1])


def independent_rows(bits) -> list[int]:
    """Indices of a maximal independent subset of rows, earliest rows first."""
    bits = np.asarray(bits, dtype=bool)
    rows, cols = bits.shape
    if rows == 0:
        return []
    # reduce the transpose: pivot columns of bits.T are independent rows of bits
    _, piv = rref(bits.T.copy())
    return list(piv)


def nullspace(bits) -> np.ndarray:
    """Basis (as rows) of {v : bits @ v = 0 mod 2}, in reduced form."""
    bits = np.asarray(bits, dtype=bool)
    rows, cols = bits.shape
    if rows == 0:
        return np.eye(cols, dtype=bool)
    red, piv = rref(bits)
    free = [c for c in range(cols) if c not in set(piv)]
    basis = np.zeros((len(free), cols), dtype=bool)
    for k, f in enumerate(free):
        basis[k, f] = True
        for i, p in enumerate(piv):
            if red[i, f]:
                basis[k, p] = True
    return basis


def right_inverse(bits) -> np.ndarray:
    """X with bits @ X = I (mod 2) for a full-row-rank matrix `bits`."""
    bits = np.asarray(bits, dtype=bool)
    rows, cols = bits.shape
    aug = np.concatenate([bits, np.eye(rows, dtype=bool)], axis=1)
    red, piv = rref(aug, ncols=cols)
    if len(piv) != rows:
        raise ValueError("matrix does not have full row rank")
    x = np.zeros((cols, rows), dtype=bool)
    for i, p in enumerate(piv):
        x[p] = red[i, cols:]
    return x


def matmul(a, b) -> np.ndarray:
    """Product mod 2 via float matmul (exact for inner dimensions < 2**24)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return (np.rint(a @ b).astype(np.int64) & 1).astype(bool)
