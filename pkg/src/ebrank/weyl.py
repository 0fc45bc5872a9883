"""Discrete Weyl (generalized Pauli) matrices W_{i,j} = U^i V^j."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import KrausChannel
from .linalg import DimensionError, as_vector, matrix_unit


@dataclass(frozen=True)
class WeylIndex:
    d: int
    i: int
    j: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"Weyl matrices need d >= 2, got {self.d}")
        if not (0 <= self.i < self.d and 0 <= self.j < self.d):
            raise ValueError(f"index ({self.i}, {self.j}) out of range for d={self.d}")


def _check_d(d: int) -> None:
    if int(d) != d or d < 2:
        raise ValueError(f"d must be an integer >= 2, got {d}")


def shift_matrix(d: int) -> np.ndarray:
    """Forward cyclic shift U, with U e_k = e_{k+1 mod d}."""
    _check_d(d)
    return np.roll(np.eye(d, dtype=complex), 1, axis=0)


def clock_matrix(d: int) -> np.ndarray:
    """V = diag(1, w, ..., w^{d-1}) with w = exp(2 pi i / d)."""
    _check_d(d)
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


@lru_cache(maxsize=64)
def _weyl_table(d: int) -> np.ndarray:
    # exact construction: U^i V^j has entry w^{j*c} at (c + i mod d, c)
    table = np.zeros((d, d, d, d), dtype=complex)
    roots = np.exp(2j * np.pi * np.arange(d) / d)
    cols = np.arange(d)
    for i in range(d):
        for j in range(d):
            table[i, j, (cols + i) % d, cols] = roots[(j * cols) % d]
    table.setflags(write=False)
    return table


def weyl(idx: WeylIndex) -> np.ndarray:
    return _weyl_table(idx.d)[idx.i, idx.j].copy()


def weyl_matrix(d: int, i: int, j: int) -> np.ndarray:
    return weyl(WeylIndex(d, i, j))


def all_weyl(d: int) -> np.ndarray:
    """Array of shape (d*d, d, d) holding W_{i,j} in row-major (i, j) order."""
    _check_d(d)
    return _weyl_table(d).reshape(d * d, d, d).copy()


def weyl_twirl_offdiag(d: int, i: int, p: int, q: int) -> np.ndarray:
    """sum_j W_{i,j}^* E_{p,q} W_{i,j}, which vanishes whenever p != q."""
    _check_d(d)
    if p == q:
        raise ValueError("the twirl identity only applies to off-diagonal units (p != q)")
    for k in (i, p, q):
        if not 0 <= k < d:
            raise ValueError(f"index {k} out of range for d={d}")
    e = matrix_unit(d, p, q)
    ws = _weyl_table(d)[i]
    return np.einsum("jba,bc,jcd->ad", ws.conj(), e, ws)


def covariant_channel(x, y) -> KrausChannel:
    """Weyl-covariant channel with Kraus operators (W x)(W y)^* / sqrt(d).

    The 1/sqrt(d) factor makes the channel trace preserving for unit x, y.
    Kraus operators are listed in row-major (i, j) order.
    """
    x, y = as_vector(x), as_vector(y)
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch {x.shape[0]} vs {y.shape[0]}")
    d = x.shape[0]
    ws = all_weyl(d)
    wx = ws @ x
    wy = ws @ y
    kraus = np.einsum("ka,kb->kab", wx, wy.conj()) / np.sqrt(d)
    return KrausChannel(d, d, tuple(kraus))
