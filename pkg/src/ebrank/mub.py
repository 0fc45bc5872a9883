"""Mutually unbiased bases for prime d and the resulting d(d+1)-term witness for Z."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import KrausChannel, RankOneKrausFamily
from .linalg import as_vector, rank_with_tol, unitary_eigen
from .weyl import clock_matrix, shift_matrix


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


@dataclass(frozen=True, eq=False)
class MubFamily:
    """d+1 candidate bases, each stored as a (d, d) array of row vectors.

    Only shapes are enforced here; orthonormality and unbiasedness are
    measured by :func:`verify_unbiased`.
    """

    d: int
    bases: tuple[np.ndarray, ...]

    def __post_init__(self):
        bases = []
        for b in self.bases:
            vs = np.array([as_vector(v, self.d) for v in b])
            if vs.shape[0] != self.d:
                raise ValueError(f"each basis needs {self.d} vectors, got {vs.shape[0]}")
            vs.setflags(write=False)
            bases.append(vs)
        object.__setattr__(self, "bases", tuple(bases))

    def vectors(self) -> np.ndarray:
        """All vectors, shape (n_bases * d, d), basis-major."""
        return np.concatenate(self.bases)


@dataclass(frozen=True)
class MubReport:
    max_ortho_dev: float
    max_unbiased_dev: float
    max_relation_dev: float

    def passed(self, tol: float = 1e-10) -> bool:
        return max(self.max_ortho_dev, self.max_unbiased_dev, self.max_relation_dev) <= tol


def _fix_phase(v: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    k = int(np.argmax(np.abs(v) > eps))
    return v * (abs(v[k]) / v[k])


def construct_mub(d: int) -> MubFamily:
    """Eigenbases of V and of U V^k (k = 0..d-1) for prime d.

    Eigenvectors are ordered by eigenvalue argument and phase-fixed so the
    first nonzero component is real positive.
    """
    if not is_prime(d):
        raise ValueError(f"construct_mub supports prime d only, got {d}")
    u, v = shift_matrix(d), clock_matrix(d)
    words = [v] + [u @ np.linalg.matrix_power(v, k) for k in range(d)]
    bases = []
    for w in words:
        _, vecs = unitary_eigen(w)
        bases.append(np.array([_fix_phase(vecs[:, j]) for j in range(d)]))
    return MubFamily(d, tuple(bases))


def verify_unbiased(f: MubFamily) -> MubReport:
    """Deviation of each basis from orthonormality, of cross overlaps from 1/d,
    and of tr(P_ij P_kl) from its case value (1, 0 or 1/d)."""
    d = f.d
    ortho = max(float(np.max(np.abs(b.conj() @ b.T - np.eye(d)))) for b in f.bases)
    unbiased = 0.0
    for a in range(len(f.bases)):
        for c in range(a + 1, len(f.bases)):
            o = np.abs(f.bases[a].conj() @ f.bases[c].T) ** 2
            unbiased = max(unbiased, float(np.max(np.abs(o - 1 / d))))
    vs = f.vectors()
    traces = np.abs(vs.conj() @ vs.T) ** 2
    n = len(f.bases)
    same_basis = np.kron(np.eye(n), np.ones((d, d)))
    expected = np.where(same_basis == 1, np.eye(n * d), 1 / d)
    relation = float(np.max(np.abs(traces - expected)))
    return MubReport(ortho, unbiased, relation)


def projections(f: MubFamily) -> np.ndarray:
    vs = f.vectors()
    return np.einsum("ka,kb->kab", vs, vs.conj())


def mub_channel(f: MubFamily) -> tuple[KrausChannel, RankOneKrausFamily]:
    """X -> (1/(d+1)) sum P_ij X P_ij and its rank-one witness.

    Witness pairs are x = y = v_ij / (d+1)^{1/4}, so B = x y^* = P_ij / sqrt(d+1).
    """
    scale = (f.d + 1) ** -0.25
    fam = RankOneKrausFamily(f.d, tuple((scale * v, scale * v) for v in f.vectors()))
    return fam.to_channel(), fam


def gram_rank(mats) -> int:
    flat = np.array([np.asarray(m).reshape(-1) for m in mats])
    return rank_with_tol(flat.conj() @ flat.T)


def lemma52_basis(f: MubFamily) -> tuple[list[np.ndarray], int]:
    """{P_1j : all j} together with {P_ij : i >= 2, j < d}: d^2 projections spanning M_d."""
    d = f.d
    mats = [np.outer(v, v.conj()) for v in f.bases[0]]
    for b in f.bases[1:]:
        mats.extend(np.outer(v, v.conj()) for v in b[: d - 1])
    return mats, gram_rank(mats)
