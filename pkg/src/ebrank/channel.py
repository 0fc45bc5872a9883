"""Quantum channels in Kraus form, Choi matrices and the depolarizing family.

Choi convention
---------------
Throughout the package the Choi matrix of a map ``phi: M_{d_in} -> M_{d_out}``
is the block matrix

    C = sum_{i,j} E_{i,j} (x) phi(E_{i,j}),

i.e. block ``(i, j)`` of ``C`` is ``phi(E_{i,j})``.  A Kraus operator ``R``
contributes ``vec(R) vec(R)^*`` with ``vec(R)[i*d_out + k] = R[k, i]``; for a
rank-one operator ``R = x y^*`` this vector is the product ``conj(y) (x) x``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Sequence

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    DimensionError,
    Tolerance,
    as_matrix,
    as_vector,
    hermitian_eigen,
    is_psd,
    rank_with_tol,
)

CHOI_CONVENTION = "sum_ij E_ij (x) Phi(E_ij)"

LinearMap = Callable[[np.ndarray], np.ndarray]


class NotCompletelyPositiveError(ValueError):
    pass


class NotRankOneError(ValueError):
    """A Kraus operator that was required to be rank one is not."""


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A completely positive map X -> sum_k R_k X R_k^*.

    Trace preservation is deliberately not enforced here; use
    :func:`is_trace_preserving`.
    """

    d_in: int
    d_out: int
    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.d_in < 1 or self.d_out < 1:
            raise ValueError("channel dimensions must be positive")
        if len(self.kraus) == 0:
            raise ValueError("a channel needs at least one Kraus operator")
        ops = []
        for r in self.kraus:
            m = as_matrix(r, rows=self.d_out, cols=self.d_in)
            m.setflags(write=False)
            ops.append(m)
        object.__setattr__(self, "kraus", tuple(ops))

    @classmethod
    def from_operators(cls, ops: Sequence) -> "KrausChannel":
        first = np.asarray(ops[0])
        return cls(first.shape[1], first.shape[0], tuple(ops))

    def __len__(self) -> int:
        return len(self.kraus)

    def __call__(self, x) -> np.ndarray:
        return apply(self, x)


@dataclass(frozen=True, eq=False)
class RankOneKrausFamily:
    """Kraus operators B_k = x_k y_k^*, stored as the vector pairs."""

    d: int
    pairs: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        pairs = []
        for x, y in self.pairs:
            x, y = as_vector(x, self.d), as_vector(y, self.d)
            x.setflags(write=False)
            y.setflags(write=False)
            pairs.append((x, y))
        if not pairs:
            raise ValueError("a rank-one family needs at least one pair")
        object.__setattr__(self, "pairs", tuple(pairs))

    @classmethod
    def from_arrays(cls, xs, ys) -> "RankOneKrausFamily":
        xs, ys = np.asarray(xs), np.asarray(ys)
        return cls(xs.shape[1], tuple(zip(xs, ys)))

    @classmethod
    def from_channel(cls, ch: KrausChannel, tol: Tolerance = DEFAULT_TOL) -> "RankOneKrausFamily":
        """Split every Kraus operator as x y^*; raises if any has rank above one."""
        if ch.d_in != ch.d_out:
            raise DimensionError("rank-one families are defined for square channels")
        pairs = []
        for k, r in enumerate(ch.kraus):
            rank = rank_with_tol(r, tol)
            if rank != 1:
                raise NotRankOneError(f"Kraus operator {k} has rank {rank}")
            u, s, vh = np.linalg.svd(r)
            root = np.sqrt(s[0])
            pairs.append((root * u[:, 0], root * vh[0].conj()))
        return cls(ch.d_in, tuple(pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def xs(self) -> np.ndarray:
        return np.array([x for x, _ in self.pairs])

    @property
    def ys(self) -> np.ndarray:
        return np.array([y for _, y in self.pairs])

    def kraus_operators(self) -> tuple[np.ndarray, ...]:
        return tuple(np.outer(x, y.conj()) for x, y in self.pairs)

    def to_channel(self) -> KrausChannel:
        return KrausChannel(self.d, self.d, self.kraus_operators())


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    d_in: int
    d_out: int
    matrix: np.ndarray
    convention: str = CHOI_CONVENTION

    def __post_init__(self):
        n = self.d_in * self.d_out
        m = as_matrix(self.matrix, rows=n, cols=n)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.convention != CHOI_CONVENTION:
            raise ValueError(f"unsupported Choi convention {self.convention!r}")


@dataclass(frozen=True)
class DepolarizingParams:
    """Parameters of Phi_t = t * id + (1 - t) * Psi_d.

    ``t`` may be a float or an exact rational (``Fraction``/``int``); strings
    such as ``"1/3"`` are parsed into a ``Fraction``.
    """

    d: int
    t: float | Fraction

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"depolarizing family needs d >= 2, got {self.d}")
        if isinstance(self.t, str):
            object.__setattr__(self, "t", Fraction(self.t))


@dataclass(frozen=True)
class DepolarizingClass:
    is_channel: bool
    is_transpose_channel: bool
    is_eb: bool


# ----------------------------------------------------------------------------
# evaluation and Choi matrices
# ----------------------------------------------------------------------------


def apply(ch: KrausChannel, x) -> np.ndarray:
    x = as_matrix(x, rows=ch.d_in, cols=ch.d_in)
    ops = np.array(ch.kraus)
    return np.einsum("kab,bc,kdc->ad", ops, x, ops.conj())


def _kraus_vectors(ops) -> np.ndarray:
    ops = np.asarray(ops)
    return np.transpose(ops, (0, 2, 1)).reshape(len(ops), -1)


def choi(ch: KrausChannel) -> ChoiMatrix:
    vecs = _kraus_vectors(ch.kraus)
    return ChoiMatrix(ch.d_in, ch.d_out, vecs.T @ vecs.conj())


def choi_of_map(fn: LinearMap, d_in: int, d_out: int | None = None) -> ChoiMatrix:
    """Choi matrix of an arbitrary linear map, evaluated on matrix units."""
    d_out = d_in if d_out is None else d_out
    c = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for i in range(d_in):
        for j in range(d_in):
            e = np.zeros((d_in, d_in), dtype=complex)
            e[i, j] = 1.0
            c[i * d_out:(i + 1) * d_out, j * d_out:(j + 1) * d_out] = fn(e)
    return ChoiMatrix(d_in, d_out, c)


def map_from_choi(c: ChoiMatrix) -> LinearMap:
    """Evaluator X -> sum_{i,j} X_{ij} * block_{ij}(C)."""
    blocks = c.matrix.reshape(c.d_in, c.d_out, c.d_in, c.d_out)

    def fn(x):
        x = as_matrix(x, rows=c.d_in, cols=c.d_in)
        return np.einsum("ij,iajb->ab", x, blocks)

    return fn


def kraus_from_choi(c: ChoiMatrix, tol: Tolerance = DEFAULT_TOL) -> KrausChannel:
    """Minimal Kraus realization from the spectral decomposition of ``C``.

    The number of operators equals the Choi rank.
    """
    vals, vecs = hermitian_eigen(c.matrix, tol)
    scale = max(abs(vals[0]), abs(vals[-1]))
    if vals[0] < -tol.abs_eps * max(1.0, scale):
        raise NotCompletelyPositiveError(
            f"Choi matrix has a negative eigenvalue {vals[0]:.3e}; the map is not CP"
        )
    keep = vals > tol.rank_rel_eps * scale
    ops = []
    for lam, v in zip(vals[keep][::-1], vecs[:, keep].T[::-1]):
        ops.append(np.sqrt(lam) * v.reshape(c.d_in, c.d_out).T)
    if not ops:
        ops = [np.zeros((c.d_out, c.d_in), dtype=complex)]
    return KrausChannel(c.d_in, c.d_out, tuple(ops))


def choi_rank(ch: KrausChannel, tol: Tolerance = DEFAULT_TOL) -> int:
    return rank_with_tol(choi(ch).matrix, tol)


def choi_distance(a: KrausChannel | ChoiMatrix, b: KrausChannel | ChoiMatrix) -> float:
    ca = a if isinstance(a, ChoiMatrix) else choi(a)
    cb = b if isinstance(b, ChoiMatrix) else choi(b)
    if ca.matrix.shape != cb.matrix.shape:
        raise DimensionError("Choi matrices have different sizes")
    return float(np.linalg.norm(ca.matrix - cb.matrix))


def tp_residual(ch: KrausChannel) -> float:
    s = sum(r.conj().T @ r for r in ch.kraus)
    return float(np.linalg.norm(s - np.eye(ch.d_in)))


def unital_residual(ch: KrausChannel) -> float:
    s = sum(r @ r.conj().T for r in ch.kraus)
    return float(np.linalg.norm(s - np.eye(ch.d_out)))


def is_trace_preserving(ch: KrausChannel, tol: Tolerance = DEFAULT_TOL) -> bool:
    return tp_residual(ch) <= tol.abs_eps * ch.d_in


def is_unital(ch: KrausChannel, tol: Tolerance = DEFAULT_TOL) -> bool:
    return unital_residual(ch) <= tol.abs_eps * ch.d_out


def is_cp(ch: KrausChannel | ChoiMatrix, tol: Tolerance = DEFAULT_TOL) -> bool:
    """CP test via positivity of the Choi matrix.

    A ``KrausChannel`` is CP by construction; the test is meaningful for Choi
    matrices of maps given only as evaluators (e.g. ``choi_of_map``).
    """
    c = ch if isinstance(ch, ChoiMatrix) else choi(ch)
    return is_psd(c.matrix, tol)


def partial_transpose(c: ChoiMatrix) -> np.ndarray:
    """Transpose on the second (output) tensor factor."""
    t = c.matrix.reshape(c.d_in, c.d_out, c.d_in, c.d_out)
    return t.transpose(0, 3, 2, 1).reshape(c.matrix.shape)


def ppt_check(ch: KrausChannel | ChoiMatrix, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Positive partial transpose of the Choi matrix; necessary for EB."""
    c = ch if isinstance(ch, ChoiMatrix) else choi(ch)
    return is_psd(partial_transpose(c), tol)


# ----------------------------------------------------------------------------
# named channels and the depolarizing family
# ----------------------------------------------------------------------------


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel(d, d, (np.eye(d, dtype=complex),))


def completely_depolarizing(d: int) -> KrausChannel:
    """Psi_d(X) = tr(X) I / d with the d^2 Kraus operators E_{p,q} / sqrt(d)."""
    ops = []
    for p in range(d):
        for q in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[p, q] = 1.0 / np.sqrt(d)
            ops.append(e)
    return KrausChannel(d, d, tuple(ops))


def depolarizing_map(d: int, t) -> LinearMap:
    """Exact evaluator X -> t X + (1 - t) tr(X) I / d, valid for every real t."""
    t = float(t)

    def fn(x):
        x = as_matrix(x, rows=d, cols=d)
        return t * x + (1 - t) * np.trace(x) * np.eye(d) / d

    return fn


def depolarizing_choi(d: int, t) -> ChoiMatrix:
    """t [E_ij] + (1 - t)/d I_{d^2}, built in closed form."""
    t = float(t)
    omega = np.eye(d, dtype=complex).reshape(-1)
    return ChoiMatrix(d, d, t * np.outer(omega, omega) + (1 - t) / d * np.eye(d * d))


def depolarizing(p: DepolarizingParams, tol: Tolerance = DEFAULT_TOL) -> KrausChannel:
    """Minimal Kraus realization of Phi_t (spectral decomposition of its Choi matrix)."""
    if not classify_depolarizing(p).is_channel:
        raise NotCompletelyPositiveError(
            f"Phi_t with d={p.d}, t={p.t} is not completely positive; "
            "use depolarizing_map for its action"
        )
    return kraus_from_choi(depolarizing_choi(p.d, p.t), tol)


def z_channel(d: int) -> KrausChannel:
    """Z(X) = (X + tr(X) I) / (d + 1), the depolarizing channel at t = 1/(d+1)."""
    return depolarizing(DepolarizingParams(d, Fraction(1, d + 1)))


def transpose_z(d: int) -> KrausChannel:
    return compose_transpose(z_channel(d))


_FLOAT_GUARD = 1e-12


def _in_closed(t, lo: Fraction, hi: Fraction) -> bool:
    if isinstance(t, Rational):
        return lo <= Fraction(t) <= hi
    t = float(t)
    return float(lo) - _FLOAT_GUARD <= t <= float(hi) + _FLOAT_GUARD


def classify_depolarizing(p: DepolarizingParams) -> DepolarizingClass:
    """Closed-interval classification of Phi_t and T o Phi_t.

    Exact for rational ``t``; floats get a 1e-12 guard at the endpoints.
    """
    d = p.d
    return DepolarizingClass(
        is_channel=_in_closed(p.t, Fraction(-1, d * d - 1), Fraction(1)),
        is_transpose_channel=_in_closed(p.t, Fraction(-1, d - 1), Fraction(1, d + 1)),
        is_eb=_in_closed(p.t, Fraction(-1, d * d - 1), Fraction(1, d + 1)),
    )


# ----------------------------------------------------------------------------
# transforms: transpose and unitary post-composition
# ----------------------------------------------------------------------------


def transpose_family(fam: RankOneKrausFamily) -> RankOneKrausFamily:
    """Witness for T o Phi: (x, y) -> (conj(x), y)."""
    return RankOneKrausFamily(fam.d, tuple((x.conj(), y) for x, y in fam.pairs))


def unitary_family(fam: RankOneKrausFamily, u) -> RankOneKrausFamily:
    """Witness for Ad_U o Phi: (x, y) -> (U x, y)."""
    u = _check_unitary(u, fam.d)
    return RankOneKrausFamily(fam.d, tuple((u @ x, y) for x, y in fam.pairs))


def _check_unitary(u, d: int) -> np.ndarray:
    u = as_matrix(u, rows=d, cols=d)
    defect = float(np.linalg.norm(u.conj().T @ u - np.eye(d)))
    if defect > 1e-9:
        raise ValueError(f"U is not unitary (defect {defect:.3e})")
    return u


def compose_transpose(ch: KrausChannel, tol: Tolerance = DEFAULT_TOL) -> KrausChannel:
    """Kraus form of X -> Phi(X)^T.

    When every Kraus operator is rank one the witness is transported factor by
    factor, preserving cardinality.  Otherwise ``T o Phi`` is realized from its
    Choi matrix, which fails if the composition is not CP.
    """
    try:
        fam = RankOneKrausFamily.from_channel(ch, tol)
    except (NotRankOneError, DimensionError):
        fn = lambda x: apply(ch, x).T  # noqa: E731
        return kraus_from_choi(choi_of_map(fn, ch.d_in, ch.d_out), tol)
    return transpose_family(fam).to_channel()


def compose_unitary(ch: KrausChannel, u) -> KrausChannel:
    """Kraus form of X -> U Phi(X) U^*: R_k -> U R_k."""
    u = _check_unitary(u, ch.d_out)
    return KrausChannel(ch.d_in, ch.d_out, tuple(u @ r for r in ch.kraus))


# ----------------------------------------------------------------------------
# symmetric subspace
# ----------------------------------------------------------------------------


def swap_operator(d: int) -> np.ndarray:
    s = np.zeros((d * d, d * d), dtype=complex)
    for k in range(d):
        for l in range(d):
            s[l * d + k, k * d + l] = 1.0
    return s


def symmetric_projection(d: int) -> np.ndarray:
    """Projection onto the symmetric subspace of C^d (x) C^d, (I + SWAP) / 2."""
    if d < 1:
        raise ValueError("d must be positive")
    return (np.eye(d * d) + swap_operator(d)) / 2


def sic_symmetric_decomposition_deviation(vectors) -> float:
    """|| P_d - (d+1)/(2d) sum_j (v_j (x) v_j)(v_j (x) v_j)^* ||_F."""
    vs = np.array([as_vector(v) for v in vectors])
    n, d = vs.shape
    if n != d * d:
        raise ValueError(f"expected {d * d} vectors in dimension {d}, got {n}")
    norms = np.linalg.norm(vs, axis=1)
    if np.max(np.abs(norms - 1)) > 1e-8:
        raise ValueError("vectors must be unit norm")
    prods = np.einsum("ka,kb->kab", vs, vs).reshape(n, -1)
    s = prods.T @ prods.conj()
    return float(np.linalg.norm(symmetric_projection(d) - (d + 1) / (2 * d) * s))


def sic_symmetric_decomposition_check(vectors, tol: float = 1e-8) -> bool:
    vs = list(vectors)
    d = len(as_vector(vs[0]))
    return sic_symmetric_decomposition_deviation(vs) <= tol * d
