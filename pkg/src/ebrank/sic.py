"""SIC-POVM verification and the equiangular-vector <-> Z-decomposition bridge.

A candidate is a list of d^2 vectors w_i in C^d.  It generates a SIC-POVM
iff every w_i is a unit vector and |<w_i, w_j>|^2 = 1/(d+1) for i != j; the
POVM elements are then R_i = w_i w_i^* / d.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .channel import (
    KrausChannel,
    RankOneKrausFamily,
    choi,
    depolarizing_choi,
    NotRankOneError,
)
from .linalg import Tolerance, as_vector, rank_with_tol
from .weyl import all_weyl

ANGLE_TOL = 1e-8
NORM_TOL = 1e-10


class PreconditionError(ValueError):
    pass


class ForcedConditionError(ValueError):
    """A rank-one decomposition of Z violates a condition every such decomposition obeys."""

    def __init__(self, message: str, violations: dict[str, float]):
        super().__init__(message)
        self.violations = violations


@dataclass(frozen=True, eq=False)
class Fiducial:
    d: int
    w: np.ndarray

    def __post_init__(self):
        w = as_vector(self.w, self.d)
        norm = float(np.linalg.norm(w))
        if abs(norm - 1) > NORM_TOL:
            raise ValueError(f"fiducial must be a unit vector (norm {norm!r})")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @classmethod
    def normalized(cls, w) -> "Fiducial":
        w = as_vector(w)
        return cls(len(w), w / np.linalg.norm(w))


@dataclass(frozen=True, eq=False)
class SicCandidate:
    d: int
    vectors: np.ndarray  # shape (d*d, d)

    def __post_init__(self):
        vs = np.array([as_vector(v, self.d) for v in self.vectors])
        if vs.shape[0] != self.d * self.d:
            raise ValueError(f"a SIC candidate needs {self.d ** 2} vectors, got {vs.shape[0]}")
        vs.setflags(write=False)
        object.__setattr__(self, "vectors", vs)

    @classmethod
    def from_vectors(cls, vectors) -> "SicCandidate":
        vs = [as_vector(v) for v in vectors]
        return cls(len(vs[0]), np.array(vs))


@dataclass(frozen=True)
class AngleReport:
    min_offdiag: float
    max_offdiag: float
    max_norm_dev: float
    target: float

    @property
    def max_angle_dev(self) -> float:
        return max(abs(self.min_offdiag - self.target), abs(self.max_offdiag - self.target))

    def to_dict(self) -> dict:
        return asdict(self) | {"max_angle_dev": self.max_angle_dev}


@dataclass(frozen=True)
class SicPovmReport:
    povm_sum_ok: bool
    info_complete_ok: bool
    symmetric_ok: bool
    rank_one_ok: bool
    povm_sum_dev: float
    gram_rank: int
    lam: float
    mu: float
    lam_spread: float
    mu_spread: float

    @property
    def all_ok(self) -> bool:
        return self.povm_sum_ok and self.info_complete_ok and self.symmetric_ok and self.rank_one_ok

    def to_dict(self) -> dict:
        return asdict(self) | {"all_ok": self.all_ok}


def weyl_orbit(f: Fiducial) -> SicCandidate:
    """The d^2 vectors W_{i,j} w in row-major (i, j) order."""
    return SicCandidate(f.d, all_weyl(f.d) @ f.w)


def overlaps(c: SicCandidate) -> np.ndarray:
    """Matrix of squared overlaps |<w_i, w_j>|^2."""
    g = c.vectors.conj() @ c.vectors.T
    return np.abs(g) ** 2


def angle_report(c: SicCandidate) -> AngleReport:
    o = overlaps(c)
    off = o[~np.eye(len(o), dtype=bool)]
    norms = np.linalg.norm(c.vectors, axis=1)
    return AngleReport(
        min_offdiag=float(off.min()),
        max_offdiag=float(off.max()),
        max_norm_dev=float(np.max(np.abs(norms - 1))),
        target=1 / (c.d + 1),
    )


def verify_sic_povm(c: SicCandidate, tol: float = ANGLE_TOL) -> SicPovmReport:
    """Check the four SIC-POVM clauses for R_i = w_i w_i^* / d."""
    d = c.d
    rs = np.einsum("ka,kb->kab", c.vectors, c.vectors.conj()) / d
    povm_dev = float(np.linalg.norm(rs.sum(axis=0) - np.eye(d)))
    flat = rs.reshape(len(rs), -1)
    # tr(R_i^* R_j)
    gram = flat.conj() @ flat.T
    gram_rank = rank_with_tol(gram)
    diag = np.real(np.diag(gram))
    off = np.real(gram[~np.eye(len(gram), dtype=bool)])
    lam_spread = float(diag.max() - diag.min())
    mu_spread = float(off.max() - off.min())
    # spreads are compared on the overlap scale |<w_i,w_j>|^2 = d^2 tr(R_i R_j)
    return SicPovmReport(
        povm_sum_ok=povm_dev <= tol * d,
        info_complete_ok=gram_rank == d * d,
        symmetric_ok=d * d * max(lam_spread, mu_spread) <= tol,
        rank_one_ok=True,
        povm_sum_dev=povm_dev,
        gram_rank=gram_rank,
        lam=float(diag.mean()),
        mu=float(off.mean()),
        lam_spread=lam_spread,
        mu_spread=mu_spread,
    )


def resolution_identity_deviation(c: SicCandidate) -> float:
    """max over matrix units E of ||(1/d) sum_i P_i E P_i - Z(E)||_F."""
    d = c.d
    ps = np.einsum("ka,kb->kab", c.vectors, c.vectors.conj())
    worst = 0.0
    for p in range(d):
        for q in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[p, q] = 1.0
            lhs = np.einsum("kab,bc,kcd->ad", ps, e, ps) / d
            rhs = (e + np.trace(e) * np.eye(d)) / (d + 1)
            worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst


def resolution_identity_check(c: SicCandidate, tol: float = ANGLE_TOL) -> bool:
    return resolution_identity_deviation(c) <= tol


def sic_family(c: SicCandidate) -> RankOneKrausFamily:
    """Rank-one witness for Z: B_i = w_i w_i^* / sqrt(d)."""
    scale = c.d ** -0.25
    return RankOneKrausFamily(c.d, tuple((scale * w, scale * w) for w in c.vectors))


def extract_equiangular(
    family: RankOneKrausFamily | KrausChannel, tol: float = 1e-6, choi_tol: float | None = None
) -> SicCandidate:
    """Recover d^2 equiangular unit vectors from a d^2-term rank-one decomposition of Z.

    Every such decomposition B_i = x_i y_i^* has ||x_i||^2 ||y_i||^2 = 1/d and
    x_i parallel to y_i.  Both are verified (to ``tol``, relative) before the
    unit vectors w_i spanning the line of x_i are returned.  A ``KrausChannel`` argument is
    accepted only if all of its Kraus operators are rank one.  ``choi_tol``
    (default ``tol``) bounds the Choi distance to Z separately.
    """
    if isinstance(family, KrausChannel):
        try:
            family = RankOneKrausFamily.from_channel(family, Tolerance(rank_rel_eps=tol))
        except NotRankOneError as exc:
            raise PreconditionError(f"not a rank-one decomposition: {exc}") from exc
    d = family.d
    if len(family) != d * d:
        raise PreconditionError(f"need exactly {d * d} rank-one operators, got {len(family)}")
    target = depolarizing_choi(d, Fraction(1, d + 1))
    dist = float(np.linalg.norm(choi(family.to_channel()).matrix - target.matrix))
    if dist > (tol if choi_tol is None else choi_tol):
        raise PreconditionError(f"family does not realize Z (Choi distance {dist:.3e})")

    xs, ys = family.xs, family.ys
    nx = np.linalg.norm(xs, axis=1)
    ny = np.linalg.norm(ys, axis=1)
    norm_dev = float(np.max(np.abs(d * (nx * ny) ** 2 - 1)))
    align = np.abs(np.sum(xs.conj() * ys, axis=1)) / (nx * ny)
    align_dev = float(np.max(1 - align))
    violations = {}
    if norm_dev > tol:
        violations["norm"] = norm_dev
    if align_dev > tol:
        violations["alignment"] = align_dev
    if violations:
        raise ForcedConditionError(
            "forced conditions violated: " + ", ".join(f"{k}={v:.3e}" for k, v in violations.items()),
            violations,
        )
    # x_i and y_i span the same line once alignment holds; averaging the two unit
    # representatives cancels the antisymmetric tilt (x = w + e u, y = w - e u)
    # that moves the Choi matrix only at second order.
    wx = xs / nx[:, None]
    wy = ys / ny[:, None]
    phase = np.sum(wx.conj() * wy, axis=1)
    wy = wy * (phase.conj() / np.abs(phase))[:, None]
    w = wx + wy
    return SicCandidate(d, w / np.linalg.norm(w, axis=1)[:, None])


def forced_angle(d: int, t) -> tuple[float, bool]:
    """Squared overlap (1 - t)/d forced on a positive d^2-term decomposition of Phi_t.

    The flag is true only when this equals 1/(d+1), i.e. t = 1/(d+1).
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    if isinstance(t, (Fraction, int)):
        value = (1 - Fraction(t)) / d
        return float(value), value == Fraction(1, d + 1)
    value = (1 - float(t)) / d
    return value, abs(value - 1 / (d + 1)) <= 1e-12


def frame_potential(c: SicCandidate) -> float:
    """sum over ordered pairs i != j of |<w_i, w_j>|^4."""
    norms = np.linalg.norm(c.vectors, axis=1)
    if np.max(np.abs(norms - 1)) > 1e-8:
        raise ValueError("frame potential is defined for unit vectors")
    o = overlaps(c)
    np.fill_diagonal(o, 0.0)
    return float(np.sum(o ** 2))
