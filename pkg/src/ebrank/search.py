"""Numerical search for rank-one Kraus witnesses and Weyl-covariant SIC fiducials.

Both searches minimize a real polynomial in complex variables.  Gradients use
the real convention ``g = df/dRe(z) + i df/dIm(z)``, so that to first order
``f(z + dz) = f(z) + Re <g, dz>``.

Descent directions come from limited-memory BFGS with an Armijo backtracking
(halving) line search, so every accepted step decreases the objective.  A
search that does not converge is reported as "no witness found"; it never
certifies a lower bound.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channel import (
    ChoiMatrix,
    KrausChannel,
    RankOneKrausFamily,
    choi,
    choi_rank,
    ppt_check,
)
from .linalg import hermitian_eigen
from .sic import Fiducial, angle_report, weyl_orbit
from .weyl import all_weyl

TraceSink = Callable[[dict], None]


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 32
    max_iters: int = 5000
    step_init: float = 0.1
    grad_tol: float = 1e-14
    residual_accept: float = 1e-8
    seed: int = 0
    memory: int = 10
    workers: int = 1

    def __post_init__(self):
        for name in ("restarts", "max_iters", "memory", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        for name in ("step_init", "grad_tol", "residual_accept"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def rng(self, restart: int) -> np.random.Generator:
        """Generator for one restart, a pure function of (seed, restart)."""
        return np.random.default_rng([self.seed & 0xFFFFFFFFFFFFFFFF, restart])


@dataclass(frozen=True, eq=False)
class DecompositionProblem:
    """Fit K rank-one terms (conj(y_k) (x) x_k)(...)^* to a target Choi matrix."""

    target: ChoiMatrix
    K: int

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be positive")
        if self.target.d_in != self.target.d_out:
            raise ValueError("rank-one decomposition needs a square channel")
        vals, _ = hermitian_eigen(self.target.matrix)
        if vals[0] < -1e-8:
            raise ValueError(f"target is not PSD (min eigenvalue {vals[0]:.3e})")

    @property
    def d(self) -> int:
        return self.target.d_in

    @classmethod
    def for_channel(cls, ch: KrausChannel, K: int) -> "DecompositionProblem":
        return cls(choi(ch), K)


@dataclass(frozen=True, eq=False)
class DecompositionResult:
    family: RankOneKrausFamily
    residual: float
    converged: bool
    restarts_used: int
    iters: int
    restart_index: int


@dataclass(frozen=True)
class FiducialProblem:
    d: int


@dataclass(frozen=True, eq=False)
class FiducialSearchResult:
    fiducial: Fiducial
    max_angle_dev: float
    potential: float
    converged: bool
    restarts_used: int
    iters: int


@dataclass(frozen=True)
class EbrBound:
    """Outcome of :func:`ebr_upper_bound`.

    ``upper_bound`` is the smallest K for which a witness was found, or None.
    It is only ever an upper bound on the entanglement breaking rank.
    """

    upper_bound: int | None
    choi_rank: int
    skipped_reason: str | None = None
    attempts: list[dict] = field(default_factory=list)
    witness: RankOneKrausFamily | None = None
    kind: str = "upper_bound"


# ----------------------------------------------------------------------------
# objectives
# ----------------------------------------------------------------------------


def decomposition_objective(target: np.ndarray, xs: np.ndarray, ys: np.ndarray):
    """f = ||C - sum_k z_k z_k^*||_F^2 with z_k = conj(y_k) (x) x_k, and its gradient."""
    k, d = xs.shape
    z = np.einsum("ki,kp->kip", ys.conj(), xs).reshape(k, d * d)
    r = z.T @ z.conj() - target
    f = float(np.vdot(r, r).real)
    # real gradient w.r.t. z_k is 4 R z_k; reshape to (i, p) = (y index, x index)
    g = (4 * (r @ z.T)).T.reshape(k, d, d)
    gx = np.einsum("kip,ki->kp", g, ys)
    gy = np.einsum("kip,kp->ki", g.conj(), xs)
    return f, gx, gy


def fiducial_objective(w: np.ndarray, weyls: np.ndarray):
    """g(w) = sum_{(i,j) != (0,0)} |<w, W_ij w>|^4, and its gradient (unconstrained)."""
    ws = weyls[1:]
    ww = ws @ w
    wh = np.conj(np.transpose(ws, (0, 2, 1))) @ w
    a = ww @ w.conj()
    a2 = np.abs(a) ** 2
    f = float(np.sum(a2 ** 2))
    grad = np.sum((4 * a2)[:, None] * (a.conj()[:, None] * ww + a[:, None] * wh), axis=0)
    return f, grad


# ----------------------------------------------------------------------------
# descent engine
# ----------------------------------------------------------------------------


def _descend(
    fun: Callable[[np.ndarray], tuple[float, np.ndarray]],
    p: np.ndarray,
    cfg: OptimizerConfig,
    retract: Callable[[np.ndarray], np.ndarray] | None = None,
    done: Callable[[np.ndarray, float], bool] | None = None,
    trace: TraceSink | None = None,
    label: dict | None = None,
    stall_window: int = 200,
) -> tuple[np.ndarray, float, int]:
    """Minimize ``fun`` over real vectors; returns (point, value, iterations)."""
    f, g = fun(p)
    s_hist: list[np.ndarray] = []
    y_hist: list[np.ndarray] = []
    f_hist = [f]
    it = 0
    if done is not None and done(p, f):
        return p, f, 0
    for it in range(1, cfg.max_iters + 1):
        q = g.copy()
        alphas = []
        for s, y in zip(reversed(s_hist), reversed(y_hist)):
            a = (s @ q) / (y @ s)
            alphas.append(a)
            q -= a * y
        if s_hist:
            q *= (s_hist[-1] @ y_hist[-1]) / (y_hist[-1] @ y_hist[-1])
        for (s, y), a in zip(zip(s_hist, y_hist), reversed(alphas)):
            q += s * (a - (y @ q) / (y @ s))
        direction = -q
        slope = float(g @ direction)
        step = 1.0
        if not s_hist or slope >= 0:
            direction = -g
            slope = -float(g @ g)
            step = cfg.step_init
            s_hist.clear()
            y_hist.clear()

        while True:
            pn = p + step * direction
            if retract is not None:
                pn = retract(pn)
            fn, gn = fun(pn)
            if fn <= f + 1e-4 * step * slope:
                break
            step /= 2
            if step < 1e-20:
                return p, f, it - 1

        s, y = pn - p, gn - g
        if y @ s > 1e-300:
            s_hist.append(s)
            y_hist.append(y)
            if len(s_hist) > cfg.memory:
                s_hist.pop(0)
                y_hist.pop(0)
        p, f, g = pn, fn, gn
        f_hist.append(f)
        if trace is not None:
            trace({**(label or {}), "iter": it, "objective": f, "step": step})
        if done is not None and done(p, f):
            break
        if float(np.max(np.abs(g))) <= cfg.grad_tol:
            break
        if it >= stall_window and f_hist[-stall_window - 1] - f <= 1e-12 * f_hist[-stall_window - 1]:
            break
    return p, f, it


def _as_real(z: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(z, dtype=complex).view(np.float64).copy()


def _as_complex(p: np.ndarray) -> np.ndarray:
    return p.view(np.complex128)


def _run_batches(task: Callable[[int], object], n: int, workers: int, stop: Callable[[object], bool]):
    """Run task(0..n-1) in batches of ``workers``; stop after a batch containing a success."""
    results = []
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        for start in range(0, n, workers):
            idx = range(start, min(n, start + workers))
            batch = list(pool.map(task, idx)) if pool else [task(i) for i in idx]
            results.extend(batch)
            if any(stop(r) for r in batch):
                break
    finally:
        if pool is not None:
            pool.shutdown()
    return results


# ----------------------------------------------------------------------------
# rank-one decomposition
# ----------------------------------------------------------------------------


def initial_point(problem: DecompositionProblem, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Complex Gaussian vectors scaled so the initial Choi trace equals the target's."""
    k, d = problem.K, problem.d
    xs = rng.standard_normal((k, d)) + 1j * rng.standard_normal((k, d))
    ys = rng.standard_normal((k, d)) + 1j * rng.standard_normal((k, d))
    mass = float(np.sum(np.sum(np.abs(xs) ** 2, 1) * np.sum(np.abs(ys) ** 2, 1)))
    target_trace = float(np.trace(problem.target.matrix).real)
    scale = (target_trace / mass) ** 0.25 if target_trace > 0 else 1.0
    return xs * scale, ys * scale


def _decompose_once(problem, cfg, restart, start, trace):
    k, d = problem.K, problem.d
    target = problem.target.matrix
    n = k * d
    # polish well past acceptance: near a solution the factors move like sqrt(residual)
    accept_f = (1e-6 * cfg.residual_accept) ** 2

    def fun(p):
        z = _as_complex(p)
        f, gx, gy = decomposition_objective(target, z[:n].reshape(k, d), z[n:].reshape(k, d))
        return f, _as_real(np.concatenate([gx.ravel(), gy.ravel()]))

    xs, ys = start if start is not None else initial_point(problem, cfg.rng(restart))
    p0 = _as_real(np.concatenate([np.ravel(xs), np.ravel(ys)]))
    p, f, iters = _descend(
        fun, p0, cfg, done=lambda _p, fv: fv <= accept_f, trace=trace, label={"restart": restart}
    )
    z = _as_complex(p)
    fam = RankOneKrausFamily.from_arrays(z[:n].reshape(k, d), z[n:].reshape(k, d))
    residual = math.sqrt(max(f, 0.0))
    return restart, fam, residual, iters


def rank_one_decompose(
    problem: DecompositionProblem,
    cfg: OptimizerConfig = OptimizerConfig(),
    warm_start: RankOneKrausFamily | None = None,
    trace: TraceSink | None = None,
) -> DecompositionResult:
    """Multi-restart search for K rank-one Kraus operators matching the target Choi matrix.

    Restart r draws its start from ``cfg.rng(r)``; a ``warm_start`` family of
    matching size replaces restart 0's start.  Restarts stop after the first
    batch (of ``cfg.workers``) that converges; the selected result has the
    lowest residual, ties broken by the lowest restart index.
    """
    if warm_start is not None and (len(warm_start) != problem.K or warm_start.d != problem.d):
        warm_start = None

    def task(r):
        start = (warm_start.xs, warm_start.ys) if (r == 0 and warm_start is not None) else None
        return _decompose_once(problem, cfg, r, start, trace)

    runs = _run_batches(task, cfg.restarts, cfg.workers, lambda res: res[2] <= cfg.residual_accept)
    best = min(runs, key=lambda res: (res[2], res[0]))
    restart, fam, residual, iters = best
    return DecompositionResult(
        family=fam,
        residual=residual,
        converged=residual <= cfg.residual_accept,
        restarts_used=len(runs),
        iters=iters,
        restart_index=restart,
    )


def ebr_upper_bound(
    ch: KrausChannel,
    k_max: int,
    cfg: OptimizerConfig = OptimizerConfig(),
    warm_start: RankOneKrausFamily | None = None,
    trace: TraceSink | None = None,
) -> EbrBound:
    """Smallest K in [cr(ch), k_max] for which a rank-one witness is found."""
    cr = choi_rank(ch)
    if not ppt_check(ch):
        return EbrBound(None, cr, skipped_reason="Choi matrix is not PPT, so no rank-one witness exists")
    target = choi(ch)
    attempts = []
    for k in range(cr, k_max + 1):
        res = rank_one_decompose(DecompositionProblem(target, k), cfg, warm_start, trace)
        attempts.append({"K": k, "residual": res.residual, "converged": res.converged,
                         "restarts_used": res.restarts_used})
        if res.converged:
            return EbrBound(k, cr, attempts=attempts, witness=res.family)
    return EbrBound(None, cr, attempts=attempts)


# ----------------------------------------------------------------------------
# fiducial search
# ----------------------------------------------------------------------------


def _fiducial_once(d, cfg, restart, angle_tol, trace):
    weyls = all_weyl(d)
    others = weyls[1:]
    target = 1 / (d + 1)

    def fun(p):
        w = _as_complex(p)
        f, grad = fiducial_objective(w, weyls)
        grad = grad - np.real(np.vdot(w, grad)) * w
        return f, _as_real(grad)

    def retract(p):
        return p / np.linalg.norm(p)

    def done(p, _f):
        w = _as_complex(p)
        dev = np.max(np.abs(np.abs(others @ w @ w.conj()) ** 2 - target))
        return dev <= 1e-3 * angle_tol

    rng = cfg.rng(restart)
    w0 = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    p, f, iters = _descend(fun, retract(_as_real(w0)), cfg, retract=retract, done=done,
                           trace=trace, label={"restart": restart})
    w = _as_complex(p).copy()
    w /= np.linalg.norm(w)
    dev = float(np.max(np.abs(np.abs(others @ w @ w.conj()) ** 2 - target)))
    return restart, w, dev, f, iters


def fiducial_search(
    d: int,
    cfg: OptimizerConfig = OptimizerConfig(),
    angle_tol: float = 1e-6,
    trace: TraceSink | None = None,
) -> FiducialSearchResult:
    """Minimize the Weyl-orbit frame potential over unit vectors of C^d.

    Success means every |<w, W_ij w>|^2, (i,j) != (0,0), is within
    ``angle_tol`` of 1/(d+1).
    """
    if d < 2:
        raise ValueError("d must be >= 2")

    def task(r):
        return _fiducial_once(d, cfg, r, angle_tol, trace)

    runs = _run_batches(task, cfg.restarts, cfg.workers, lambda res: res[2] <= angle_tol)
    restart, w, dev, f, iters = min(runs, key=lambda res: (res[2], res[0]))
    fid = Fiducial(d, w)
    # the orbit deviation equals the Weyl-overlap deviation; recompute from the orbit for the report
    dev = angle_report(weyl_orbit(fid)).max_angle_dev
    return FiducialSearchResult(fid, dev, f, dev <= angle_tol, len(runs), iters)


# ----------------------------------------------------------------------------
# gradient verification
# ----------------------------------------------------------------------------


def _objective_for(problem):
    if isinstance(problem, DecompositionProblem):
        k, d, target = problem.K, problem.d, problem.target.matrix
        n = k * d

        def fun(z):
            f, gx, gy = decomposition_objective(target, z[:n].reshape(k, d), z[n:].reshape(k, d))
            return f, np.concatenate([gx.ravel(), gy.ravel()])

        return fun, 2 * n
    if isinstance(problem, FiducialProblem):
        weyls = all_weyl(problem.d)
        return (lambda z: fiducial_objective(z, weyls)), problem.d
    raise TypeError(f"unsupported problem type {type(problem).__name__}")


def gradient_check(problem, point, h: float = 1e-6) -> float:
    """Max deviation between analytic and central-difference gradients.

    ``point`` is a complex vector: concatenated (x_1..x_K, y_1..y_K) for a
    decomposition problem, or w for a fiducial problem.  The deviation is
    relative to max(1, largest finite-difference component).
    """
    fun, n = _objective_for(problem)
    z = np.asarray(point, dtype=complex).reshape(-1)
    if z.shape[0] != n:
        raise ValueError(f"point must have {n} complex entries, got {z.shape[0]}")
    _, grad = fun(z)
    fd = np.zeros(n, dtype=complex)
    for idx in range(n):
        for unit, part in ((1.0, "re"), (1j, "im")):
            e = np.zeros(n, dtype=complex)
            e[idx] = unit * h
            diff = (fun(z + e)[0] - fun(z - e)[0]) / (2 * h)
            if part == "re":
                fd[idx] += diff
            else:
                fd[idx] += 1j * diff
    scale = max(1.0, float(np.max(np.abs(fd))))
    return float(np.max(np.abs(grad - fd))) / scale
