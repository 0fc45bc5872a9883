"""Command-line front end.

Every command prints one JSON report and exits 0 on pass, 1 on a
verification or convergence failure and 2 on a usage or input error.
Channels are given as a JSON file or as ``Z:d``, ``TZ:d`` or
``depolarizing:d:t`` (t may be a fraction such as ``1/3``).
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .channel import (
    ChoiMatrix,
    DepolarizingParams,
    choi,
    classify_depolarizing,
    depolarizing_choi,
    is_cp,
    ppt_check,
    sic_symmetric_decomposition_deviation,
    tp_residual,
    transpose_z,
    z_channel,
)
from .families import D2_T_MAX, D3_T_MAX, family_channel, family_choi_distance, family_xy
from .io import (
    FormatError,
    candidate_to_json,
    channel_from_json,
    choi_from_json,
    dump_json,
    family_to_json,
    fiducial_to_json,
    load_json,
    mub_to_json,
    sic_input_from_json,
)
from .linalg import rank_with_tol
from .mub import construct_mub, lemma52_basis, mub_channel, verify_unbiased
from .search import DecompositionProblem, OptimizerConfig, fiducial_search, rank_one_decompose
from .sic import (
    ANGLE_TOL,
    SicCandidate,
    angle_report,
    extract_equiangular,
    resolution_identity_deviation,
    verify_sic_povm,
)
from .weyl import all_weyl

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
CHOI_TOL = 1e-9
SEARCH_ANGLE_TOL = 1e-6


class InputError(ValueError):
    pass


def _check(value: float, tol: float) -> dict:
    value = float(value)
    return {"value": value, "tol": tol, "pass": bool(value <= tol)}


def _all_pass(results: dict) -> bool:
    ok = True
    for v in results.values():
        if isinstance(v, dict):
            if "pass" in v:
                ok &= bool(v["pass"])
            else:
                ok &= _all_pass(v)
    return ok


# ----------------------------------------------------------------------------
# input parsing
# ----------------------------------------------------------------------------


def parse_t(text: str) -> Fraction | float:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        pass
    try:
        return float(text)
    except ValueError as exc:
        raise InputError(f"cannot parse t={text!r}") from exc


def _parse_d(text: str) -> int:
    try:
        d = int(text)
    except ValueError as exc:
        raise InputError(f"cannot parse d={text!r}") from exc
    if d < 2:
        raise InputError("d must be >= 2")
    return d


def load_target(spec: str) -> tuple[ChoiMatrix, dict]:
    """Choi matrix of a named channel or a JSON file (channel or tagged Choi record)."""
    parts = spec.split(":")
    name = parts[0]
    if name in ("Z", "TZ") and len(parts) == 2:
        d = _parse_d(parts[1])
        ch = z_channel(d) if name == "Z" else transpose_z(d)
        return choi(ch), {"name": name, "d": d}
    if name == "depolarizing" and len(parts) == 3:
        d = _parse_d(parts[1])
        t = parse_t(parts[2])
        return depolarizing_choi(d, t), {"name": name, "d": d, "t": str(t)}
    if name in ("Z", "TZ", "depolarizing"):
        raise InputError(f"bad named channel {spec!r}; use Z:d, TZ:d or depolarizing:d:t")
    path = Path(spec)
    if not path.is_file():
        raise InputError(f"{spec!r} is neither a named channel nor a file")
    rec = load_json(path)
    if isinstance(rec, dict) and rec.get("type") == "choi":
        return choi_from_json(rec), {"file": str(path)}
    return choi(channel_from_json(rec)), {"file": str(path)}


class TraceWriter:
    """JSON-lines sink for optimizer iterations."""

    def __init__(self, path: str | None):
        self._fh = open(path, "w") if path else None

    def __call__(self, rec: dict) -> None:
        self._fh.write(json.dumps(rec, sort_keys=True) + "\n")

    @property
    def sink(self):
        return self if self._fh else None

    def close(self):
        if self._fh:
            self._fh.close()


def _config(args) -> OptimizerConfig:
    return OptimizerConfig(restarts=args.restarts, seed=args.seed)


# ----------------------------------------------------------------------------
# commands; each returns (results, passed)
# ----------------------------------------------------------------------------


def sic_checks(c: SicCandidate, tol_angle: float, tol_choi: float) -> dict:
    rep = angle_report(c)
    out = {
        "angles": rep.to_dict() | {
            "angle_check": _check(rep.max_angle_dev, tol_angle),
            "norm_check": _check(rep.max_norm_dev, tol_angle),
        }
    }
    povm = verify_sic_povm(c, tol_angle)
    out["sic_povm"] = povm.to_dict() | {"tol": tol_angle, "pass": povm.all_ok}
    out["resolution_identity"] = _check(resolution_identity_deviation(c), tol_choi)
    if rep.max_norm_dev <= 1e-8:
        out["symmetric_decomposition"] = _check(sic_symmetric_decomposition_deviation(c.vectors), tol_choi * c.d)
    else:
        out["symmetric_decomposition"] = {"value": None, "tol": tol_choi * c.d, "pass": False,
                                          "reason": "vectors are not unit norm"}
    return out


def cmd_verify_sic(args) -> tuple[dict, bool]:
    try:
        kind, data = sic_input_from_json(load_json(args.input))
        if args.d is not None and data.shape[-1] != args.d:
            raise InputError(f"--d {args.d} does not match input dimension {data.shape[-1]}")
        d = data.shape[-1]
        c = SicCandidate(d, all_weyl(d) @ data if kind == "fiducial" else data)
    except (FormatError, OSError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    results = {"input_kind": kind, "d": d} | sic_checks(c, args.tol_angle, args.tol_choi)
    return results, _all_pass(results)


def _orbit_angles(x: np.ndarray) -> tuple[float, float]:
    w = x / np.linalg.norm(x)
    rep = angle_report(SicCandidate(len(w), all_weyl(len(w)) @ w))
    return rep.min_offdiag, rep.max_offdiag


def cmd_scan(args) -> tuple[dict, bool]:
    d = args.d
    if d is None or d < 2:
        raise InputError("scan needs --d >= 2")
    if args.steps < 1:
        raise InputError("--steps must be positive")
    t_lo = float(parse_t(args.t_min))
    t_max_default = 1 / (d + 1)
    t_hi = float(parse_t(args.t_max)) if args.t_max is not None else t_max_default
    if t_lo > t_hi:
        raise InputError("t_min exceeds t_max")
    grid = np.linspace(t_lo, t_hi, args.steps) if args.steps > 1 else np.array([t_lo])
    rows = []
    if d in (2, 3):
        limit = D2_T_MAX if d == 2 else D3_T_MAX
        if t_lo < -1e-12 or t_hi > limit + 1e-12:
            raise InputError(f"closed-form family for d={d} is defined on [0, {limit:.12g}]")
        for t in grid:
            dist = family_choi_distance(d, t)
            lo, hi = _orbit_angles(family_xy(d, t)[0])
            rows.append({"t": float(t), "choi_distance": _check(dist, args.tol_choi),
                         "tp_residual": _check(tp_residual(family_channel(d, t)), args.tol_choi),
                         "angle_min": lo, "angle_max": hi})
        mode = "closed_form"
    else:
        if t_lo < -1 / (d * d - 1) - 1e-12 or t_hi > t_max_default + 1e-12:
            raise InputError(f"t must lie in the entanglement breaking range for d={d}")
        k = args.k if args.k is not None else d * d
        if k < 1:
            raise InputError("--k must be positive")
        cfg = _config(args)
        trace = TraceWriter(args.trace)
        try:
            for t in grid:
                res = rank_one_decompose(DecompositionProblem(depolarizing_choi(d, float(t)), k), cfg,
                                         trace=trace.sink)
                w = res.family.xs / np.linalg.norm(res.family.xs, axis=1)[:, None]
                o = np.abs(w.conj() @ w.T) ** 2
                off = o[~np.eye(len(o), dtype=bool)]
                rows.append({"t": float(t), "K": k,
                             "choi_distance": _check(res.residual, cfg.residual_accept),
                             "tp_residual": _check(tp_residual(res.family.to_channel()), args.tol_choi),
                             "angle_min": float(off.min()), "angle_max": float(off.max()),
                             "restarts_used": res.restarts_used})
        finally:
            trace.close()
        mode = "search"
    results = {"mode": mode, "rows": rows}
    return results, all(r["choi_distance"]["pass"] and r["tp_residual"]["pass"] for r in rows)


def cmd_mub(args) -> tuple[dict, bool]:
    d = args.d
    if d is None:
        raise InputError("mub needs --d")
    try:
        fam = construct_mub(d)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    rep = verify_unbiased(fam)
    ch, witness = mub_channel(fam)
    _, rank = lemma52_basis(fam)
    dist = float(np.linalg.norm(choi(ch).matrix - choi(z_channel(d)).matrix))
    results = {
        "orthonormality": _check(rep.max_ortho_dev, 1e-10),
        "unbiasedness": _check(rep.max_unbiased_dev, 1e-10),
        "channel_distance": _check(dist, args.tol_choi),
        "gram_rank": {"value": rank, "expected": d * d, "pass": rank == d * d},
        "witness_size": {"value": len(witness), "expected": d * (d + 1),
                         "pass": len(witness) == d * (d + 1)},
    }
    if args.out_witness:
        dump_json({"mub": mub_to_json(fam), "witness": family_to_json(witness)}, args.out_witness)
    return results, _all_pass(results)


def cmd_decompose(args) -> tuple[dict, bool]:
    try:
        target, source = load_target(args.target)
        k = args.k if args.k is not None else rank_with_tol(target.matrix)
        problem = DecompositionProblem(target, k)
    except (FormatError, OSError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    cfg = _config(args)
    trace = TraceWriter(args.trace)
    try:
        res = rank_one_decompose(problem, cfg, trace=trace.sink)
    finally:
        trace.close()
    results = {
        "target": source,
        "K": k,
        "residual": _check(res.residual, cfg.residual_accept),
        "converged": res.converged,
        "restarts_used": res.restarts_used,
        "restart_index": res.restart_index,
        "iters": res.iters,
    }
    if res.converged:
        results["family"] = family_to_json(res.family)
        d = problem.d
        if k == d * d and float(np.linalg.norm(target.matrix - choi(z_channel(d)).matrix)) <= 1e-12:
            try:
                cand = extract_equiangular(res.family, tol=SEARCH_ANGLE_TOL)
                rep = angle_report(cand)
                results["equiangular"] = {"vectors": candidate_to_json(cand),
                                          "angle_check": _check(rep.max_angle_dev, SEARCH_ANGLE_TOL)}
            except ValueError as exc:
                results["equiangular"] = {"error": str(exc), "pass": False}
    return results, res.converged and _all_pass(results)


def cmd_fiducial(args) -> tuple[dict, bool]:
    d = args.d
    if d is None or d < 2:
        raise InputError("fiducial needs --d >= 2")
    cfg = _config(args)
    tol = args.tol_angle if args.tol_angle_set else SEARCH_ANGLE_TOL
    trace = TraceWriter(args.trace)
    try:
        res = fiducial_search(d, cfg, angle_tol=tol, trace=trace.sink)
    finally:
        trace.close()
    results = {
        "search": {"angle_check": _check(res.max_angle_dev, tol), "potential": res.potential,
                   "restarts_used": res.restarts_used, "iters": res.iters},
        "fiducial": fiducial_to_json(res.fiducial),
    }
    if res.converged:
        c = SicCandidate(d, all_weyl(d) @ res.fiducial.w)
        results["verify_sic"] = sic_checks(c, tol, tol)
    return results, res.converged and _all_pass(results)


def cmd_channel_info(args) -> tuple[dict, bool]:
    try:
        target, source = load_target(args.target)
        cp, ppt = is_cp(target), ppt_check(target)
    except (FormatError, OSError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    c = target.matrix
    d_in, d_out = target.d_in, target.d_out
    blocks = c.reshape(d_in, d_out, d_in, d_out).transpose(0, 2, 1, 3)
    tp = float(np.linalg.norm(np.einsum("ijkk->ij", blocks) - np.eye(d_in)))
    un = float(np.linalg.norm(np.einsum("iikl->kl", blocks) - np.eye(d_out)))
    results = {
        "target": source,
        "choi_rank": rank_with_tol(c),
        "trace_preserving": _check(tp, args.tol_choi),
        "unital": _check(un, args.tol_choi),
        "completely_positive": cp,
        "ppt": ppt,
    }
    if source.get("name") == "depolarizing":
        cls = classify_depolarizing(DepolarizingParams(source["d"], parse_t(source["t"])))
        results["classification"] = {"is_channel": cls.is_channel,
                                     "is_transpose_channel": cls.is_transpose_channel,
                                     "is_eb": cls.is_eb}
    return results, True


COMMANDS = {
    "verify-sic": cmd_verify_sic,
    "scan": cmd_scan,
    "mub": cmd_mub,
    "decompose": cmd_decompose,
    "fiducial": cmd_fiducial,
    "channel-info": cmd_channel_info,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--restarts", type=int, default=OptimizerConfig.restarts)
    common.add_argument("--tol-angle", type=float, default=None,
                        help=f"angle tolerance (default {ANGLE_TOL:g})")
    common.add_argument("--tol-choi", type=float, default=CHOI_TOL)
    common.add_argument("--out", help="also write the JSON report here")
    common.add_argument("--trace", help="JSON-lines optimizer trace")

    p = argparse.ArgumentParser(prog="ebrank", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify-sic", parents=[common], help="verify a fiducial or a list of d^2 vectors")
    s.add_argument("input")
    s.add_argument("--d", type=int)

    s = sub.add_parser("scan", parents=[common], help="Choi distance along the depolarizing family")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--t-min", default="0")
    s.add_argument("--t-max")
    s.add_argument("--steps", type=int, default=11)
    s.add_argument("--k", type=int)

    s = sub.add_parser("mub", parents=[common], help="MUB construction and its Z witness")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--out-witness", help="write the MUB family and witness here")

    s = sub.add_parser("decompose", parents=[common], help="search for K rank-one Kraus operators")
    s.add_argument("target", help="Z:d, TZ:d, depolarizing:d:t or a JSON file")
    s.add_argument("--k", type=int)

    s = sub.add_parser("fiducial", parents=[common], help="search for a Weyl-covariant SIC fiducial")
    s.add_argument("--d", type=int, required=True)

    s = sub.add_parser("channel-info", parents=[common], help="Choi rank and structural flags")
    s.add_argument("target")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.tol_angle_set = args.tol_angle is not None
    if args.tol_angle is None:
        args.tol_angle = ANGLE_TOL
    start = time.perf_counter()
    params = {k: v for k, v in sorted(vars(args).items())
              if k not in ("command", "out", "trace", "tol_angle_set")}
    try:
        if args.restarts < 1:
            raise InputError("--restarts must be positive")
        results, passed = COMMANDS[args.command](args)
    except InputError as exc:
        print(f"ebrank: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = {
        "command": args.command,
        "params": params,
        "results": results,
        "pass": passed,
        "toolkit_version": __version__,
        "seed": args.seed,
        "wall_time_ms": int(round((time.perf_counter() - start) * 1000)),
    }
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return EXIT_PASS if passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
