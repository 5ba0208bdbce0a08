"""Command-line interface.

Subcommands mirror the library: matrix distances (dm, dpi), coupling
computations (prokhorov, birkhoff), space bounds (ghp), sampling (sample,
ensemble), relative entropy (entropy) and the experiment checks (check).
All structured output is JSON on stdout; ``check`` exits nonzero when any
assertion fails.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import experiments, fileio
from .coupling import birkhoff_decompose, prokhorov_distance
from .entropy import find_isometric_embeddings, kl_divergence, relative_entropy
from .ghp import STRATEGIES, best_ghp_upper_bound, ghp_upper_bound
from .matmetric import dm_distance, dpi_distance
from .sampling import empirical_space, enumerate_matrix_ensemble


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _emit(obj) -> None:
    print(json.dumps(_jsonable(obj), indent=2, sort_keys=True))


def _cmd_dm(args) -> int:
    a = fileio.read_matrix(args.a)
    b = fileio.read_matrix(args.b)
    w = dm_distance(a, b, tol=args.tol)
    _emit({"value": w.value, "excluded": list(w.excluded), "max_residual": w.max_residual})
    return 0


def _cmd_dpi(args) -> int:
    a = fileio.read_matrix(args.a)
    b = fileio.read_matrix(args.b)
    mode = "heuristic" if args.heuristic else "exact"
    w = dpi_distance(a, b, mode=mode, exact_limit=args.limit, tol=args.tol)
    _emit(
        {
            "value": w.value,
            "permutation": list(w.permutation),
            "excluded": list(w.inner.excluded),
            "max_residual": w.inner.max_residual,
            "exact": w.exact,
        }
    )
    return 0


def _cmd_prokhorov(args) -> int:
    p = fileio.read_mass_vector(args.p)
    q = fileio.read_mass_vector(args.q)
    d = fileio.read_matrix(args.d)
    res = prokhorov_distance(p, q, d, tol=args.tol, exact=args.exact_rational)
    _emit(
        {
            "value": res.value,
            "breakpoint": res.breakpoint,
            "coupling": res.coupling.mass,
        }
    )
    return 0


def _cmd_birkhoff(args) -> int:
    s = fileio.read_matrix(args.s)
    dec = birkhoff_decompose(s, tol=args.tol)
    err = float(np.abs(dec.reconstruct() - s).max())
    _emit(
        {
            "terms": [{"coefficient": c, "permutation": list(p)} for c, p in dec.terms],
            "term_count": dec.size,
            "reconstruction_error": err,
        }
    )
    return 0


def _cmd_ghp(args) -> int:
    x = fileio.read_mms(args.x, tol=args.tol)
    y = fileio.read_mms(args.y, tol=args.tol)
    if args.strategy == "best":
        bound = best_ghp_upper_bound(x, y, tol=args.tol, exact_limit=args.limit)
    else:
        bound = ghp_upper_bound(x, y, args.strategy, tol=args.tol, exact_limit=args.limit)
    _emit(
        {
            "upper": bound.upper,
            "lower": bound.lower,
            "method": bound.method,
            "bridges": [list(b) for b in bound.glued.bridges],
            "cross": bound.glued.cross,
            "coupling": bound.coupling.mass,
        }
    )
    return 0


def _cmd_sample(args) -> int:
    space = fileio.read_model_space(args.space, tol=args.tol)
    mats = []
    for k in range(args.count):
        s = empirical_space(space, args.n, args.seed, stream=k)
        mats.append(s.dist.entries)
    if args.json:
        _emit([m for m in mats])
    else:
        for m in mats:
            sys.stdout.write(f"{m.shape[0]}\n")
            for row in m:
                sys.stdout.write(" ".join(repr(float(v)) for v in row) + "\n")
    return 0


def _cmd_ensemble(args) -> int:
    space = fileio.read_model_space(args.space, tol=args.tol)
    ens = enumerate_matrix_ensemble(space, args.n, budget=args.budget)
    _emit(
        {
            "n": ens.n,
            "atoms": [
                {"matrix": m.entries, "probability": p} for m, p in ens.atoms
            ],
        }
    )
    return 0


def _cmd_entropy(args) -> int:
    y = fileio.read_mms(args.y, tol=args.tol)
    x = fileio.read_mms(args.x, tol=args.tol)
    emb = find_isometric_embeddings(y, x, tol=args.entropy_tol)
    value = relative_entropy(y, x, tol=args.entropy_tol)
    best = None
    if emb.maps:
        kls = [
            sum(
                float(ny) * math.log(ny / x.mass[i])
                for ny, i in zip(y.mass, m)
                if ny > 0 and x.mass[i] > 0
            )
            if all(x.mass[i] > 0 or ny <= 0 for ny, i in zip(y.mass, m))
            else math.inf
            for m in emb.maps
        ]
        best = list(emb.maps[int(np.argmin(kls))])
    _emit({"value": value, "embedding": best, "embedding_count": emb.count})
    return 0


def _cmd_check(args) -> int:
    if args.which == "finspc":
        report = experiments.check_finspc_sandwich(
            n=args.n or 5, trials=args.trials, seed=args.seed, tol=args.tol
        )
    elif args.which == "hoelder":
        report = experiments.check_hoelder_small_n(
            epsilon=args.eps or 0.1,
            n=args.n or 4,
            seed=args.seed,
            mc_trials=args.mc_trials,
            budget=args.budget,
            tol=args.tol,
        )
    elif args.which == "sharp":
        report = experiments.check_sharp_exponent(
            c=args.c,
            alpha=args.alpha,
            epsilon=args.eps or 0.01,
            n=args.n,
            budget=args.budget,
            tol=args.tol,
        )
    elif args.which == "sampconv":
        space = fileio.read_model_space(args.space, tol=args.tol) if args.space else None
        report = experiments.check_sampling_convergence(
            space=space,
            epsilon=args.eps or 0.1,
            n=args.n or 1000,
            trials=args.trials,
            seed=args.seed,
            tol=args.tol,
        )
    elif args.which == "gpaction":
        s1 = fileio.read_model_space(args.space, tol=args.tol) if args.space else None
        s2 = fileio.read_model_space(args.space2, tol=args.tol) if args.space2 else None
        report = experiments.check_group_invariance(
            space1=s1, space2=s2, n=args.n or 3, budget=args.budget, tol=args.tol
        )
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(args.which)
    print(report.to_json())
    if args.out:
        experiments.write_report(report, args.out)
    if args.csv:
        experiments.write_report_csv(report, args.csv)
    return 0 if report.all_passed() else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmsdist")
    parser.add_argument("--tol", type=float, default=1e-9, help="comparison tolerance")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dm", help="matrix distance with exclusions")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(fn=_cmd_dm)

    p = sub.add_parser("dpi", help="matrix distance up to permutation")
    p.add_argument("a")
    p.add_argument("b")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", default=True)
    g.add_argument("--heuristic", action="store_true")
    p.add_argument("--limit", type=int, default=8, help="exact-mode size limit")
    p.set_defaults(fn=_cmd_dpi)

    p = sub.add_parser("prokhorov", help="optimal coupling distance")
    p.add_argument("p")
    p.add_argument("q")
    p.add_argument("d")
    p.add_argument("--exact-rational", action="store_true")
    p.set_defaults(fn=_cmd_prokhorov)

    p = sub.add_parser("birkhoff", help="decompose a doubly stochastic matrix")
    p.add_argument("s")
    p.set_defaults(fn=_cmd_birkhoff)

    p = sub.add_parser("ghp", help="space-distance bounds with witnesses")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--strategy", choices=STRATEGIES + ("best",), default="best")
    p.add_argument("--limit", type=int, default=8)
    p.set_defaults(fn=_cmd_ghp)

    p = sub.add_parser("sample", help="sample empirical distance matrices")
    p.add_argument("space")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("ensemble", help="exact matrix ensemble of a finite space")
    p.add_argument("space")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--budget", type=int, default=10**6)
    p.set_defaults(fn=_cmd_ensemble)

    p = sub.add_parser("entropy", help="relative entropy of two spaces")
    p.add_argument("y")
    p.add_argument("x")
    p.add_argument("--tol", dest="entropy_tol", type=float, default=1e-9)
    p.set_defaults(fn=_cmd_entropy)

    p = sub.add_parser("check", help="run a verification experiment")
    p.add_argument("which", choices=["finspc", "hoelder", "sharp", "sampconv", "gpaction"])
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.75)
    p.add_argument("--budget", type=int, default=10**6)
    p.add_argument("--mc-trials", type=int, default=0)
    p.add_argument("--space", default=None)
    p.add_argument("--space2", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(fn=_cmd_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
