"""``caldist`` command line.

Exit codes: 0 on success, 2 on invalid input, 3 when a solver refuses an
instance that exceeds one of its size limits.
"""

from __future__ import annotations

import argparse
import sys

from . import io as cio
from .core import Instance, cost_of_partition, is_calibrated, l1_distance
from .errors import FeasibilityError, ValidationError

EXIT_OK, EXIT_INVALID, EXIT_REFUSED = 0, 2, 3


def _read(path: str) -> tuple[str, str]:
    if path == "-":
        return sys.stdin.read(), "<stdin>"
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read(), path
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def _load_instance(path: str) -> Instance:
    text, source = _read(path)
    try:
        return cio.instance_from_dict(cio.parse_json(text, source))
    except ValidationError as exc:
        if str(exc).startswith(source):
            raise
        raise type(exc)(f"{source}: {exc}") from None


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _emit_result(res, inst: Instance, args) -> None:
    doc = cio.result_to_dict(res, timing=not args.no_timing)
    doc.setdefault("details", {})["witness_cost"] = cost_of_partition(inst, res.witness)
    _write(cio.dumps(doc), args.output)


def cmd_compute(args) -> None:
    inst = _load_instance(args.input)
    if args.solver == "typesparse":
        from .typesparse import typesparse_caldist

        res = typesparse_caldist(inst, max_states=args.max_states or 1_000_000)
    else:
        if args.eps is None:
            raise ValidationError(f"--eps is required for solver {args.solver}")
        if args.solver == "ptas":
            from .ptas import DEFAULT_MAX_STATES, ptas_caldist

            res = ptas_caldist(inst, args.eps, max_states=args.max_states or DEFAULT_MAX_STATES)
        else:
            from .sparsify import pipeline_caldist

            res = pipeline_caldist(inst, args.eps, max_states=args.max_states or 1_000_000)
    _emit_result(res, inst, args)


def cmd_oracle(args) -> None:
    from .oracle import oracle_caldist

    inst = _load_instance(args.input)
    _emit_result(oracle_caldist(inst, max_n=args.max_n, prune=args.prune), inst, args)


def cmd_sparsify(args) -> None:
    from . import sparsify

    inst = _load_instance(args.input)
    meta = {"transform": args.kind, "eps": args.eps}
    if args.kind == "uniform":
        out, tv = sparsify.type_sparsify_uniform(inst, args.eps)
    elif args.kind == "general":
        out, tv = sparsify.type_sparsify_general(inst, args.eps)
    else:
        out, tv, M = sparsify.discretize(inst, args.eps, grid=args.grid)
        meta["M"] = M
    meta["tv"] = tv
    _write(cio.dumps(cio.instance_to_dict(out, meta)), args.output)


def cmd_generate(args) -> None:
    from . import generators as g

    fam = args.family
    meta: dict = {"family": fam}
    if fam == "bghn":
        inst = g.gen_bghn(args.eps)
        meta.update(eps=args.eps, expected=args.eps)
    elif fam == "noiseless-ssp":
        ssp = g.SspInstance(tuple(args.a), args.theta)
        inst, thr = g.gen_noiseless_reduction(ssp)
        p, alpha = g.noiseless_parameters(ssp)
        meta.update(a=list(ssp.a), theta=ssp.theta, threshold=thr, p_star=float(p), alpha=float(alpha))
    elif fam in ("uniform-bssp", "partition-to-bssp"):
        if fam == "uniform-bssp":
            bssp = g.BalancedSspInstance(tuple(args.a))
        else:
            bssp = g.partition_to_balanced_ssp(args.a)
            meta["partition"] = list(args.a)
        meta.update(a=list(bssp.a), k=bssp.k, threshold=1.0 / (36 * bssp.k))
        if args.rounded:
            inst = g.gen_rounded_uniform_reduction(bssp)
            meta["rounded"] = True
        else:
            inst, thr = g.gen_uniform_reduction(bssp)
            meta["threshold"] = thr
    elif fam == "distinguish":
        if args.mode == "mixed" and args.seed is None:
            raise ValidationError("generate distinguish --mode mixed needs --seed")
        seed = 0 if args.seed is None else args.seed
        inst = g.gen_distinguishing(args.k, args.gamma, args.mode, seed)
        meta.update(k=args.k, gamma=args.gamma, mode=args.mode)
        if args.mode == "mixed":
            meta.update(seed=seed, ones=sum(g.distinguishing_bits(args.k, seed)))
    else:
        inst = g.gen_one_sided_lb(args.k)
        meta.update(k=args.k)
    _write(cio.dumps(cio.instance_to_dict(inst, meta)), args.output)


def cmd_estimate(args) -> None:
    from .estimate import draw_sample, empirical_instance, solve

    inst = _load_instance(args.input)
    emp = empirical_instance(draw_sample(inst, args.m, args.seed))
    res = solve(emp, args.solver, args.eps)
    doc = {
        "schema": cio.SCHEMA_VERSION,
        "value": res.value,
        "error_budget": res.additive_error_budget,
        "solver": res.solver.value,
        "m": args.m,
        "seed": args.seed,
        "support": len(emp),
    }
    _write(cio.dumps(doc), args.output)


def cmd_experiment(args) -> None:
    from . import estimate as est

    if args.kind == "one-sided":
        rep = est.experiment_one_sided(args.k, args.trials, args.seed, m=args.m)
    elif args.kind == "two-sided":
        inst = _load_instance(args.input)
        c = args.c if args.c is not None else est.TWO_SIDED_C
        rep = est.experiment_two_sided(inst, args.eps_grid, args.trials, args.seed, c)
    else:
        m_grid = args.m_grid or [est.default_collision_m(args.k, args.gamma)]
        rep = est.experiment_distinguishing(args.k, args.gamma, m_grid, args.trials, args.seed)
    _write(rep.to_csv(), args.output)
    summary = cio.dumps(rep.summary_dict())
    if args.summary:
        _write(summary, args.summary)
    else:
        sys.stderr.write(summary)


def cmd_verify(args) -> None:
    inst = _load_instance(args.input)
    text, source = _read(args.predictor)
    g = cio.predictor_from_dict(cio.parse_json(text, source))
    doc = {
        "schema": cio.SCHEMA_VERSION,
        "calibrated": is_calibrated(inst, g, tol=args.tol),
        "tol": args.tol,
        "distance_to_f": l1_distance(inst, inst.predictor(), g),
    }
    _write(cio.dumps(doc), args.output)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="caldist", description="Distance from calibration: exact, approximate and sampled.")
    sub = p.add_subparsers(dest="command", required=True)

    def io_flags(sp, needs_input=True):
        if needs_input:
            sp.add_argument("-i", "--input", default="-", help="instance JSON (default: stdin)")
        sp.add_argument("-o", "--output", default=None, help="output file (default: stdout)")

    def timing(sp):
        sp.add_argument("--no-timing", action="store_true", help="omit wall_time_ms so output is reproducible byte for byte")

    sp = sub.add_parser("compute", help="run a polynomial-time solver")
    io_flags(sp)
    timing(sp)
    sp.add_argument("--solver", choices=["typesparse", "ptas", "pipeline"], required=True)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--max-states", type=int)
    sp.set_defaults(func=cmd_compute)

    sp = sub.add_parser("oracle", help="exhaustive search over all partitions")
    io_flags(sp)
    timing(sp)
    sp.add_argument("--max-n", type=int, default=13)
    sp.add_argument("--prune", action="store_true", help="lossless branch and bound")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("sparsify", help="type-sparsify or discretize an instance")
    sp.add_argument("kind", choices=["uniform", "general", "discretize"])
    io_flags(sp)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--grid", type=int, help="grid size for discretize (must be at least 4|X|/eps)")
    sp.set_defaults(func=cmd_sparsify)

    sp = sub.add_parser("generate", help="build an instance family")
    sp.add_argument("family", choices=["bghn", "noiseless-ssp", "uniform-bssp", "partition-to-bssp", "distinguish", "one-sided"])
    io_flags(sp, needs_input=False)
    sp.add_argument("--eps", type=float, default=0.01)
    sp.add_argument("--a", type=int, nargs="+", help="integer entries")
    sp.add_argument("--theta", type=int)
    sp.add_argument("--rounded", action="store_true", help="rounded variant of the uniform reduction")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--gamma", type=float, default=0.5)
    sp.add_argument("--mode", choices=["pure", "mixed"], default="pure")
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("estimate", help="empirical distance from calibration of a seeded sample")
    io_flags(sp)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--solver", choices=["oracle", "typesparse", "ptas", "pipeline"], default="oracle")
    sp.add_argument("--eps", type=float)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("experiment", help="seeded statistical experiments; CSV rows on stdout")
    sp.add_argument("kind", choices=["one-sided", "two-sided", "distinguish"])
    io_flags(sp)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--k", type=int, default=4)
    sp.add_argument("--m", type=int)
    sp.add_argument("--c", type=float, help="two-sided sample-size constant (default: calibrated value)")
    sp.add_argument("--eps-grid", type=float, nargs="+", default=[0.1])
    sp.add_argument("--gamma", type=float, default=0.5)
    sp.add_argument("--m-grid", type=int, nargs="+")
    sp.add_argument("--summary", help="write the JSON summary here (default: stderr)")
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("verify", help="check that a predictor is calibrated")
    io_flags(sp)
    sp.add_argument("--predictor", required=True, help="predictor JSON")
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "generate":
        need = {"noiseless-ssp": ("a", "theta"), "uniform-bssp": ("a",), "partition-to-bssp": ("a",)}
        missing = [f"--{n}" for n in need.get(args.family, ()) if getattr(args, n) is None]
        if missing:
            print(f"caldist: error: generate {args.family} needs {' '.join(missing)}", file=sys.stderr)
            return EXIT_INVALID
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"caldist: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FeasibilityError as exc:
        print(f"caldist: refused: {exc} (limit {exc.limit_name}={exc.limit})", file=sys.stderr)
        return EXIT_REFUSED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
