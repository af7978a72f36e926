"""Command line front end: gen, encode, solve, verify, run, sweep.

Exit codes: 0 success, 1 a claimed bound was violated, 2 usage or hypothesis
error. Every JSON report carries the schema version and the exact command
line that reproduces it. ODEQL_SEED provides the default seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import shlex
import sys
from pathlib import Path

import numpy as np

from . import fileio, pipeline, suites
from .encoder import TaylorParams, encode
from .errors import BoundViolationError, OdeqlError
from .instances import GenSpec, generate
from .numerics import make_instance, spectral_norm
from .solver import forward_substitute, residual

DEFAULT_SEED = int(os.environ.get("ODEQL_SEED", "0"))


def _write_report(path, payload: dict, argv) -> None:
    payload = dict(payload)
    payload.setdefault("schema", 1)
    payload["command"] = "odeql " + shlex.join(argv)
    text = json.dumps(payload, indent=2, default=float) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        print(text, end="")


def _parse_gen_inline(text: str) -> GenSpec:
    """Parse 'N=4,kappa=3,profile=boundary,b=random,seed=1,s=2,unit=1'."""
    fields = {}
    for part in text.split(","):
        if not part.strip():
            continue
        key, _, value = part.partition("=")
        fields[key.strip()] = value.strip()
    kwargs = {"N": int(fields.pop("N", 4))}
    if "kappa" in fields:
        kwargs["kappa_V"] = float(fields.pop("kappa"))
    if "profile" in fields:
        kwargs["eig_profile"] = fields.pop("profile")
    if "eig" in fields:
        kwargs["eig_value"] = complex(fields.pop("eig"))
        kwargs.setdefault("eig_profile", "scalar")
    if "s" in fields:
        kwargs["sparsity"] = int(fields.pop("s"))
        kwargs["kappa_V"] = None
    if "b" in fields:
        kwargs["b_mode"] = fields.pop("b")
    if "seed" in fields:
        kwargs["seed"] = int(fields.pop("seed"))
    if "unit" in fields:
        kwargs["unit_norm"] = fields.pop("unit") not in ("0", "false", "no")
    if fields:
        raise OdeqlError(f"unknown generation keys: {sorted(fields)}")
    kwargs.setdefault("unit_norm", True)
    return GenSpec(**kwargs)


def _load_problem(args):
    """Resolve (A, x_in, b, instance-or-None) from --instance or file flags."""
    if getattr(args, "instance", None):
        inst = fileio.load_instance(args.instance)
        return inst.A, inst.x_in, inst.b, inst
    if getattr(args, "gen", None):
        inst = generate(_parse_gen_inline(args.gen))
        return inst.A, inst.x_in, inst.b, inst
    A = fileio.load_matrix(args.matrix)
    x_in = fileio.load_vector(args.x_in)
    b = fileio.load_vector(args.b)
    return A, x_in, b, None


def _instance_from_matrix(A, x_in, b):
    """Derive an Instance from raw files via a dense eigendecomposition."""
    dense = A.toarray() if hasattr(A, "toarray") else np.asarray(A)
    eigvals, V = np.linalg.eig(dense)
    return make_instance(V, eigvals, b, x_in, A=A, label="from-files")


def _resolve_params(args, A, x_in, b, inst) -> TaylorParams:
    if args.params:
        blob = json.loads(Path(args.params).read_text())
        if {"m", "k", "p", "h"} <= set(blob):
            return TaylorParams(m=int(blob["m"]), k=int(blob["k"]),
                                p=int(blob["p"]), h=float(blob["h"]))
        if {"T", "epsilon"} <= set(blob):
            args.T, args.epsilon = float(blob["T"]), float(blob["epsilon"])
        else:
            raise OdeqlError("params file needs {m,k,p,h} or {T,epsilon}")
    if args.m is not None:
        return TaylorParams(m=args.m, k=args.k, p=args.p, h=args.h)
    if args.T is None or args.epsilon is None:
        raise OdeqlError("give either --m/--k/--p/--h or --T/--epsilon")
    if inst is None:
        inst = _instance_from_matrix(A, x_in, b)
    normA = spectral_norm(A, tol=1e-6)
    m = pipeline.step_count(args.T, normA)
    decay = pipeline.estimate_decay(inst, args.T, m, refine=0)
    chosen = pipeline.choose_parameters(
        args.T, normA, args.epsilon, decay.g_grid, inst.kappa_V,
        float(np.linalg.norm(x_in)), float(np.linalg.norm(b)), decay.q)
    return chosen.params


def _add_problem_flags(sub, with_gen=False):
    sub.add_argument("--instance", help="instance directory written by gen")
    if with_gen:
        sub.add_argument("--gen", help="inline generation spec, e.g. 'N=4,kappa=3'")
    sub.add_argument("--matrix", help="A in Matrix Market format")
    sub.add_argument("--x-in", dest="x_in", help="initial state vector file")
    sub.add_argument("--b", help="inhomogeneity vector file")


def _add_params_flags(sub):
    sub.add_argument("--params", help="JSON file with {m,k,p,h} or {T,epsilon}")
    sub.add_argument("--m", type=int)
    sub.add_argument("--k", type=int)
    sub.add_argument("--p", type=int)
    sub.add_argument("--h", type=float)
    sub.add_argument("--T", type=float)
    sub.add_argument("--epsilon", type=float)


def _cmd_gen(args, argv) -> int:
    spec = GenSpec(
        N=args.N,
        kappa_V=None if args.sparsity else args.kappa,
        eig_profile="scalar" if args.eig_value else args.profile,
        eig_value=complex(args.eig_value) if args.eig_value else None,
        sparsity=args.sparsity,
        b_mode=args.b_mode,
        seed=args.seed,
        unit_norm=args.unit_norm,
    )
    inst = generate(spec)
    out = fileio.save_instance(args.out, inst, {"seed": args.seed})
    print(f"wrote instance {inst.label} to {out}")
    return 0


def _cmd_encode(args, argv) -> int:
    A, x_in, b, inst = _load_problem(args)
    params = _resolve_params(args, A, x_in, b, inst)
    system = encode(A, x_in, b, params)
    fileio.save_matrix(args.out_matrix, system.matrix)
    fileio.save_vector(args.out_rhs, system.rhs)
    print(f"wrote {system.dim}x{system.dim} system "
          f"(m={params.m}, k={params.k}, p={params.p}, h={params.h:g}, "
          f"nnz={system.matrix.nnz}) to {args.out_matrix}, {args.out_rhs}")
    return 0


def _cmd_solve(args, argv) -> int:
    A, x_in, b, inst = _load_problem(args)
    params = _resolve_params(args, A, x_in, b, inst)
    sol = forward_substitute(A, params, x_in, b)
    system = encode(A, x_in, b, params)
    rel = residual(system, sol.vector())

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if args.block:
        for spec in args.block:
            i, j = (int(s) for s in spec.split(","))
            path = out_dir / f"block_{i}_{j}.txt"
            fileio.save_vector(path, sol.block(i, j))
            written.append(str(path))
    if args.history:
        for i, state in enumerate(sol.step_states()):
            path = out_dir / f"step_{i:04d}.txt"
            fileio.save_vector(path, state)
            written.append(str(path))
    if not written:
        path = out_dir / "solution.txt"
        fileio.save_vector(path, sol.vector())
        written.append(str(path))

    _write_report(args.report, {
        "residual": rel,
        "params": {"m": params.m, "k": params.k, "p": params.p, "h": params.h,
                   "d": params.d},
        "dim": system.dim,
        "nnz": system.matrix.nnz,
        "files": written,
    }, argv)
    return 0


def _cmd_verify(args, argv) -> int:
    report = suites.run_suite(args.suite, args.trials, args.seed)
    _write_report(args.report, report, argv)
    return 0 if report["passed"] else 1


def _cmd_run(args, argv) -> int:
    _, _, _, inst = _load_problem(args)
    if inst is None:
        raise OdeqlError("run needs --instance or --gen")
    if args.inject_delta == "off":
        injection = None
    elif args.inject_delta == "auto":
        injection = "auto"
    else:
        injection = float(args.inject_delta)
    cfg = pipeline.RunConfig(T=args.T, epsilon=args.epsilon, seed=args.seed,
                             delta_injection=injection)
    report = pipeline.run(inst, cfg)
    payload = report.to_json_dict()
    payload["instance"] = inst.label
    _write_report(args.report, payload, argv)
    return 0 if report.success_conditioned_error <= args.epsilon else 1


def _cmd_sweep(args, argv) -> int:
    base = _parse_gen_inline(args.gen) if args.gen else GenSpec(N=4, unit_norm=True)
    T_values = [float(s) for s in args.T.split(",")]
    eps_values = [float(s) for s in args.epsilon.split(",")]
    kappa_values = ([float(s) for s in args.kappa.split(",")]
                    if args.kappa else None)
    result = pipeline.sweep_grid(base, T_values, eps_values, kappa_values,
                                 args.seed, delta_injection=args.inject_delta
                                 if args.inject_delta != "off" else None)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=[
                "kappa_V", "T", "epsilon", "k", "d", "success_prob",
                "fidelity_error", "success_conditioned_error", "success_flag",
                "passed"])
            writer.writeheader()
            writer.writerows(result["rows"])
    _write_report(args.report, result, argv)
    return 0 if result["all_passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="odeql",
        description="Encode, solve and verify truncated-Taylor linear-system "
                    "propagation of linear ODEs.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    gen = sub.add_parser("gen", help="generate a seeded test instance")
    gen.add_argument("--out", required=True)
    gen.add_argument("--N", type=int, default=4)
    gen.add_argument("--kappa", type=float, default=1.0)
    gen.add_argument("--profile", default="uniform-half-disk")
    gen.add_argument("--eig-value", dest="eig_value")
    gen.add_argument("--sparsity", type=int)
    gen.add_argument("--b-mode", dest="b_mode", default="zero",
                     choices=("zero", "random"))
    gen.add_argument("--seed", type=int, default=DEFAULT_SEED)
    gen.add_argument("--unit-norm", dest="unit_norm", action="store_true")
    gen.set_defaults(func=_cmd_gen)

    enc = sub.add_parser("encode", help="build the encoded matrix and rhs")
    _add_problem_flags(enc)
    _add_params_flags(enc)
    enc.add_argument("--out-matrix", required=True)
    enc.add_argument("--out-rhs", required=True)
    enc.set_defaults(func=_cmd_encode)

    sol = sub.add_parser("solve", help="solve by block forward substitution")
    _add_problem_flags(sol)
    _add_params_flags(sol)
    sol.add_argument("--block", action="append",
                     help="write block i,j (repeatable)")
    sol.add_argument("--history", action="store_true",
                     help="write all step states x_{i,0}")
    sol.add_argument("--out-dir", required=True)
    sol.add_argument("--report")
    sol.set_defaults(func=_cmd_solve)

    ver = sub.add_parser("verify", help="run a bound-verification suite")
    ver.add_argument("--suite", required=True, choices=suites.SUITE_NAMES)
    ver.add_argument("--trials", type=int)
    ver.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ver.add_argument("--report")
    ver.set_defaults(func=_cmd_verify)

    run = sub.add_parser("run", help="end-to-end emulated run")
    _add_problem_flags(run, with_gen=True)
    run.add_argument("--T", type=float, required=True)
    run.add_argument("--epsilon", type=float, required=True)
    run.add_argument("--seed", type=int, default=DEFAULT_SEED)
    run.add_argument("--inject-delta", dest="inject_delta", default="off",
                     help="'auto', 'off', or an explicit perturbation norm")
    run.add_argument("--report")
    run.set_defaults(func=_cmd_run)

    swp = sub.add_parser("sweep", help="grid of runs over T, epsilon, kappa")
    swp.add_argument("--gen", help="inline generation spec template")
    swp.add_argument("--T", required=True, help="comma list of times")
    swp.add_argument("--epsilon", required=True, help="comma list of targets")
    swp.add_argument("--kappa", help="comma list of condition numbers")
    swp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    swp.add_argument("--inject-delta", dest="inject_delta", default="auto")
    swp.add_argument("--csv")
    swp.add_argument("--report")
    swp.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except BoundViolationError as exc:
        print(f"bound violation: {exc}", file=sys.stderr)
        return 1
    except (OdeqlError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
