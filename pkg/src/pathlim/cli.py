"""Command-line front end.

Every subcommand reads one edge-list file. Reports are ``key: value`` lines,
matrices are CSV with vertex tokens in the header row and first column, and
all numbers are printed with 9 significant digits.

Exit codes: 0 success, 1 failed verification or numerical failure, 2 input
error (unreadable or malformed file, unknown vertex, bad option), 3
degenerate digraph (spectral radius 0), 4 precondition or range error.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .errors import (
    CapExceededError,
    DegenerateError,
    InputError,
    PathlimError,
    PreconditionError,
)
from .graph import format_number, matrix_csv, read_digraph, z_table
from .limits import limit_kernel, uniform_convergence, validate_cocycle_measure
from .oracle import (
    EIGENSPACE_MAX_SIZE,
    ENUMERATION_CAP,
    eigenvalue_index,
    enumerate_paths,
    generalized_eigenspace_dim,
    numeric_residual,
)
from .residual import (
    eigenvector_bases,
    periodic_decomposition,
    residual_matrix,
    residual_umbrella,
    structural_support,
)
from .sampling import SamplerConfig, dump_paths
from .structure import (
    _require_positive,
    condensation_dot,
    decompose,
    height,
    is_augmented_umbrella,
    is_umbrella,
    reachable,
    umbrella_spanned,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_PRECONDITION = 4

CHECK_TOL = 1e-4
VERIFY_MAX_K = 8
SEED_ENV = "PATHLIM_SEED"


def _bool(flag: bool) -> str:
    return "true" if flag else "false"


def _tokens(vertices) -> str:
    return " ".join(map(str, vertices))


def _residual_for(g, method: str):
    if method == "umbrella":
        return residual_umbrella(g)
    if method == "auto":
        dec = decompose(g)
        _require_positive(dec)
        if is_augmented_umbrella(dec):
            return residual_umbrella(g)
    return residual_matrix(g)


def cmd_analyze(args, out):
    g = read_digraph(args.file)
    dec = decompose(g)
    print(f"vertices: {g.n}", file=out)
    print(f"classes: {len(dec.classes)}", file=out)
    for i, cls in enumerate(dec.classes):
        print(f"class {i}: {{{','.join(map(str, cls))}}} rho={format_number(dec.rho[i])} "
              f"period={dec.period[i]} basic={_bool(dec.basic[i])} final={_bool(dec.final[i])}", file=out)
    _require_positive(dec)
    report = height(dec)
    print(f"rho: {format_number(dec.rho_total)}", file=out)
    print(f"height: {report.height}", file=out)
    for chain in report.dominant_chains:
        print(f"dominant chain: {' -> '.join(str(c) for c in chain)}", file=out)
    print(f"umbrella: {_bool(is_umbrella(dec))}", file=out)
    print(f"augmented umbrella: {_bool(is_augmented_umbrella(dec))}", file=out)
    if args.from_ is not None:
        _, gamma = reachable(g, args.from_)
        print(f"gamma({args.from_}): {format_number(gamma)}", file=out)
        if gamma > 0:
            print(f"U({args.from_}): {_tokens(umbrella_spanned(g, args.from_))}", file=out)
    return EXIT_OK


def cmd_residual(args, out):
    g = read_digraph(args.file)
    res = _residual_for(g, args.method)
    print(f"height: {res.height}", file=out)
    out.write(matrix_csv(res.theta, g.vertices, g.vertices))
    if args.check:
        num = numeric_residual(g, res.height, rho=decompose(g).rho_total)
        raw = float(np.abs(num.theta - res.theta).max())
        extrapolated = float(np.abs(num.extrapolated - res.theta).max())
        print(f"check-gap: {format_number(raw)}", file=out)
        print(f"check-gap-extrapolated: {format_number(extrapolated)}", file=out)
        print(f"check-trend: {num.trend}", file=out)
        if extrapolated > CHECK_TOL:
            print("check: FAIL", file=out)
            return EXIT_FAILURE
        print("check: PASS", file=out)
    return EXIT_OK


def cmd_kernel(args, out):
    g = read_digraph(args.file)
    kernel = limit_kernel(g, args.from_, source=args.source)
    print(f"support: {_tokens(kernel.support)}", file=out)
    print(f"rho: {format_number(kernel.rho)}", file=out)
    if len(kernel.support) < g.n:
        print(f"note: U({args.from_}) = {{{','.join(map(str, kernel.support))}}}", file=out)
    out.write(kernel.to_csv())
    return EXIT_OK


def cmd_converge(args, out):
    g = read_digraph(args.file)
    report = uniform_convergence(g, args.from_, args.max_len)
    verdict = report.verdict.upper()
    if report.converges and report.aperiodic:
        verdict += " (aperiodic)"
    print(f"verdict: {verdict}", file=out)
    print(f"witness: {_tokens(report.witness) if report.witness else '-'}", file=out)
    print(f"d: {report.d}", file=out)
    print(f"max-len: {report.max_len}", file=out)
    print("betas:", file=out)
    out.write(report.betas_csv())
    print("residue limits:", file=out)
    out.write(report.residues_csv())
    return EXIT_OK


def cmd_sample(args, out):
    g = read_digraph(args.file)
    seed = args.seed
    if os.environ.get(SEED_ENV):
        try:
            seed = int(os.environ[SEED_ENV], 0)
        except ValueError:
            raise InputError(f"{SEED_ENV} is not an integer") from None
    try:
        config = SamplerConfig.parse(args.mode, seed, args.count)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out.write(dump_paths(config.run(g, args.from_)))
    return EXIT_OK


def _verify_paths(g, cap, out, err):
    ok = True
    partial = False
    table = z_table(g, VERIFY_MAX_K)
    for x in g.vertices:
        for k in range(VERIFY_MAX_K + 1):
            try:
                paths = enumerate_paths(g, x, k, cap)
            except CapExceededError as exc:
                print(f"warning: {exc}; skipping longer paths from {x}", file=err)
                partial = True
                break
            total = sum(w for _, w in paths)
            z = float(table.z(x, k))
            if abs(total - z) > 1e-12 * max(1.0, z):
                ok = False
    print(f"path counts: {'PASS' if ok else 'FAIL'}{' (partial)' if partial else ''}", file=out)
    return ok


def cmd_verify(args, out, err):
    g = read_digraph(args.file)
    results = [_verify_paths(g, args.cap, out, err)]
    dec = decompose(g)
    if not dec.rho_total:
        print("residual: SKIP (spectral radius 0)", file=out)
        raise DegenerateError("digraph has spectral radius 0")

    res = residual_matrix(g)
    theta = res.theta.copy()
    if args.corrupt_theta:
        theta[0, 0] += args.corrupt_theta
    num = numeric_residual(g, res.height, rho=dec.rho_total)
    gap = float(np.abs(num.extrapolated - theta).max())
    results.append(gap <= CHECK_TOL)
    print(f"residual vs numeric: {'PASS' if results[-1] else 'FAIL'} gap={format_number(gap)}", file=out)

    peak = float(theta.max())
    same = np.array_equal(theta > 1e-8 * peak, structural_support(g))
    results.append(same)
    print(f"support pattern: {'PASS' if same else 'FAIL'}", file=out)

    if g.n <= EIGENSPACE_MAX_SIZE:
        index = eigenvalue_index(g.weights, dec.rho_total)
        dim = generalized_eigenspace_dim(g.weights, dec.rho_total)
        results.append(index == res.height)
        print(f"height vs eigenvalue index: {'PASS' if results[-1] else 'FAIL'} "
              f"height={res.height} index={index} generalized-eigenspace-dim={dim}", file=out)
    else:
        print(f"height vs eigenvalue index: SKIP (more than {EIGENSPACE_MAX_SIZE} vertices)", file=out)

    if is_augmented_umbrella(dec):
        sd = periodic_decomposition(g)
        Pi, R = sd.projector, sd.remainder
        Fd = np.linalg.matrix_power(g.weights, sd.d)
        errs = [np.abs(Pi @ Pi - Pi).max(), np.abs(Pi @ R).max(), np.abs(R @ Pi).max(),
                np.abs(Fd - sd.rho**sd.d * (Pi + R)).max() / sd.rho**sd.d]
        L, Rb = np.array(sd.left_basis), np.array(sd.right_basis)
        errs.append(np.abs(L @ Rb.T - np.eye(len(L))).max())
        worst = float(max(errs))
        results.append(worst <= 1e-9)
        print(f"decomposition identities: {'PASS' if results[-1] else 'FAIL'} "
              f"max-error={format_number(worst)}", file=out)

    kernels_ok = True
    for x in g.vertices:
        if reachable(g, x)[1] > 0:
            report = validate_cocycle_measure(g, limit_kernel(g, x))
            kernels_ok &= report.complete
    results.append(kernels_ok)
    print(f"limit kernels: {'PASS' if kernels_ok else 'FAIL'}", file=out)

    passed = all(results)
    print(f"verify: {'PASS' if passed else 'FAIL'}", file=out)
    return EXIT_OK if passed else EXIT_FAILURE


def cmd_export(args, out):
    g = read_digraph(args.file)
    if args.dot:
        out.write(condensation_dot(decompose(g)))
    elif args.theta:
        out.write(matrix_csv(residual_matrix(g).theta, g.vertices, g.vertices))
    elif args.projector:
        sd = periodic_decomposition(g)
        print(f"d: {sd.d}", file=out)
        out.write(matrix_csv(sd.projector, g.vertices, g.vertices))
    elif args.bases:
        lefts, rights, _ = eigenvector_bases(g)
        cols = []
        for i in range(len(lefts)):
            cols += [f"l{i}", f"r{i}"]
        table = np.column_stack([v for pair in zip(lefts, rights) for v in pair])
        out.write(matrix_csv(table, g.vertices, cols))
    return EXIT_OK


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, (InputError, OSError)):
        return EXIT_INPUT
    if isinstance(exc, DegenerateError):
        return EXIT_DEGENERATE
    if isinstance(exc, PreconditionError):
        return EXIT_PRECONDITION
    return EXIT_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pathlim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="access classes, height and umbrella tests")
    p.add_argument("file")
    p.add_argument("--from", dest="from_", metavar="VERTEX", help="also report gamma and U for VERTEX")

    p = sub.add_parser("residual", help="height and residual matrix")
    p.add_argument("file")
    p.add_argument("--method", choices=("recursive", "umbrella", "auto"), default="recursive")
    p.add_argument("--check", action="store_true", help="compare with the numeric oracle")

    p = sub.add_parser("kernel", help="limit cocycle kernel from a vertex")
    p.add_argument("file")
    p.add_argument("--from", dest="from_", metavar="VERTEX", required=True)
    p.add_argument("--source", choices=("reachable", "umbrella"), default="reachable",
                   help="digraph whose residual matrix defines the cocycle")

    p = sub.add_parser("converge", help="weak convergence of the uniform distributions")
    p.add_argument("file")
    p.add_argument("--from", dest="from_", metavar="VERTEX", required=True)
    p.add_argument("--max-len", type=int, default=None, help="longest tested cylinder (default 2d)")

    p = sub.add_parser("sample", help="random paths, one per line")
    p.add_argument("file")
    p.add_argument("--from", dest="from_", metavar="VERTEX", required=True)
    p.add_argument("--mode", required=True, help="uniform:K, boltzmann:S or walk:N")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help=f"overridden by ${SEED_ENV}")

    p = sub.add_parser("verify", help="cross-check against the oracles")
    p.add_argument("file")
    p.add_argument("--cap", type=int, default=ENUMERATION_CAP, help="path enumeration cap")
    p.add_argument("--corrupt-theta", type=float, default=0.0, help=argparse.SUPPRESS)

    p = sub.add_parser("export", help="DOT condensation or CSV matrices")
    p.add_argument("file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--dot", action="store_true")
    group.add_argument("--theta", action="store_true")
    group.add_argument("--projector", action="store_true")
    group.add_argument("--bases", action="store_true")
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "analyze": cmd_analyze,
        "residual": cmd_residual,
        "kernel": cmd_kernel,
        "converge": cmd_converge,
        "sample": cmd_sample,
        "export": cmd_export,
    }
    try:
        if args.command == "verify":
            return cmd_verify(args, out, err)
        return handlers[args.command](args, out)
    except (PathlimError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
