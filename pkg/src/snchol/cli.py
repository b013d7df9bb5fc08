"""Command line front end: analyze, factor, check and bench subcommands.

``bench`` emits one CSV row per (matrix, method) with median-of-N timings plus
a companion performance-profile CSV: for each method, the fraction of matrices
factored within a factor tau of the per-matrix best, over a grid of tau.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass

import numpy as np

from .kernels import NotPositiveDefiniteError
from .matrix import (MatrixMarketError, SymmetricSparseMatrix, apply_symmetric_permutation,
                     generate_spd, read_matrix_market)
from .numeric import (METHODS, FactorizationResult, RunOptions, deviation_from_reference,
                      ordering_permutation, run_factorization)
from .symbolic import BuildOptions, build_symbolic_factor

CSV_HEADER = ["matrix", "method", "backend", "ordering", "pr", "merge_cap", "repeats",
              "wall_seconds", "flops", "factor_nnz", "workspace_peak", "assembly_ops",
              "status"]


@dataclass
class BenchRecord:
    matrix: str
    method: str
    backend: str
    ordering: str
    pr: bool
    merge_cap: float | None
    repeats: int
    wall_seconds: float
    flops: int
    factor_nnz: int
    workspace_peak: int
    assembly_ops: int
    status: str = "ok"

    def to_row(self) -> list:
        cap = "off" if self.merge_cap is None else repr(float(self.merge_cap))
        return [self.matrix, self.method, self.backend, self.ordering,
                str(int(self.pr)), cap, str(self.repeats), repr(self.wall_seconds),
                str(self.flops), str(self.factor_nnz), str(self.workspace_peak),
                str(self.assembly_ops), self.status]

    @classmethod
    def from_row(cls, row: list) -> "BenchRecord":
        return cls(row[0], row[1], row[2], row[3], bool(int(row[4])),
                   None if row[5] == "off" else float(row[5]), int(row[6]),
                   float(row[7]), int(row[8]), int(row[9]), int(row[10]),
                   int(row[11]), row[12])


def performance_profile(times: dict, taus: np.ndarray) -> dict:
    """times maps method -> array of per-matrix seconds (inf marks a failed
    run).  Returns method -> fraction of matrices within tau of the best."""
    methods = list(times)
    mat = np.vstack([np.asarray(times[m], dtype=float) for m in methods])
    best = mat.min(axis=0)
    out = {}
    for i, m in enumerate(methods):
        with np.errstate(invalid="ignore"):
            ratio = np.where(np.isfinite(mat[i]) & np.isfinite(best), mat[i] / best, np.inf)
        out[m] = np.array([(ratio <= t).mean() for t in taus])
    return out


def tau_grid(tau_max: float, tau_step: float) -> np.ndarray:
    count = int(round((tau_max - 1.0) / tau_step))
    return np.round(1.0 + tau_step * np.arange(count + 1), 12)


def load_matrix(spec: str, default_seed: int) -> tuple:
    """A path, or ``gen:n=...,density=...[,seed=...]`` for a synthetic SPD matrix."""
    if spec.startswith("gen:"):
        kv = dict(item.split("=") for item in spec[4:].split(","))
        n = int(kv["n"])
        density = float(kv.get("density", 0.1))
        seed = int(kv.get("seed", default_seed))
        return spec, generate_spd(n, density, seed)
    return spec, read_matrix_market(spec)


def _run_opts(args, method: str = None) -> RunOptions:
    return RunOptions(method=method or args.method, backend=args.backend,
                      ordering=args.order, pr=args.pr, merge_cap=args.merge_cap)


def _print_record(rec: BenchRecord, stats=None) -> None:
    cap = "off" if rec.merge_cap is None else f"{rec.merge_cap:g}"
    print(f"matrix={rec.matrix} method={rec.method} backend={rec.backend} "
          f"order={rec.ordering} pr={int(rec.pr)} merge_cap={cap}")
    print(f"  wall={rec.wall_seconds:.6f}s flops={rec.flops} factor_nnz={rec.factor_nnz} "
          f"workspace_peak={rec.workspace_peak} assembly_ops={rec.assembly_ops} "
          f"repeats={rec.repeats} status={rec.status}")
    if stats is not None:
        c = stats.calls
        print(f"  kernel calls: potrf={c['potrf']} trsm={c['trsm']} "
              f"syrk={c['syrk']} gemm={c['gemm']}")


def _append_csv(path: str, rows: list, header: list) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def cmd_factor(args) -> int:
    try:
        name, A = load_matrix(args.matrix, args.seed)
    except (OSError, MatrixMarketError) as e:
        print(f"error: input: {e}", file=sys.stderr)
        return 1
    try:
        result = run_factorization(A, _run_opts(args))
    except NotPositiveDefiniteError as e:
        print(f"error: factorization ({args.method}): {e}", file=sys.stderr)
        return 1
    stats = result.stats
    rec = BenchRecord(name, args.method, stats.backend, args.order, args.pr,
                      args.merge_cap, 1, stats.wall_seconds, stats.flops,
                      stats.factor_nnz, stats.workspace_peak, stats.assembly_ops)
    _print_record(rec, stats)
    if args.check:
        dev = deviation_from_reference(result)
        print(f"  check: max relative deviation from column oracle = {dev:.3e}")
    if args.solve:
        rng = np.random.default_rng(args.seed)
        b = rng.standard_normal(A.n)
        if result.F is None:
            print("  solve: unavailable for the column method", file=sys.stderr)
        else:
            x = solve_original(result, b)
            r = residual(A, x, b)
            print(f"  solve: relative residual = {r:.3e}")
    if args.csv:
        _append_csv(args.csv, [rec.to_row()], CSV_HEADER)
    return 0


def solve_original(result: FactorizationResult, b: np.ndarray) -> np.ndarray:
    """Solve A x = b for the original (unpermuted) system."""
    P = result.perm_total
    y = result.solve(b[P.inv])
    return y[P.perm]


def residual(A: SymmetricSparseMatrix, x: np.ndarray, b: np.ndarray) -> float:
    r = A.to_dense() @ x - b
    nb = float(np.linalg.norm(b))
    return float(np.linalg.norm(r)) / (nb if nb > 0 else 1.0)


def cmd_check(args) -> int:
    try:
        name, A = load_matrix(args.matrix, args.seed)
    except (OSError, MatrixMarketError) as e:
        print(f"error: input: {e}", file=sys.stderr)
        return 1
    failed = False
    for method in ("mf", "ll", "rl", "rlb"):
        try:
            result = run_factorization(A, _run_opts(args, method))
            dev = deviation_from_reference(result)
            ok = dev <= 1e-10
            failed |= not ok
            print(f"{name} {method}: deviation={dev:.3e} {'ok' if ok else 'FAIL'}")
        except NotPositiveDefiniteError as e:
            print(f"{name} {method}: error: {e}")
            failed = True
    return 1 if failed else 0


def cmd_analyze(args) -> int:
    try:
        name, A = load_matrix(args.matrix, args.seed)
    except (OSError, MatrixMarketError) as e:
        print(f"error: input: {e}", file=sys.stderr)
        return 1
    P = ordering_permutation(A, args.order)
    A1 = apply_symmetric_permutation(A, P)
    S_pre = build_symbolic_factor(A1.pattern, BuildOptions(args.merge_cap, False))
    S = S_pre
    if args.pr:
        S = build_symbolic_factor(A1.pattern, BuildOptions(args.merge_cap, True))
    ms = S.merge_stats
    nnz_a = A.pattern.nnz
    print(f"matrix={name} n={A.n} nnz(A)={nnz_a}")
    print(f"factor nnz={S.factor_nnz} fill={S.factor_nnz - nnz_a} panel_storage={S.panel_storage}")
    print(f"supernodes: fundamental={ms.nsuper_before} merged={ms.nsuper_after}")
    growth = 100.0 * (ms.nnz_after - ms.nnz_before) / max(1, ms.nnz_before)
    wgrowth = 100.0 * (ms.work_after - ms.work_before) / max(1, ms.work_before)
    print(f"merging: storage growth={growth:.3f}% work growth={wgrowth:.3f}%")

    def block_stats(sym):
        count = sum(sym.nblocks(j) for j in range(sym.nsuper))
        rows = sum(sym.mrows(j) for j in range(sym.nsuper))
        return count, (rows / count if count else 0.0)

    b0, m0 = block_stats(S_pre)
    b1, m1 = block_stats(S)
    print(f"blocks before reordering: count={b0} mean_len={m0:.3f}")
    print(f"blocks after  reordering: count={b1} mean_len={m1:.3f}")
    print(f"workspace plans (floats): mf={S.plans.mf_peak} ll={S.plans.ll_peak} "
          f"rl={S.plans.rl_peak} rlb=0")
    if args.csv:
        rows = []
        for j in range(S.nsuper):
            f, l = S.cols(j)
            rows.append([str(j), str(f + 1), str(l + 1), str(S.width(j)),
                         str(S.mrows(j)), str(S.nblocks(j))])
        _append_csv(args.csv, rows,
                    ["snode", "first_col", "last_col", "width", "rows_below", "blocks"])
    return 0


def cmd_bench(args) -> int:
    if args.repeats < 1 or args.repeats % 2 == 0:
        print("error: --repeats must be odd", file=sys.stderr)
        return 1
    try:
        with open(args.list) as fh:
            specs = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    except OSError as e:
        print(f"error: input: {e}", file=sys.stderr)
        return 1
    methods = args.methods.split(",") if args.methods else list(METHODS)
    for m in methods:
        if m not in METHODS:
            print(f"error: unknown method '{m}'", file=sys.stderr)
            return 1
    rows = []
    times = {m: [] for m in methods}
    for spec in specs:
        try:
            name, A = load_matrix(spec, args.seed)
        except (OSError, MatrixMarketError) as e:
            for m in methods:
                rows.append(BenchRecord(spec, m, args.backend, args.order, args.pr,
                                        args.merge_cap, args.repeats, 0.0, 0, 0, 0, 0,
                                        f"input error: {e}"))
                times[m].append(np.inf)
            continue
        for m in methods:
            samples = []
            stats = None
            status = "ok"
            try:
                for _ in range(args.repeats):
                    result = run_factorization(A, _run_opts(args, m))
                    samples.append(result.stats.wall_seconds)
                    stats = result.stats
            except NotPositiveDefiniteError as e:
                status = f"factorization error: {e}"
            if status == "ok":
                med = float(np.median(samples))
                rows.append(BenchRecord(name, m, stats.backend, args.order, args.pr,
                                        args.merge_cap, args.repeats, med, stats.flops,
                                        stats.factor_nnz, stats.workspace_peak,
                                        stats.assembly_ops))
                times[m].append(med)
            else:
                rows.append(BenchRecord(name, m, args.backend, args.order, args.pr,
                                        args.merge_cap, args.repeats, 0.0, 0, 0, 0, 0, status))
                times[m].append(np.inf)
            _print_record(rows[-1])
    if args.csv:
        _append_csv(args.csv, [r.to_row() for r in rows], CSV_HEADER)
    taus = tau_grid(args.tau_max, args.tau_step)
    profile = performance_profile(times, taus)
    if args.profile_csv:
        prows = [[m, repr(float(t)), repr(float(v))]
                 for m in methods for t, v in zip(taus, profile[m])]
        _append_csv(args.profile_csv, prows, ["method", "tau", "fraction"])
    for m in methods:
        print(f"profile {m}: tau=1 -> {profile[m][0]:.3f}, tau={taus[-1]:g} -> {profile[m][-1]:.3f}")
    return 0


def _cap(text: str) -> float | None:
    return None if text.lower() in ("off", "none") else float(text)


def main(argv=None) -> int:
    top = argparse.ArgumentParser(prog="snchol",
                                  description="Serial supernodal sparse Cholesky toolkit")
    sub = top.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", default="mindeg",
                        help="natural | mindeg | file:<path> (default mindeg)")
    common.add_argument("--backend", default="reference", choices=["reference", "vendor"])
    common.add_argument("--pr", action=argparse.BooleanOptionalAction, default=True,
                        help="reorder columns within supernodes (default on)")
    common.add_argument("--merge-cap", type=_cap, default=12.5, metavar="PCT",
                        help="supernode merging growth cap in percent, or 'off'")
    common.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("factor", parents=[common], help="factor one matrix")
    p.add_argument("matrix")
    p.add_argument("--method", default="rlb", choices=list(METHODS))
    p.add_argument("--check", action="store_true",
                   help="also run the column oracle and report the deviation")
    p.add_argument("--solve", action="store_true", help="solve with a random right-hand side")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("check", parents=[common],
                       help="verify all supernodal methods against the column oracle")
    p.add_argument("matrix")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("analyze", parents=[common], help="symbolic statistics only")
    p.add_argument("matrix")
    p.add_argument("--csv", help="per-supernode CSV output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bench", parents=[common], help="benchmark a list of matrices")
    p.add_argument("list", help="file with one matrix path or gen: spec per line")
    p.add_argument("--methods", help="comma-separated subset of ref,mf,ll,rl,rlb")
    p.add_argument("--repeats", type=int, default=7, help="odd repeat count (median taken)")
    p.add_argument("--csv")
    p.add_argument("--profile-csv")
    p.add_argument("--tau-max", type=float, default=2.0)
    p.add_argument("--tau-step", type=float, default=0.01)
    p.set_defaults(func=cmd_bench)

    args = top.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
