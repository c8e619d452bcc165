"""Command-line driver.

Every subcommand writes its data files plus a manifest.json into --out;
``opentriangle replay manifest.json --out DIR`` re-runs the recorded
command and reproduces the data files byte for byte.  Exit codes:
0 success, 1 verification failure, 2 usage or parameter error,
3 resource-cap refusal.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    EigenConvergenceError,
    NotPositiveSemidefiniteError,
    ResourceCapError,
)
from .exact import (
    PercolationModel,
    cycle_size_resolved_family,
    cycle_two_point_matrix,
    enumerate_size_resolved,
    enumerate_two_point,
)
from .graphs import (
    TransitiveGraph,
    build_complete,
    build_cycle,
    build_hypercube,
    build_torus,
)
from .kernels import (
    l2_membership_diagnostic,
    box_triangle_sum,
    triangle_condition_diagnostic,
)
from .lemma import proof_pipeline, verify_lemma
from .montecarlo import mc_size_resolved, mc_two_point
from .operators import (
    IDENTITY_TOL,
    PSD_TOL,
    family_roots,
    is_psd,
    matmul_fixed,
    open_triangle_profile,
    tail_bound_check,
    triangle_diagram,
    verify_decomposition,
    verify_spectral_identity,
)
from .reporting import (
    build_manifest,
    load_manifest,
    write_json,
    write_matrix_csv,
    write_table_csv,
)

_BUILDERS = {
    "cycle": (build_cycle, 1),
    "torus": (build_torus, 2),
    "complete": (build_complete, 1),
    "hypercube": (build_hypercube, 1),
}


def parse_graph(label: str) -> TransitiveGraph:
    """Build a graph from a family:params string like cycle:6 or torus:2,3."""
    family, _, raw = label.partition(":")
    if family not in _BUILDERS:
        raise ValueError(
            f"unknown graph family {family!r}; "
            "use cycle:n, torus:d,L, complete:n or hypercube:k"
        )
    builder, arity = _BUILDERS[family]
    try:
        params = [int(x) for x in raw.split(",")] if raw else []
    except ValueError:
        raise ValueError(f"graph parameters must be integers, got {raw!r}") from None
    if len(params) != arity:
        raise ValueError(f"{family} takes {arity} parameter(s), got {len(params)}")
    return builder(*params)


def _verification_source(g: TransitiveGraph, p: float):
    """Exact (B, family) for a graph: closed form for cycles, enumeration else.

    The arc-counting closed form agrees with enumeration to full precision
    and has no edge cap, which is what lets verification run on cycles far
    beyond enumerable size.
    """
    if g.family == "cycle":
        n = g.vertex_count
        return cycle_two_point_matrix(n, p), cycle_size_resolved_family(n, p)
    model = PercolationModel(g, p)
    return enumerate_two_point(model), enumerate_size_resolved(model)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _check_vertex(g: TransitiveGraph, v: int) -> int:
    if not 0 <= v < g.vertex_count:
        raise ValueError(f"vertex {v} outside 0..{g.vertex_count - 1}")
    return v


def _finish(out, subcommand, params, outputs, results, tolerances) -> None:
    payload = build_manifest(subcommand, params, outputs, results, tolerances)
    write_json(out / "manifest.json", payload)


# ----------------------------------------------------------------------
# exact
# ----------------------------------------------------------------------


def cmd_exact(args) -> int:
    g = parse_graph(args.graph)
    model = PercolationModel(g, args.p)
    out = _outdir(args)
    B = enumerate_two_point(model)
    family = enumerate_size_resolved(model)
    Q = triangle_diagram(B)
    write_matrix_csv(out / "B.csv", B)
    write_matrix_csv(out / "Q.csv", Q)
    outputs = ["B.csv", "Q.csv"]
    for n in range(1, len(family) + 1):
        name = f"Bn_{n:02d}.csv"
        write_matrix_csv(out / name, family.matrix(n))
        outputs.append(name)
    report = verify_decomposition(B, family)
    if args.figures:
        from .plots import save_heatmap

        save_heatmap(B, f"B on {args.graph}, p={args.p}", out / "B.png")
        save_heatmap(Q, f"Q on {args.graph}, p={args.p}", out / "Q.png")
    _finish(
        out,
        "exact",
        {"graph": args.graph, "p": args.p},
        outputs,
        {
            "decomposition_residual": report.max_residual,
            "decomposition_passed": report.passed,
            "triangle_diagonal": float(Q[0, 0]),
        },
        {"decomposition_residual": report.tolerance},
    )
    print(f"exact {args.graph} p={args.p}: wrote {len(outputs)} files to {out}")
    return 0


# ----------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------


def cmd_verify(args) -> int:
    g = parse_graph(args.graph)
    v = _check_vertex(g, args.vertex)
    B, family = _verification_source(g, args.p)
    out = _outdir(args)
    params = {
        "graph": args.graph,
        "p": args.p,
        "which": args.which,
        "vertex": v,
        "delta": args.delta if args.which == "lemma" else None,
        "epsilon": args.epsilon if args.which == "pipeline" else None,
    }
    tolerances: dict = {}

    if args.which == "psd":
        entries = []
        for n, M in enumerate(family, start=1):
            good, lam = is_psd(M)
            entries.append({"n": n, "lambda_min": lam, "passed": good})
        ok = all(e["passed"] for e in entries)
        payload = {"check": "psd", "entries": entries, "passed": ok}
        tolerances = {"lambda_min": PSD_TOL}
    elif args.which == "decompose":
        report = verify_decomposition(B, family)
        ok = report.passed
        payload = report.as_dict()
        tolerances = {"residual": report.tolerance}
    elif args.which == "spectral":
        roots = family_roots(family)
        max_int = max_spectral = -1.0
        worst: tuple[int, int] | None = None
        ok = True
        for a in range(g.vertex_count):
            for b in range(g.vertex_count):
                rep = verify_spectral_identity(B, family, a, b, roots=roots)
                err = max(rep.intermediate_error, rep.spectral_error)
                if err > max(max_int, max_spectral):
                    worst = (a, b)
                max_int = max(max_int, rep.intermediate_error)
                max_spectral = max(max_spectral, rep.spectral_error)
                ok = ok and rep.passed
        payload = {
            "check": "spectral_identity",
            "pairs": g.vertex_count**2,
            "max_intermediate_error": max_int,
            "max_spectral_error": max_spectral,
            "worst_pair": list(worst) if worst else None,
            "passed": ok,
        }
        tolerances = {"relative": IDENTITY_TOL}
    elif args.which == "tail":
        roots = family_roots(family)
        ok = True
        min_slack = float("inf")
        max_mismatch = 0.0
        checks = 0
        for cutoff in range(len(family) + 1):
            for w in range(g.vertex_count):
                rep = tail_bound_check(B, family, v, w, cutoff, roots=roots)
                ok = ok and rep.passed
                min_slack = min(min_slack, rep.slack)
                max_mismatch = max(
                    max_mismatch, abs(rep.bound - rep.bound_transitive)
                )
                checks += 1
        payload = {
            "check": "tail_bound",
            "checks": checks,
            "min_slack": min_slack,
            "max_transitive_mismatch": max_mismatch,
            "passed": ok,
        }
        tolerances = {"relative": IDENTITY_TOL}
    elif args.which == "lemma":
        report = verify_lemma(g, B[v], v, args.delta)
        ok = report.verdict == "pass"
        payload = report.as_dict()
    else:  # pipeline
        if args.epsilon is None:
            raise ValueError("--epsilon is required for --which pipeline")
        report = proof_pipeline(g, (B, family), v, args.epsilon)
        ok = report.verdict == "pass"
        payload = report.as_dict()

    write_json(out / "report.json", payload)
    _finish(
        out,
        "verify",
        params,
        ["report.json"],
        {"passed": ok, "verdict": payload.get("verdict", "pass" if ok else "fail")},
        tolerances,
    )
    print(
        f"verify {args.which} {args.graph} p={args.p}: "
        f"{payload.get('verdict', 'pass' if ok else 'fail')}"
    )
    return 0 if ok else 1


# ----------------------------------------------------------------------
# mc
# ----------------------------------------------------------------------


def cmd_mc(args) -> int:
    g = parse_graph(args.graph)
    model = PercolationModel(g, args.p)
    out = _outdir(args)
    est = mc_two_point(model, args.samples, args.seed, worker_count=args.workers)
    rows = [
        (w, float(est.mean[0, w]), float(est.stderr[0, w]))
        for w in range(g.vertex_count)
    ]
    write_table_csv(out / "B_row.csv", ("vertex", "mean", "stderr"), rows)
    outputs = ["B_row.csv"]
    if args.n_max is not None:
        resolved = mc_size_resolved(
            model, args.samples, args.seed, n_max=args.n_max, worker_count=args.workers
        )
        for n in range(1, args.n_max + 1):
            bucket = resolved.bucket(n)
            name = f"Bn_row_{n:02d}.csv"
            write_table_csv(
                out / name,
                ("vertex", "mean", "stderr"),
                [
                    (w, float(bucket.mean[0, w]), float(bucket.stderr[0, w]))
                    for w in range(g.vertex_count)
                ],
            )
            outputs.append(name)
        write_table_csv(
            out / "Bn_row_overflow.csv",
            ("vertex", "mean", "stderr"),
            [
                (w, float(resolved.overflow.mean[0, w]), float(resolved.overflow.stderr[0, w]))
                for w in range(g.vertex_count)
            ],
        )
        outputs.append("Bn_row_overflow.csv")
    _finish(
        out,
        "mc",
        {
            "graph": args.graph,
            "p": args.p,
            "samples": args.samples,
            "seed": args.seed,
            "workers": args.workers,
            "n_max": args.n_max,
        },
        outputs,
        {"generator": est.generator, "samples": est.samples},
        {},
    )
    print(f"mc {args.graph} p={args.p}: {args.samples} samples, seed {args.seed}")
    return 0


# ----------------------------------------------------------------------
# kernel
# ----------------------------------------------------------------------


def cmd_kernel(args) -> int:
    out = _outdir(args)
    cutoffs = (
        tuple(int(x) for x in args.cutoffs.split(",")) if args.cutoffs else None
    )
    if args.which == "box":
        if args.expect is not None:
            raise ValueError("--expect applies to --which triangle/l2 only")
        if args.L >= 1:
            ladder = sorted({max(1, args.L // 4), max(1, args.L // 2), args.L})
        else:
            ladder = [args.L]
        values = [box_triangle_sum(args.d, L) for L in ladder]
        write_table_csv(
            out / "box.csv",
            ("d", "L", "value"),
            [(args.d, L, val) for L, val in zip(ladder, values)],
        )
        slope = None
        if len(ladder) >= 2 and values[-2] > 0.0:
            slope = float(
                np.log(values[-1] / values[-2]) / np.log(ladder[-1] / ladder[-2])
            )
        payload = {
            "check": "box_triangle",
            "d": args.d,
            "ladder": ladder,
            "values": values,
            "slope": slope,
        }
        write_json(out / "report.json", payload)
        _finish(
            out,
            "kernel",
            {"which": "box", "d": args.d, "L": args.L},
            ["box.csv", "report.json"],
            {"slope": slope, "passed": True},
            {},
        )
        print(f"kernel box d={args.d} L={args.L}: slope {slope}")
        return 0

    if args.which == "triangle":
        verdict = triangle_condition_diagnostic(args.d, cutoffs)
    else:
        verdict = l2_membership_diagnostic(args.d, cutoffs)
    cs = verdict.diagnostics["cutoffs"]
    sums = verdict.diagnostics["partial_sums"]
    write_table_csv(
        out / "series.csv",
        ("d", "exponent", "cutoff", "partial_sum", "slope", "verdict"),
        [
            (args.d, verdict.diagnostics["exponent"], c, s, verdict.slope, verdict.verdict)
            for c, s in zip(cs, sums)
        ],
    )
    write_json(out / "report.json", verdict.as_dict())
    if args.figures:
        from .plots import save_series

        save_series(cs, sums, f"{args.which} surrogate, d={args.d}", out / "series.png")
    ok = args.expect is None or verdict.verdict == args.expect
    _finish(
        out,
        "kernel",
        {
            "which": args.which,
            "d": args.d,
            "cutoffs": args.cutoffs,
            "expect": args.expect,
        },
        ["series.csv", "report.json"],
        {"verdict": verdict.verdict, "slope": verdict.slope, "passed": ok},
        {},
    )
    print(f"kernel {args.which} d={args.d}: {verdict.verdict}")
    return 0 if ok else 1


# ----------------------------------------------------------------------
# open-triangle
# ----------------------------------------------------------------------


def _mc_profile_variance(B: np.ndarray, var: np.ndarray, v: int) -> np.ndarray:
    """First-order variance of Q[v, :] = (B^3)[v, :] from entrywise variances.

    Treats matrix entries as independent (shift-class completion ties are
    ignored), so the resulting column is indicative, not exact.
    """
    B2 = matmul_fixed(B, B)
    n = B.shape[0]
    out = np.zeros(n)
    for w in range(n):
        T = np.outer(B[v], B[:, w])
        T[v, :] += B2[:, w]
        T[:, w] += B2[v, :]
        out[w] = float(np.sum(var * T**2))
    return out


def cmd_open_triangle(args) -> int:
    g = parse_graph(args.graph)
    v = _check_vertex(g, args.vertex)
    out = _outdir(args)
    sigma = None
    if args.source == "exact":
        B = enumerate_two_point(PercolationModel(g, args.p))
    elif args.source == "closed-form":
        if g.family != "cycle":
            raise ValueError(
                "closed-form two-point matrices are available for cycles only"
            )
        B = cycle_two_point_matrix(g.vertex_count, args.p)
    else:
        model = PercolationModel(g, args.p)
        est = mc_two_point(model, args.samples, args.seed, worker_count=args.workers)
        B = est.mean
        sigma = np.sqrt(_mc_profile_variance(B, est.stderr**2, v))
    Q = triangle_diagram(B)
    profile = open_triangle_profile(g, Q, v)
    dist = g.distance_row(v)
    if sigma is None:
        rows = list(zip(profile.radii, profile.values))
        header = ("R", "value")
    else:
        rows = []
        for radius, value in zip(profile.radii, profile.values):
            outside = np.flatnonzero(dist > radius)
            argmax = outside[int(np.argmax(Q[v, outside]))]
            rows.append((radius, value, float(sigma[argmax])))
        header = ("R", "value", "stderr")
    write_table_csv(out / "profile.csv", header, rows)
    if args.figures:
        from .plots import save_profile

        save_profile(
            profile.radii,
            profile.values,
            None if sigma is None else [r[2] for r in rows],
            f"open triangle on {args.graph}, p={args.p} ({args.source})",
            out / "profile.png",
        )
    params = {
        "graph": args.graph,
        "p": args.p,
        "source": args.source,
        "vertex": v,
        "samples": args.samples if args.source == "mc" else None,
        "seed": args.seed if args.source == "mc" else None,
        "workers": args.workers if args.source == "mc" else None,
    }
    _finish(
        out,
        "open-triangle",
        params,
        ["profile.csv"],
        {
            "radii": len(profile.radii),
            "max_value": max(profile.values, default=0.0),
        },
        {},
    )
    print(f"open-triangle {args.graph} p={args.p} ({args.source}): "
          f"{len(profile.radii)} radii")
    return 0


# ----------------------------------------------------------------------
# replay
# ----------------------------------------------------------------------


def cmd_replay(args) -> int:
    manifest = load_manifest(args.manifest)
    if manifest.get("version") != __version__:
        print(
            f"warning: manifest version {manifest.get('version')} != {__version__}",
            file=sys.stderr,
        )
    argv = [manifest["subcommand"]]
    for key in sorted(manifest["params"]):
        value = manifest["params"][key]
        if value is None:
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        else:
            argv.extend([flag, str(value)])
    argv.extend(["--out", str(args.out)])
    return main(argv)


# ----------------------------------------------------------------------
# parser / entry point
# ----------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=".", help="output directory (created if needed)")
    p.add_argument("--figures", action="store_true", help="also render PNG figures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opentriangle",
        description="Percolation two-point structure on finite transitive graphs.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    pe = sub.add_parser("exact", help="enumerate B, all B_n and Q exactly")
    pe.add_argument("--graph", required=True, help="family:params, e.g. cycle:6")
    pe.add_argument("--p", type=float, required=True)
    _add_common(pe)
    pe.set_defaults(handler=cmd_exact)

    pv = sub.add_parser("verify", help="run one verification check")
    pv.add_argument("--graph", required=True)
    pv.add_argument("--p", type=float, required=True)
    pv.add_argument(
        "--which",
        required=True,
        choices=["psd", "decompose", "spectral", "tail", "lemma", "pipeline"],
    )
    pv.add_argument("--vertex", type=int, default=0)
    pv.add_argument(
        "--delta", type=float, default=0.1, help="overlap budget for --which lemma"
    )
    pv.add_argument(
        "--epsilon", type=float, default=None, help="target for --which pipeline"
    )
    _add_common(pv)
    pv.set_defaults(handler=cmd_verify)

    pm = sub.add_parser("mc", help="Monte Carlo two-point row (plus size buckets)")
    pm.add_argument("--graph", required=True)
    pm.add_argument("--p", type=float, required=True)
    pm.add_argument("--samples", type=int, required=True)
    pm.add_argument("--seed", type=int, default=0)
    pm.add_argument("--workers", type=int, default=1)
    pm.add_argument(
        "--n-max", dest="n_max", type=int, default=None,
        help="also write size-resolved rows for n = 1..n_max plus overflow",
    )
    _add_common(pm)
    pm.set_defaults(handler=cmd_mc)

    pk = sub.add_parser("kernel", help="power-law kernel convergence diagnostics")
    pk.add_argument("--which", required=True, choices=["triangle", "l2", "box"])
    pk.add_argument("--d", type=int, required=True)
    pk.add_argument(
        "--L", type=int, default=8, help="box half-width for --which box"
    )
    pk.add_argument(
        "--cutoffs", default=None, help="comma-separated cutoffs (default 1e2..1e7)"
    )
    pk.add_argument(
        "--expect",
        choices=["convergent", "divergent_log", "divergent_poly"],
        default=None,
        help="exit nonzero unless the verdict matches",
    )
    _add_common(pk)
    pk.set_defaults(handler=cmd_kernel)

    po = sub.add_parser(
        "open-triangle", help="max_{d(v,w)>R} Q(v,w) as a function of R"
    )
    po.add_argument("--graph", required=True)
    po.add_argument("--p", type=float, required=True)
    po.add_argument(
        "--source", required=True, choices=["exact", "closed-form", "mc"]
    )
    po.add_argument("--vertex", type=int, default=0)
    po.add_argument("--samples", type=int, default=100000)
    po.add_argument("--seed", type=int, default=0)
    po.add_argument("--workers", type=int, default=1)
    _add_common(po)
    po.set_defaults(handler=cmd_open_triangle)

    pr = sub.add_parser("replay", help="re-run a recorded manifest")
    pr.add_argument("manifest")
    pr.add_argument("--out", default=".")
    pr.set_defaults(handler=cmd_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (NotPositiveSemidefiniteError, EigenConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
