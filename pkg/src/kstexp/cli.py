"""Command-line front end: ``kstexp <subcommand> [options]``.

Exit status: 0 success, 2 flagged result (stall, undersized, vacuous or
failed certificate; artifacts are still written), 1 error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from itertools import combinations, product
from pathlib import Path

from .copies import CopyCollection, enumerate_expansion_copies, enumerate_kst
from .errors import FormatError, KstError
from .hypergraph import Hypergraph, read_hg1, restrict_tripartite, shadow, write_hg1
from .params import FormulaConfig, select_ell, tau_technical, thresholds
from .pipeline import PipelineParams, certify, run_pipeline
from .random_turan import records_csv, run_experiment, sample_gnp, summary_json
from .regularize import regularize

EXIT_OK, EXIT_ERROR, EXIT_FLAGGED = 0, 1, 2
DEFAULT_SEED = 0


class CliError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}") from exc


def _write(path, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_host(path: str) -> Hypergraph:
    try:
        return read_hg1(_read(path))
    except FormatError as exc:
        raise CliError(f"{path}: {exc}") from exc


def _log_exponents(items) -> dict:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise CliError(f"--log-exponent expects NAME=VALUE, got {item!r}")
        try:
            out[name] = float(value)
        except ValueError:
            raise CliError(f"--log-exponent {name}: {value!r} is not a number")
    return out


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------- subcommands


def cmd_gen(a) -> int:
    if a.kind == "gnp":
        H = sample_gnp(a.n, a.r, a.p, a.seed)
    elif a.kind == "complete":
        H = Hypergraph(a.r, a.n, combinations(range(a.n), a.r))
    else:
        sizes = [int(x) for x in a.parts.split(",")] if a.parts else [a.n // 3] * 3
        if len(sizes) != 3:
            raise CliError("--parts needs three comma-separated sizes")
        offs = [0, sizes[0], sizes[0] + sizes[1]]
        parts = [range(o, o + z) for o, z in zip(offs, sizes)]
        if a.kind == "tripartite":
            edges = product(*parts)
        else:  # random tripartite
            keep = sample_gnp(sum(sizes), 3, a.p, a.seed).edges
            edges = [e for e in keep if all(sum(1 for v in e if v in p) == 1 for p in parts)]
        H = Hypergraph(3, sum(sizes), edges)
    _write(a.output, write_hg1(H))
    return EXIT_OK


def cmd_shadow(a) -> int:
    H = _load_host(a.input)
    _write(a.output, write_hg1(shadow(H, a.k)))
    return EXIT_OK


def cmd_copies(a) -> int:
    H = _load_host(a.input)
    if H.r == 2:
        C = enumerate_kst(H, a.s, a.t, budget=a.budget or 10**6)
    else:
        C = enumerate_expansion_copies(H, a.s, a.t, budget=a.budget or 10**6)
    _write(a.output, C.to_text())
    if a.output not in (None, "-"):
        sys.stdout.write(f"copies {len(C)}\n")
    return EXIT_OK


def cmd_regularize(a) -> int:
    H = _load_host(a.input)
    H3, P = restrict_tripartite(H, seed=a.seed)
    R = regularize(H3, P, a.lam, a.max_rounds)
    _write(a.output, write_hg1(R.subgraph))
    log = R.log_text()
    if a.report:
        Path(a.report).write_text(log)
    elif a.output not in (None, "-"):
        sys.stdout.write(log)
    return EXIT_OK if R.regular else EXIT_FLAGGED


def _pipeline_params(a) -> PipelineParams:
    kw = dict(
        s=a.s,
        t=a.t,
        k0=a.k0,
        delta=a.delta,
        log_exponents=_log_exponents(a.log_exponent),
        permissive=a.permissive,
        depth=a.depth,
    )
    if a.ell is not None:
        kw["ell"] = a.ell
    if a.budget is not None:
        kw["budget"] = a.budget
    if a.sparse_params:
        kw["sparse_params"] = a.sparse_params
    return PipelineParams(**kw)


def cmd_supersat(a) -> int:
    H = _load_host(a.input)
    res = run_pipeline(H, _pipeline_params(a), seed=a.seed)
    _write(a.output, res.collection.to_text())
    text = res.report_json()
    if a.report:
        Path(a.report).write_text(text)
    elif a.output not in (None, "-"):
        sys.stdout.write(text)
    return EXIT_FLAGGED if res.flagged else EXIT_OK


def cmd_certify(a) -> int:
    H = _load_host(a.host)
    try:
        C = CopyCollection.from_text(_read(a.collection), H)
    except FormatError as exc:
        raise CliError(f"{a.collection}: {exc}") from exc
    try:
        spec = json.loads(_read(a.params))
    except json.JSONDecodeError as exc:
        raise CliError(f"{a.params}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    p = spec.get("params", spec)
    try:
        s, t, n, k, ell = int(p["s"]), int(p["t"]), float(p["n"]), float(p["k"]), float(p["ell"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"{a.params}: parameter file needs numeric s, t, n, k, ell") from exc
    depth = int(p.get("depth", 3))
    thr = p.get("gamma_threshold")
    thr = None if thr in (None, "None") else float(thr)
    tau = tau_technical(ell, k, n, s, t).value
    cert = certify(H, C, tau, depth, thr)
    _write(a.output, _dump(cert.as_dict()))
    return EXIT_OK if cert.status in ("pass", "report-only") else EXIT_FLAGGED


def cmd_params(a) -> int:
    rep = thresholds(a.s, a.t, a.r)
    if a.k is not None and a.n is not None:
        cfg = FormulaConfig(k0=a.k0, delta=a.delta)
        d = rep.as_dict()
        d["select_ell"] = select_ell(a.k, a.n, a.s, a.t, cfg).report()
        tau = tau_technical(d["select_ell"]["ell"], a.k, a.n, a.s, a.t)
        d["tau_technical"] = {"value": tau.value, "term": tau.term}
        text = _dump(d) if a.format in (None, "json") else "".join(f"{k}  {v}\n" for k, v in sorted(d.items()))
    else:
        text = rep.to_json() if a.format in (None, "json") else rep.to_text()
    _write(a.output, text)
    return EXIT_OK


def cmd_experiment(a) -> int:
    ns = [int(x) for x in a.n.split(",")]
    ps = [float(x) for x in a.p.split(",")]
    recs, summary = run_experiment(ns, ps, a.s, a.t, a.r, a.trials, a.seed, a.budget or 10**6, not a.no_ex)
    if a.format == "json":
        _write(a.output, _dump([r.__dict__ for r in recs]))
    else:
        _write(a.output, records_csv(recs))
    if a.summary:
        Path(a.summary).write_text(summary_json(summary))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--format", choices=("json", "csv", "text"), default=None)
    common.add_argument("--delta", type=float, default=1e-3)
    common.add_argument("--ell", type=float, default=None)
    common.add_argument("--k0", type=float, default=1.0)
    common.add_argument("--log-exponent", action="append", metavar="NAME=VALUE")
    common.add_argument("--budget", type=int, default=None)
    common.add_argument("--permissive", action="store_true")
    common.add_argument("-o", "--output", default=None)

    ap = argparse.ArgumentParser(prog="kstexp", description="K_{s,t} expansion supersaturation toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a hypergraph (HG1)")
    g.add_argument("--kind", choices=("gnp", "complete", "tripartite", "random-tripartite"), default="gnp")
    g.add_argument("-n", type=int, default=10)
    g.add_argument("-r", type=int, default=3)
    g.add_argument("-p", type=float, default=0.5)
    g.add_argument("--parts", default=None, help="a,b,c part sizes")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("shadow", parents=[common], help="k-shadow of an HG1 file")
    s.add_argument("input")
    s.add_argument("-k", type=int, default=2)
    s.set_defaults(func=cmd_shadow)

    c = sub.add_parser("copies", parents=[common], help="enumerate K_{s,t} or K_{s,t}^{(r)} copies")
    c.add_argument("input")
    c.add_argument("--s", type=int, required=True)
    c.add_argument("--t", type=int, required=True)
    c.set_defaults(func=cmd_copies)

    r = sub.add_parser("regularize", parents=[common], help="tripartite restriction and regularization")
    r.add_argument("input")
    r.add_argument("--lam", type=float, default=2.0)
    r.add_argument("--max-rounds", type=int, default=50)
    r.add_argument("--report", default=None)
    r.set_defaults(func=cmd_regularize)

    p = sub.add_parser("supersat", parents=[common], help="run the full construction and certificate")
    p.add_argument("input")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--sparse-params", choices=("desk", "formula"), default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_supersat)

    v = sub.add_parser("certify", parents=[common], help="re-verify a collection against its host")
    v.add_argument("--host", required=True)
    v.add_argument("--collection", required=True)
    v.add_argument("--params", required=True, help="pipeline report or JSON with s, t, n, k, ell")
    v.set_defaults(func=cmd_certify)

    q = sub.add_parser("params", parents=[common], help="exponent report")
    q.add_argument("--s", type=int, required=True)
    q.add_argument("--t", type=int, required=True)
    q.add_argument("--r", type=int, default=3)
    q.add_argument("--k", type=float, default=None)
    q.add_argument("-n", type=float, default=None)
    q.set_defaults(func=cmd_params)

    e = sub.add_parser("experiment", parents=[common], help="random Turán experiment grid")
    e.add_argument("-n", default="10", help="comma-separated n values")
    e.add_argument("-p", default="0.1", help="comma-separated p values")
    e.add_argument("--s", type=int, default=2)
    e.add_argument("--t", type=int, default=2)
    e.add_argument("--r", type=int, default=3)
    e.add_argument("--trials", type=int, default=5)
    e.add_argument("--summary", default=None)
    e.add_argument("--no-ex", action="store_true")
    e.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    try:
        return a.func(a)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except KstError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except BrokenPipeError:
        # reader closed early (e.g. piped into head); silence the flush at exit
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
