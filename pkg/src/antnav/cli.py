"""Command-line entry point: ``antnav {solve-tsp,cycle,bench,fetch,distances}``.

Exit codes: 0 success, 2 usage / I/O / auth, 3 input too small for a cycle,
4 optimum catalog miss, 5 upstream API failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import replace
from datetime import date, datetime, timezone
from pathlib import Path

from . import __version__
from .aco import SolverConfig, cycle_corpus, run
from .bench import MIN_SEEDS, compare, run_benchmark
from .corpus import CorpusError, dump_corpus, load_corpus, window_corpus
from .guardian import API_KEY_ENV, DEFAULT_BASE_URL, ApiQuery, AuthError, GuardianError, fetch_articles
from .qanalysis import POLICIES, build_incidence, distance_matrix
from .report import cycle_dot, cycle_html
from .tsp import TsplibError, bundled_instance_path, load_catalog, load_tsplib

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("antnav")

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_CATALOG, EXIT_UPSTREAM = 0, 2, 3, 4, 5

# flag dest -> SolverConfig field
SOLVER_FLAGS = {
    "ants": "ants", "alpha": "alpha", "beta": "beta", "gamma": "gamma",
    "rho_pos": "rho_pos", "rho_neg": "rho_neg", "q0": "q0",
    "neg_deposit": "neg_deposit", "tau_neg_max": "tau_neg_max",
    "iters": "iterations", "seed": "seed", "baseline": "baseline", "evaporation": "evaporation", "workers": "workers",
}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


# --------------------------------------------------------------------------- helpers


def _digest(path: Path) -> str:
    return "sha256:" + hashlib.sha256(path.read_bytes()).hexdigest()


def _read_config_file(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    try:
        with p.open("rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read config file {p}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise CliError(f"bad config file {p}: {exc}") from None
    return {k.replace("-", "_"): v for k, v in raw.items()}


def _solver_config(args, file_cfg: dict, **defaults) -> SolverConfig:
    """Flags override the config file, which overrides defaults."""
    values = dict(defaults)
    for dest, fld in SOLVER_FLAGS.items():
        if dest in file_cfg:
            values[fld] = file_cfg[dest]
        elif fld in file_cfg:
            values[fld] = file_cfg[fld]
        flag = getattr(args, dest, None)
        if flag is not None:
            values[fld] = flag
    try:
        return SolverConfig(**values)
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid solver configuration: {exc}") from None


def _setting(args, file_cfg: dict, name: str, default=None):
    flag = getattr(args, name, None)
    if flag is not None:
        return flag
    return file_cfg.get(name, default)


def _resolve_instance(spec: str) -> Path:
    p = Path(spec)
    if p.is_file():
        return p
    if os.sep not in spec:
        try:
            return bundled_instance_path(spec)
        except FileNotFoundError:
            pass
    raise CliError(f"cannot read instance file {p}")


def _load_instance(spec: str):
    path = _resolve_instance(spec)
    try:
        return path, load_tsplib(path)
    except (TsplibError, ValueError) as exc:
        raise CliError(f"{path}: {exc}") from None


def _out_dir(args) -> Path:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {out}: {exc.strerror}") from None
    return out


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)


def _write_manifest(out: Path, subcommand: str, config: dict, inputs: list[Path], seed) -> None:
    manifest = {
        "subcommand": subcommand,
        "config": config,
        "inputs": {str(p): _digest(p) for p in inputs},
        "seed": seed,
        "version": __version__,
        "created": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    }
    _write(out / "manifest.json", json.dumps(manifest, indent=2) + "\n")


def _parse_day(text: str | None, flag: str):
    if text is None:
        return None
    try:
        return date.fromisoformat(str(text))
    except ValueError:
        raise CliError(f"{flag} expects YYYY-MM-DD, got {text!r}") from None


# --------------------------------------------------------------------------- commands


def cmd_solve_tsp(args) -> int:
    file_cfg = _read_config_file(args.config)
    path, inst = _load_instance(args.input)
    if inst.n < 3:
        raise CliError(f"{path}: a tour needs at least 3 cities, got {inst.n}", EXIT_INFEASIBLE)
    cfg = _solver_config(args, file_cfg).resolved(inst.n)
    target = _setting(args, file_cfg, "target")
    if target is not None:
        cfg = replace(cfg, target=float(target))
    result = run(inst, cfg)
    out = _out_dir(args)
    _write(out / "result.json", result.dumps() + "\n")
    _write(out / "trace.csv", result.trace_csv())
    _write_manifest(out, "solve-tsp", cfg.to_json(), [path], cfg.seed)
    print(f"{inst.name}: best length {result.best.length:g} after {result.iterations_run} iterations")
    return EXIT_OK


def _load_windowed_corpus(args, file_cfg):
    path = Path(args.corpus)
    try:
        corpus = load_corpus(path, args.format)
    except CorpusError as exc:
        raise CliError(str(exc)) from None
    if corpus.dropped:
        log.warning("dropped %d document(s) without keywords", len(corpus.dropped))
    start = args.from_ if args.from_ is not None else file_cfg.get("from")
    end = _setting(args, file_cfg, "to")
    if start is not None or end is not None:
        if start is None or end is None:
            raise CliError("--from and --to must be given together")
        try:
            corpus = window_corpus(corpus, _parse_day(start, "--from"), _parse_day(end, "--to"))
        except CorpusError as exc:
            raise CliError(str(exc)) from None
    return path, corpus


def cmd_cycle(args) -> int:
    file_cfg = _read_config_file(args.config)
    path, corpus = _load_windowed_corpus(args, file_cfg)
    if len(corpus) < 3:
        raise CliError(f"a reading cycle needs at least 3 documents, have {len(corpus)}",
                       EXIT_INFEASIBLE)
    policy = _setting(args, file_cfg, "policy", "mean")
    if policy not in POLICIES:
        raise CliError(f"unknown policy {policy!r}")
    matrix = distance_matrix(build_incidence(corpus), policy)
    cfg = _solver_config(args, file_cfg).resolved(len(corpus))
    cycle = cycle_corpus(matrix, cfg)
    out = _out_dir(args)
    payload = cycle.to_json()
    payload["policy"] = policy
    payload["cap"] = matrix.cap
    _write(out / "cycle.json", json.dumps(payload, indent=2) + "\n")
    _write(out / "cycle.dot", cycle_dot(cycle, corpus))
    _write(out / "cycle.html", cycle_html(cycle, corpus))
    conf = cfg.to_json() | {"policy": policy, "from": args.from_, "to": args.to}
    _write_manifest(out, "cycle", conf, [path], cfg.seed)
    print(f"cycle over {len(cycle.ids)} documents, coherence {cycle.coherence:.4f}")
    return EXIT_OK


def _resolve_target(args, file_cfg, inst_name: str) -> float:
    target = _setting(args, file_cfg, "target")
    pct = _setting(args, file_cfg, "target_pct")
    if target is not None and pct is not None:
        raise CliError("give either --target or --target-pct, not both")
    if target is None and pct is None:
        raise CliError("a target is required: --target LENGTH, --target best-known or --target-pct P")
    if target is not None and str(target) != "best-known":
        try:
            value = float(target)
        except ValueError:
            raise CliError(f"--target expects a length or 'best-known', got {target!r}") from None
        if value <= 0:
            raise CliError("--target must be positive")
        return value
    catalog = load_catalog(args.catalog)
    if inst_name not in catalog:
        raise CliError(f"instance {inst_name!r} is not in the optimum catalog", EXIT_CATALOG)
    best = catalog[inst_name]
    return best if pct is None else best * (1 + float(pct) / 100)


def cmd_bench(args) -> int:
    file_cfg = _read_config_file(args.config)
    n_seeds = int(_setting(args, file_cfg, "seeds", 20))
    if n_seeds < MIN_SEEDS:
        raise CliError(f"--seeds must be at least {MIN_SEEDS}, got {n_seeds}")
    path, inst = _load_instance(args.input)
    if inst.n < 3:
        raise CliError(f"{path}: a tour needs at least 3 cities, got {inst.n}", EXIT_INFEASIBLE)
    target = _resolve_target(args, file_cfg, inst.name)
    variant = replace(_solver_config(args, file_cfg, iterations=2000), baseline=False)
    variant = variant.resolved(inst.n)
    baseline = variant.as_baseline()
    seed_base = int(_setting(args, file_cfg, "seed_base", 1))
    seeds = list(range(seed_base, seed_base + n_seeds))
    rep_v, rep_b = run_benchmark(inst, variant, baseline, seeds, target)
    summary = compare(rep_v, rep_b)
    out = _out_dir(args)
    for rep in (rep_v, rep_b):
        _write(out / f"{inst.name}-{rep.arm}.json", json.dumps(rep.to_json(), indent=2) + "\n")
        for res in rep.results:
            (out / f"{inst.name}-{rep.arm}-{res.seed}.csv").write_text(res.trace_csv())
    _write(out / "comparison.json", summary.dumps() + "\n")
    conf = {"variant": variant.to_json(), "baseline": baseline.to_json(),
            "seeds": seeds, "target": target}
    _write_manifest(out, "bench", conf, [path], seeds)
    mi = summary.median_iterations
    print(f"{inst.name}: target {target:g}; median iterations variant={mi['variant']} "
          f"baseline={mi['baseline']}; sign test p={summary.sign_test_p:.4g}")
    return EXIT_OK


def _fixture_transport(path: Path):
    """Serve canned responses from a JSON file instead of the network.

    The file holds a list; entry ``k`` answers request ``k``. An entry is
    either a response envelope (served with status 200) or
    ``{"status": code, "body": envelope}``.
    """
    try:
        pages = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read fixture {path}: {exc}") from None
    calls = iter(pages)

    class _Resp:
        def __init__(self, status, body):
            self.status_code, self._body = status, body

        def json(self):
            return self._body

    def transport(url, params=None, timeout=None):
        entry = next(calls, {"status": 500, "body": None})
        if isinstance(entry, dict) and "status" in entry:
            return _Resp(entry["status"], entry.get("body"))
        return _Resp(200, entry)

    return transport


def cmd_fetch(args) -> int:
    api_key = args.api_key or os.environ.get(API_KEY_ENV)
    if not api_key:
        raise CliError(f"no API key: set {API_KEY_ENV} or pass --api-key")
    start, end = _parse_day(args.from_, "--from"), _parse_day(args.to, "--to")
    try:
        query = ApiQuery(start, end, api_key, args.section, args.page_size)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    transport = _fixture_transport(Path(args.fixture)) if args.fixture else None
    try:
        corpus = fetch_articles(query, transport, base_url=args.base_url,
                                max_pages=args.max_pages, backoff=args.backoff)
    except AuthError as exc:
        raise CliError(str(exc)) from None
    except GuardianError as exc:
        raise CliError(str(exc), EXIT_UPSTREAM) from None
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    dump_corpus(corpus, out, "jsonl")
    conf = {"from": str(start), "to": str(end), "section": args.section,
            "page_size": args.page_size, "base_url": args.base_url}
    inputs = [Path(args.fixture)] if args.fixture else []
    _write_manifest(out.parent, "fetch", conf, inputs, None)
    print(f"wrote {len(corpus)} documents to {out}")
    return EXIT_OK


def cmd_distances(args) -> int:
    file_cfg = _read_config_file(args.config)
    path, corpus = _load_windowed_corpus(args, file_cfg)
    if len(corpus) < 2:
        raise CliError(f"a distance matrix needs at least 2 documents, have {len(corpus)}",
                       EXIT_INFEASIBLE)
    policy = _setting(args, file_cfg, "policy", "mean")
    matrix = distance_matrix(build_incidence(corpus), policy)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fmt = args.output_format or ("json" if out.suffix == ".json" else "csv")
    _write(out, matrix.dumps() + "\n" if fmt == "json" else matrix.to_csv())
    _write_manifest(out.parent, "distances", {"policy": policy, "format": fmt}, [path], None)
    return EXIT_OK


# --------------------------------------------------------------------------- parser


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver")
    g.add_argument("--ants", type=int, help="ants per iteration (default: one per city)")
    g.add_argument("--alpha", type=float, help="positive-trail exponent (1)")
    g.add_argument("--beta", type=float, help="heuristic exponent (2)")
    g.add_argument("--gamma", type=float, help="negative-trail penalty exponent (1)")
    g.add_argument("--rho-pos", type=float, help="positive evaporation rate (0.1)")
    g.add_argument("--rho-neg", type=float, help="negative evaporation rate (0.05)")
    g.add_argument("--q0", type=float, help="exploitation probability (0.9)")
    g.add_argument("--neg-deposit", type=float, help="negative deposit per marked edge (1)")
    g.add_argument("--tau-neg-max", type=float, help="negative-trail ceiling (10)")
    g.add_argument("--iters", type=int, help="iterations")
    g.add_argument("--seed", type=int, help="master seed (0)")
    g.add_argument("--baseline", action="store_const", const=True,
                   help="plain ACS: ignore the negative trail")
    g.add_argument("--evaporation", choices=("acs", "global"),
                   help="positive evaporation on best-tour edges only (acs) or on all edges")
    g.add_argument("--workers", type=int, help="threads for ant construction (1)")
    g.add_argument("--config", help="TOML file of flat keys mirroring the flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="antnav", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-tsp", help="solve a TSPLIB instance")
    p.add_argument("--in", dest="input", required=True,
                   help="TSPLIB file, or the name of a bundled instance")
    p.add_argument("--target", type=float, help="stop once the best tour is this short")
    p.add_argument("--out", default="antnav-out")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve_tsp)

    def corpus_args(p):
        p.add_argument("--corpus", required=True, help="JSONL or CSV corpus file")
        p.add_argument("--format", choices=("jsonl", "csv"))
        p.add_argument("--from", dest="from_", help="window start date, inclusive")
        p.add_argument("--to", help="window end date, exclusive")
        p.add_argument("--policy", choices=POLICIES, help="eccentricity symmetrization (mean)")

    p = sub.add_parser("cycle", help="order a corpus into a reading cycle")
    corpus_args(p)
    p.add_argument("--out", default="antnav-out")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_cycle)

    p = sub.add_parser("bench", help="compare the negative trail against plain ACS")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--seeds", type=int, help=f"number of seeds, at least {MIN_SEEDS} (20)")
    p.add_argument("--seed-base", type=int, help="first seed (1)")
    p.add_argument("--target", help="target length or 'best-known'")
    p.add_argument("--target-pct", type=float, help="target = best-known * (1 + P/100)")
    p.add_argument("--catalog", help="CSV instance,best_known (default: bundled)")
    p.add_argument("--out", default="antnav-out")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fetch", help="download a corpus from the Guardian content API")
    p.add_argument("--from", dest="from_", required=True)
    p.add_argument("--to", required=True)
    p.add_argument("--section")
    p.add_argument("--page-size", type=int, default=50)
    p.add_argument("--max-pages", type=int)
    p.add_argument("--api-key", help=f"overrides ${API_KEY_ENV}")
    p.add_argument("--base-url", default=DEFAULT_BASE_URL)
    p.add_argument("--backoff", type=float, default=1.0, help="first retry delay in seconds")
    p.add_argument("--fixture", help="serve responses from this JSON file (offline testing)")
    p.add_argument("--out", default="corpus.jsonl")
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("distances", help="write the document distance matrix")
    corpus_args(p)
    p.add_argument("--output-format", choices=("csv", "json"))
    p.add_argument("--out", default="distances.csv")
    p.add_argument("--config")
    p.set_defaults(func=cmd_distances)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"antnav: error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"antnav: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
