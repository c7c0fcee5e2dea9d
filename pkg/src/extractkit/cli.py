"""Command-line front end. Every run writes <command>.json and <command>.csv
side by side into --out and exits nonzero on a failed certificate."""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .errors import DomainError, ExtractKitError
from .seqspace import BlockDecomposition

COMMANDS = ("extract-point", "extract-graph", "flatten", "approximate", "invariants", "negative-demo")


@dataclass(frozen=True)
class RunConfig:
    dim: int = 64
    seed: int = 0
    corpus: int = 1000
    eps_base: float = 0.1
    delta: float = 0.1
    tol_fp: float = 1e-10
    tol_rank: float = 1e-6
    out: str = "."

    def validate(self) -> "RunConfig":
        if self.dim <= 0 or self.dim % 4:
            raise DomainError(f"dim must be a positive multiple of 4, got {self.dim}", clause="cli.config")
        for name in ("eps_base", "delta", "tol_fp", "tol_rank"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive", clause="cli.config")
        if self.corpus <= 0:
            raise DomainError("corpus must be positive", clause="cli.config")
        BlockDecomposition.standard(self.dim)
        return self

    @property
    def decomp(self) -> BlockDecomposition:
        return BlockDecomposition.standard(self.dim)


def read_config(path: str | Path) -> dict[str, str]:
    """Flat key = value file; '#' starts a comment."""
    cp = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",))
    cp.read_string("[run]\n" + Path(path).read_text())
    return {k.replace("-", "_"): v for k, v in cp["run"].items()}


def build_config(args: argparse.Namespace) -> RunConfig:
    types = {f.name: f.type for f in fields(RunConfig)}
    cast = {"int": int, "float": float, "str": str}
    cfg = RunConfig()
    if args.config:
        raw = read_config(args.config)
        unknown = set(raw) - set(types)
        if unknown:
            raise DomainError(f"unknown config keys {sorted(unknown)}", clause="cli.config")
        cfg = replace(cfg, **{k: cast[types[k]](v) for k, v in raw.items()})
    flags = {k: v for k, v in vars(args).items() if k in types and v is not None}
    return replace(cfg, **flags).validate()


def _write(out: Path, name: str, payload: dict, header: list[str], rows: list[list]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{name}.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    with open(out / f"{name}.csv", "w", newline="") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        w.writerow(header)
        w.writerows(rows)


def _table(records: list[dict]) -> tuple[list[str], list[list]]:
    header = list(records[0]) if records else []
    return header, [[r[k] for k in header] for r in records]


def cmd_extract_point(cfg: RunConfig) -> tuple[dict, list[str], list[list], bool]:
    from .demos import point_trajectory

    rows = point_trajectory(cfg.dim)
    ok = all(r["displacement"] == 0.0 for r in rows if r["t"] >= 1) and \
        all(r["roundtrip"] <= 1e-8 for r in rows)
    header, table = _table(rows)
    return {"trajectory": rows, "ok": ok}, header, table, ok


def cmd_extract_graph(cfg: RunConfig):
    from .demos import graph_demo

    G, rows = graph_demo(cfg.dim, cfg.delta, seed=cfg.seed)
    disp = max(r["displacement"] for r in rows)
    rt = max(r["roundtrip"] for r in rows)
    ok = disp <= cfg.delta and rt <= 1e-7
    summary = {"delta": cfg.delta, "max_displacement": disp, "max_roundtrip": rt, "ok": ok}
    header, table = _table(rows)
    return {"summary": summary, "samples": rows}, header, table, ok


def cmd_flatten(cfg: RunConfig):
    from .demos import flatten_table, graph_demo

    G, _ = graph_demo(cfg.dim, cfg.delta, n_probe=0, seed=cfg.seed)
    rows = flatten_table(G, seed=cfg.seed)
    ok = all(r["ok"] for r in rows)
    header, table = _table(rows)
    return {"clauses": rows, "ok": ok}, header, table, ok


def cmd_approximate(cfg: RunConfig):
    from .demos import abs_map, data_corpus, linear_eps
    from .smoothing import PipelineConfig, compose_pipeline

    X = data_corpus(cfg.decomp, cfg.corpus, cfg.seed)
    _, report = compose_pipeline(abs_map(2), linear_eps(cfg.eps_base), X,
                                 PipelineConfig(dim=cfg.dim, seed=cfg.seed, tau_rank=cfg.tol_rank),
                                 cfg.decomp)
    s = report.summary()
    ok = s["max_err_ratio"] <= 1 and s["max_phi_ratio"] <= 0.5 and s["min_sigma"] >= cfg.tol_rank \
        and s["outside_cover"] == 0
    header = ["sample_id", "err", "eps_budget", "sigma_min", "verdict"]
    return report.to_json(), header, report.rows(), ok


def cmd_invariants(cfg: RunConfig):
    from .demos import invariant_suites

    suites = invariant_suites(cfg.dim, cfg.seed, tau_fp=cfg.tol_fp, tau_rank=cfg.tol_rank)
    ok = all(s["passed"] for s in suites.values())
    rows = [[name, check, passed] for name, s in suites.items() for check, passed in s["checks"].items()]
    return {"suites": suites, "ok": ok}, ["suite", "check", "passed"], rows, ok


def cmd_negative_demo(cfg: RunConfig):
    from .smoothing import negative_demo

    res = negative_demo(cfg.dim, tau_rank=cfg.tol_rank, seed=cfg.seed)
    rows = [[t] for t in res["sign_changes"]]
    return res, ["sign_change_t"], rows, res["obstruction"]


HANDLERS = {
    "extract-point": cmd_extract_point,
    "extract-graph": cmd_extract_graph,
    "flatten": cmd_flatten,
    "approximate": cmd_approximate,
    "invariants": cmd_invariants,
    "negative-demo": cmd_negative_demo,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dim", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--corpus", type=int, help="corpus size")
    common.add_argument("--eps-base", type=float, dest="eps_base")
    common.add_argument("--delta", type=float, help="displacement budget for graph demos")
    common.add_argument("--tol-fp", type=float, dest="tol_fp")
    common.add_argument("--tol-rank", type=float, dest="tol_rank")
    common.add_argument("--out", help="report directory")
    common.add_argument("--config", help="key = value file; flags override it")
    p = argparse.ArgumentParser(prog="extractkit", description="Smooth extraction and approximation demos.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out or ".")
    name = args.command.replace("-", "_")
    try:
        cfg = build_config(args)
        out = Path(cfg.out)
        payload, header, rows, ok = HANDLERS[args.command](cfg)
    except ExtractKitError as exc:
        rec = {"command": args.command, **exc.record()}
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.error.json").write_text(json.dumps(rec, indent=2, sort_keys=True) + "\n")
        print(json.dumps(rec, sort_keys=True), file=sys.stderr)
        return 1
    payload = {"command": args.command, "config": asdict(cfg), "result": payload}
    _write(out, name, payload, header, rows)
    print(json.dumps({"command": args.command, "ok": ok}))
    if not ok:
        rec = {"command": args.command, "error": "CertificateFailure", "clause": f"cli.{name}",
               "stage": None, "message": "a certificate failed; see the report"}
        print(json.dumps(rec, sort_keys=True), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
