"""Command-line front end.

Exit status: 0 when every claim passes, 1 when any claim fails, 2 on a
configuration or runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

from . import suites
from .cost import parse_cost
from .crosscurv import CLAIMS, SamplerSpec
from .errors import CclabError, DomainError
from .manifold import parse_manifold
from .reports import emit_csv, reports_to_json

DEFAULT_SEED = 42
REPORT_COLUMNS = ["claim", "pass", "polarity", "min_value", "max_value", "n_samples", "tolerance"]


@dataclass
class RunConfig:
    command: str
    suite: str
    manifold: str = "S2"
    cost: str = "half-square"
    claim: str = "NonNegCross"
    samples: int | None = None
    seed: int = DEFAULT_SEED
    grid: tuple = (48, 24, 24)
    factors: tuple = ("S2", "S2")
    total: str = "S3"
    base: str = "CP1"
    dim: int = 1
    json_path: str | None = None
    csv_path: str | None = None
    threads: int = 1
    quick: bool = False
    extra: dict = field(default_factory=dict)


def default_seed():
    env = os.environ.get("CCLAB_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise DomainError(f"CCLAB_SEED must be an integer, got {env!r}") from None


def _grid(text):
    try:
        parts = tuple(int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 48x24x24, got {text!r}") from None
    if len(parts) != 3 or min(parts) < 1:
        raise argparse.ArgumentTypeError(f"grid needs three positive sizes, got {text!r}")
    return parts


CLAIM_ALIASES = {"nonneg": "NonNegCross", "a3w": "A3w", "a3s": "A3s", "almost-positive": "AlmostPositive"}


def _claim(text):
    claim = CLAIM_ALIASES.get(text.lower(), text)
    if claim not in CLAIMS:
        raise argparse.ArgumentTypeError(f"unknown claim {text!r}")
    return claim


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default 42, or CCLAB_SEED)")
    common.add_argument("--samples", type=_positive, default=None, help="sample or configuration count")
    common.add_argument("--json", dest="json_path", default=None, help="write reports as JSON")
    common.add_argument("--csv", dest="csv_path", default=None, help="write the scan grid or report table as CSV")
    common.add_argument("--threads", type=_positive, default=os.cpu_count() or 1)
    common.add_argument("--quick", action="store_true", help="reduced grids and sample counts")

    p = argparse.ArgumentParser(prog="cclab", description="Cross-curvature verification suites.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a verification suite")
    vs = v.add_subparsers(dest="suite", required=True)
    s = vs.add_parser("sphere", parents=[common], help="closed-form sphere cross-curvature")
    s.add_argument("--grid", type=_grid, default=(48, 24, 24), help="rho x theta x psi grid")
    c = vs.add_parser("cross", parents=[common], help="calibration and classification scan")
    c.add_argument("--manifold", default="S2")
    c.add_argument("--cost", default="half-square")
    c.add_argument("--claim", default="NonNegCross", type=_claim,
                   help="NonNegCross|A3w|A3s|AlmostPositive (aliases: nonneg, a3w, a3s, almost-positive)")
    pr = vs.add_parser("product", parents=[common], help="products of costs")
    pr.add_argument("--factors", default="S2,S2")
    sm = vs.add_parser("submersion", parents=[common], help="Hopf submersion comparison")
    sm.add_argument("--total", default="S3")
    sm.add_argument("--base", default="CP1")
    for name in ("dasm", "time-convexity"):
        d = vs.add_parser(name, parents=[common], help="sliding-mountain scenarios")
        d.add_argument("--manifold", default="S2")
        d.add_argument("--scenarios", type=_positive, default=None)
    vs.add_parser("all", parents=[common], help="every suite")

    ce = sub.add_parser("counterexample", help="exhibit a failure")
    cs = ce.add_subparsers(dest="suite", required=True)
    lp = cs.add_parser("log-product", parents=[common], help="negative cross for a product of log costs")
    lp.add_argument("--dim", type=_positive, default=1)
    return p


def config_from_args(ns) -> RunConfig:
    seed = ns.seed if ns.seed is not None else default_seed()
    cfg = RunConfig(command=ns.command, suite=ns.suite, seed=seed, samples=ns.samples,
                    json_path=ns.json_path, csv_path=ns.csv_path, threads=ns.threads, quick=ns.quick)
    if ns.suite == "sphere":
        cfg.grid = ns.grid
    if ns.suite == "cross":
        cfg.manifold, cfg.cost, cfg.claim = ns.manifold, ns.cost, ns.claim
        parse_cost(cfg.cost, parse_manifold(cfg.manifold))
    if ns.suite == "product":
        cfg.factors = tuple(f.strip() for f in ns.factors.split(",") if f.strip())
        for f in cfg.factors:
            parse_manifold(f)
        if len(cfg.factors) < 2:
            raise DomainError("a product needs at least two factors")
    if ns.suite == "submersion":
        cfg.total, cfg.base = ns.total, ns.base
        t, b = parse_manifold(ns.total), parse_manifold(ns.base)
        if not (b.name.startswith("CP") and t.name.startswith("S") and t.dim == b.dim + 1):
            raise DomainError(f"only Hopf submersions S(2m+1) -> CP(m) are built in, got {t.name} -> {b.name}")
    if ns.suite in ("dasm", "time-convexity"):
        cfg.manifold = ns.manifold
        parse_manifold(cfg.manifold)
        if ns.scenarios is not None:
            cfg.samples = ns.scenarios
    if ns.suite == "log-product":
        cfg.dim = ns.dim
    return cfg


def execute(cfg: RunConfig):
    """Run the configured suite; returns (reports, csv rows, csv columns)."""
    n, q = cfg.samples, cfg.quick
    if cfg.suite == "sphere":
        grid = (12, 8, 8) if q and cfg.grid == (48, 24, 24) else cfg.grid
        reports, rows = suites.sphere_suite(grid, n or (40 if q else 200), cfg.seed,
                                            (200, 41) if q else (1000, 41), threads=cfg.threads)
        return reports, rows, suites.SPHERE_COLUMNS
    if cfg.suite == "cross":
        spec = SamplerSpec(n_pairs=n or (6 if q else 20), n_directions=3 if q else 5, seed=cfg.seed,
                           threads=cfg.threads)
        reports = suites.cross_suite(cfg.manifold, cfg.cost, cfg.claim, spec)
    elif cfg.suite == "product":
        reports = suites.product_suite(cfg.factors, n or (20 if q else 100), cfg.seed, q, cfg.threads)
    elif cfg.suite == "submersion":
        m = parse_manifold(cfg.base).dim // 2
        reports = suites.submersion_suite(m, n or (10 if q else 50), cfg.seed, q, cfg.threads)
    elif cfg.suite in ("dasm", "time-convexity"):
        which = ("dasm",) if cfg.suite == "dasm" else ("time_convexity",)
        reports = suites.convexity_suite(cfg.manifold, n or (10 if q else 200), cfg.seed, cfg.threads, which)
    elif cfg.suite == "all":
        reports = suites.all_suite(cfg.seed, q, cfg.threads)
    elif cfg.suite == "log-product":
        reports = suites.counterexample_suite(cfg.dim, cfg.seed, sweep=n or (20 if q else 500))
    else:
        raise DomainError(f"unknown suite {cfg.suite!r}")
    rows = [{k: r.as_dict()[k] for k in REPORT_COLUMNS} for r in reports]
    return reports, rows, REPORT_COLUMNS


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    reports, rows, columns = execute(cfg)
    for r in reports:
        print(r.summary(), file=out)
    if cfg.json_path:
        reports_to_json(reports, cfg.json_path)
    if cfg.csv_path:
        emit_csv(rows, columns, cfg.csv_path)
    return 0 if all(r.passed for r in reports) else 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    try:
        return run(config_from_args(ns))
    except (CclabError, ValueError, ArithmeticError, RuntimeError, OSError) as e:
        print(f"cclab: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
