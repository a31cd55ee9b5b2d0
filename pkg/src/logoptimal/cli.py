"""Command line interface.

Exit status: 0 on success, 1 on domain errors (infeasible, degenerate,
non-convergent, indeterminate), 2 on I/O and parse errors.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import io
from .divergence import cover_gap, distribution_regret, kl_divergence
from .dominance import basis_dominance_matrix, domination_margin, prune
from .errors import ConvergenceError, EmbeddingError, IndeterminateError, InfeasibleError, MarketError
from .gambling import classify_fairness, dutch_book, embed_ideal
from .logopt import solve
from .market import Market, empirical_distribution, uniform, wealth_trajectory
from .minimax import lower_bound_check, minimax_regret, saddle_check
from .sufficiency import characterization_crosscheck, injectivity_test, proportionality_test

LN2 = math.log(2.0)


class DomainError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    market: Optional[Path] = None
    dist_source: str = "uniform"  # file | inline | uniform | empirical | market
    dist: Optional[str] = None
    q: Optional[str] = None
    family: Optional[Path] = None
    constraints: Optional[Path] = None
    sequence: Optional[Path] = None
    portfolios: list[str] = field(default_factory=list)
    odds: Optional[str] = None
    seed: int = 0
    samples: int = 100
    fmt: str = "text"
    tol: Optional[float] = None
    weak: bool = False


def _plain(value):
    """JSON-friendly copy: arrays to lists, infinities to strings."""
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


def _text_value(v) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(_text_value(x) for x in v) + "]"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def render(report: dict, fmt: str) -> str:
    data = _plain(report)
    if fmt == "json":
        return json.dumps(data, indent=2)
    if fmt == "csv":
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["field", "value"])
        for key, v in data.items():
            writer.writerow([key, json.dumps(v) if isinstance(v, (list, dict)) else v])
        return buf.getvalue().rstrip("\n")
    width = max(len(k) for k in data) if data else 0
    return "\n".join(f"{k:<{width}}  {_text_value(v)}" for k, v in data.items())


def _load_vector(text: str, m: int) -> np.ndarray:
    path = Path(text)
    if path.exists():
        return io.read_distribution(path, m)
    p = io.parse_vector(text)
    if p.size != m:
        raise io.ParseError("argument", None, f"distribution has {p.size} entries, market has {m} outcomes")
    return io.normalize(p)


def _market(cfg: RunConfig) -> tuple[Market, Optional[np.ndarray]]:
    if cfg.market is None:
        raise io.ParseError("arguments", None, "--market is required")
    return io.read_market_csv(cfg.market)


def _distribution(cfg: RunConfig, market: Market, column: Optional[np.ndarray]) -> np.ndarray:
    if cfg.dist_source in ("file", "inline"):
        return _load_vector(cfg.dist, market.m)
    if cfg.dist_source == "empirical":
        return np.asarray(empirical_distribution(io.read_sequence(cfg.sequence, market), market.m))
    if cfg.dist_source == "market" and column is not None:
        return column
    return np.asarray(uniform(market.m))


def _growth_fields(growth: float) -> dict:
    return {"growth_nats": growth, "doubling_rate_bits": growth / LN2}


def cmd_solve(cfg: RunConfig) -> dict:
    market, column = _market(cfg)
    p = _distribution(cfg, market, column)
    constraints = io.read_constraints(cfg.constraints, market.k) if cfg.constraints else None
    rep = solve(market, p, constraints)
    return {
        "assets": list(market.asset_names),
        "portfolio": rep.portfolio,
        **_growth_fields(rep.growth),
        "kkt_residual": rep.kkt_residual,
        "iterations": rep.iterations,
        "unique": rep.unique,
    }


def cmd_regret(cfg: RunConfig) -> dict:
    market, column = _market(cfg)
    p = _distribution(cfg, market, column)
    if cfg.q is None:
        raise io.ParseError("arguments", None, "--q is required")
    q = _load_vector(cfg.q, market.m)
    regret = distribution_regret(market, p, q)
    div = kl_divergence(p, q)
    try:
        gap = cover_gap(market, p, q)
    except IndeterminateError as exc:
        raise DomainError(str(exc)) from exc
    return {"p": p, "q": q, "regret": regret, "divergence": div, "cover_gap": gap}


def cmd_dominance(cfg: RunConfig) -> dict:
    market, _ = _market(cfg)
    margins = [domination_margin(market, i)[0] for i in range(market.k)]
    return {
        "assets": list(market.asset_names),
        "basis_dominance": basis_dominance_matrix(market).tolist(),
        "domination_margin": margins,
        "strictly_dominated": [market.asset_names[i] for i, mg in enumerate(margins) if mg > 1e-10],
    }


def cmd_prune(cfg: RunConfig) -> dict:
    market, _ = _market(cfg)
    res = prune(market, weak=cfg.weak)
    return {
        "kept": list(res.market.asset_names),
        "removed": [market.asset_names[i] for i in res.removed],
        "weakly_dominated": [market.asset_names[i] for i in res.weakly_dominated],
        "pruned_market": res.market.price_relatives.tolist(),
    }


def _fairness_fields(odds) -> dict:
    fairness, total = classify_fairness(odds)
    book = dutch_book(odds)
    return {
        "fairness": fairness,
        "inverse_odds_sum": total,
        "dutch_book": None if book is None else book[0],
        "guaranteed_relative": None if book is None else book[1],
    }


def cmd_embed(cfg: RunConfig) -> dict:
    market, _ = _market(cfg)
    try:
        emb = embed_ideal(market)
    except EmbeddingError as exc:
        raise DomainError(str(exc)) from exc
    return {
        "outcomes": list(market.outcome_names),
        "odds": emb.odds,
        "weights": {name: emb.weights[i] for i, name in enumerate(market.asset_names)},
        **_fairness_fields(emb.odds),
    }


def cmd_fairness(cfg: RunConfig) -> dict:
    if cfg.odds is not None:
        odds = io.parse_vector(cfg.odds, "--odds")
    else:
        market, _ = _market(cfg)
        try:
            odds = embed_ideal(market).odds
        except EmbeddingError as exc:
            raise DomainError(str(exc)) from exc
    return {"odds": odds, **_fairness_fields(odds)}


def cmd_minimax(cfg: RunConfig) -> dict:
    market, _ = _market(cfg)
    if cfg.family is None:
        raise io.ParseError("arguments", None, "--family is required")
    family = io.read_family(cfg.family, market.m)
    rep = minimax_regret(market, family)
    bound = lower_bound_check(market, family, rep.worst_mixture, rep)
    saddle = saddle_check(market, family, rep.robust_portfolio, rep)
    return {
        "value": rep.value,
        "robust_portfolio": rep.robust_portfolio,
        "worst_mixture": rep.worst_mixture,
        "barycenter": rep.barycenter,
        "duality_gap": rep.duality_gap,
        "lower_bound": bound.bound,
        "lower_bound_holds": bound.holds,
        "saddle_sup_regret": saddle.sup_regret,
        "saddle_holds": saddle.holds,
    }


def cmd_sufficiency(cfg: RunConfig) -> dict:
    market, _ = _market(cfg)
    kwargs = {"tol": cfg.tol} if cfg.tol is not None else {}
    verdict = proportionality_test(market, sample_count=cfg.samples, seed=cfg.seed, **kwargs)
    cross = characterization_crosscheck(market, seed=cfg.seed, sample_count=cfg.samples)
    inj = injectivity_test(market, sample_count=cfg.samples, seed=cfg.seed)
    ce = verdict.counterexample
    return {
        "proportional": verdict.proportional,
        "degenerate": verdict.degenerate,
        "constant_c": verdict.constant_c,
        "samples_tested": verdict.samples_tested,
        "counterexample_p": None if ce is None else ce.p,
        "counterexample_q": None if ce is None else ce.q,
        "counterexample_regret": None if ce is None else ce.regret,
        "counterexample_divergence": None if ce is None else ce.divergence,
        "kelly_odds": None if cross.kelly_odds is None else cross.kelly_odds,
        "crosscheck_agree": cross.agree,
        "injective": inj.injective,
        "injectivity_equivalence_applies": inj.equivalence_applies,
    }


def _parse_portfolio(text: str, k: int, n: int) -> tuple[str, np.ndarray]:
    label, _, weights = text.rpartition("=")
    b = io.parse_vector(weights, "--portfolio")
    if b.size != k:
        raise io.ParseError("--portfolio", None, f"portfolio has {b.size} weights, market has {k} assets")
    return (label or f"portfolio{n}"), io.normalize(b, "--portfolio")


def cmd_simulate(cfg: RunConfig) -> list[tuple[int, str, float]]:
    market, _ = _market(cfg)
    if cfg.sequence is None:
        raise io.ParseError("arguments", None, "--sequence is required")
    outcomes = io.read_sequence(cfg.sequence, market)
    books = [_parse_portfolio(s, market.k, n) for n, s in enumerate(cfg.portfolios)]
    if not books:
        if outcomes:
            books.append(("log-optimal", solve(market, empirical_distribution(outcomes, market.m)).portfolio))
        books.append(("uniform", uniform(market.k)))
    rows = []
    for label, b in books:
        rows.append((0, label, 1.0))
        rows += [(n, label, float(w)) for n, w in enumerate(wealth_trajectory(market, b, outcomes), start=1)]
    return rows


def render_simulation(rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{"step": s, "portfolio": lab, "wealth": w} for s, lab, w in rows], indent=2)
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["step", "portfolio", "wealth"])
    writer.writerows((s, lab, repr(w)) for s, lab, w in rows)
    return buf.getvalue().rstrip("\n")


COMMANDS = {
    "solve": cmd_solve,
    "regret": cmd_regret,
    "dominance": cmd_dominance,
    "prune": cmd_prune,
    "embed": cmd_embed,
    "fairness": cmd_fairness,
    "minimax": cmd_minimax,
    "sufficiency": cmd_sufficiency,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logoptimal", description="Log-optimal portfolio analysis")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--market", type=Path, help="market CSV: outcome,<assets...>[,prob]")
    src = parser.add_mutually_exclusive_group()
    src.add_argument("--dist", help="distribution file, or inline comma-separated probabilities")
    src.add_argument("--uniform", action="store_true", help="uniform distribution over outcomes")
    src.add_argument("--sequence", type=Path, help="outcome sequence file (empirical distribution)")
    parser.add_argument("--q", help="second distribution (file or inline)")
    parser.add_argument("--family", type=Path, help="family file, one distribution per row")
    parser.add_argument("--constraints", type=Path, help="constraint CSV rows c_1..c_k,bound")
    parser.add_argument("--portfolio", action="append", default=[], help="LABEL=w1,w2,... (simulate; repeatable)")
    parser.add_argument("--odds", help="comma-separated odds (fairness)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--samples", type=int, default=100)
    parser.add_argument("--format", dest="fmt", choices=("json", "csv", "text"), default="text")
    parser.add_argument("--tol", type=float, help="relative tolerance for the proportionality test")
    parser.add_argument("--weak", action="store_true", help="prune weakly dominated assets too")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.seed < 0:
        raise io.ParseError("--seed", None, "seed must be nonnegative")
    if args.dist is not None:
        source = "file" if Path(args.dist).exists() else "inline"
    elif args.uniform:
        source = "uniform"
    elif args.sequence is not None and args.command != "simulate":
        source = "empirical"
    else:
        source = "market"
    return RunConfig(
        command=args.command,
        market=args.market,
        dist_source=source,
        dist=args.dist,
        q=args.q,
        family=args.family,
        constraints=args.constraints,
        sequence=args.sequence,
        portfolios=args.portfolio,
        odds=args.odds,
        seed=args.seed,
        samples=args.samples,
        fmt=args.fmt,
        tol=args.tol,
        weak=args.weak,
    )


def run(cfg: RunConfig) -> str:
    result = COMMANDS[cfg.command](cfg)
    if cfg.command == "simulate":
        return render_simulation(result, cfg.fmt)
    return render(result, cfg.fmt)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        print(run(cfg))
    except (io.ParseError, MarketError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, InfeasibleError, ConvergenceError, IndeterminateError, EmbeddingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
