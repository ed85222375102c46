"""
Command-line entry point of forkpool.

    forkpool analytic --config run.json
    forkpool simulate --config run.json --seed 7 --blocks 1000000
    forkpool evolve --config run.json --out traj.csv
    forkpool equilibrium --config run.json
    forkpool sweep --config run.json --tau 0:10:21 --theta 0:1:5
    forkpool gini --blocks blocks.csv --top 10
    forkpool stats --blocks blocks.csv --forks forks.csv
    forkpool branches --forks forks.csv

JSON output is wrapped as {"schema_version", "command", "config", "result"}
where config is the fully resolved run configuration. Exit status is 0 on
success, 1 on a domain or config error and 2 on an I/O error.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from forkpool_chain.loader import load_blocks, load_forks
from forkpool_chain.records import RowError
from forkpool_chain.statistics import (
    branch_histogram,
    canonical_counts,
    fork_frequency,
    miner_stats,
    top_k_gini,
)
from forkpool_equilibrium.classifier import classify
from forkpool_equilibrium.result import EquilibriumResult
from forkpool_equilibrium.stability import basin_probe, invasion_test
from forkpool_evolution.dynamics import hash_fraction
from forkpool_evolution.integrator import integrate
from forkpool_metrics.centralization import fairness_spread, gini
from forkpool_metrics.sweep import dominance_threshold, sweep, to_csv
from forkpool_model.errors import DomainError
from forkpool_model.fork_model import (
    MODES,
    expected_reward,
    fail_probabilities,
    prob_concurrent_block,
    prob_fork_after,
    prob_uncle,
    reward_ratio,
    uncle_probabilities,
)
from forkpool_sim.report import empirical_rates, export_csv, initiator_uncle_rates
from forkpool_sim.simulator import simulate

from .config import load_config

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
OUTPUT_FORMATS = ("json", "csv", "table")
TIE_CHOICES = {"coin": "coin_flip", "race": "recursive_race"}
SPLIT_CHOICES = {"half": "deterministic_half", "random": "random_per_pool"}
STATE_KINDS = ("vertex_ess", "interior_ess")


class CommandOutput:
    """
    What a command produced, renderable in every output format.

    Attributes:
        config (Dict[str, Any]): Resolved configuration of the run
        result (Dict[str, Any]): JSON result section
        header (List[str]): Column names of the tabular view
        rows (List[List[Any]]): Rows of the tabular view
        table (Optional[str]): Hand-formatted table replacing the generic one
        csv_text (Optional[str]): Hand-formatted CSV replacing the generic one
        default_format (str): Format used when --output is not given
    """

    def __init__(
        self,
        config: Dict[str, Any],
        result: Dict[str, Any],
        header: Sequence[str],
        rows: Sequence[Sequence[Any]],
        table: Optional[str] = None,
        csv_text: Optional[str] = None,
        default_format: str = "json",
    ):
        self.config = config
        self.result = result
        self.header = list(header)
        self.rows = [list(row) for row in rows]
        self.table = table
        self.csv_text = csv_text
        self.default_format = default_format


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _table_cell(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def format_table(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """Render rows as left-aligned first column and right-aligned numbers."""
    cells = [list(header)] + [[_table_cell(v) for v in row] for row in rows]
    widths = [max(len(row[c]) for row in cells) for c in range(len(header))]
    lines = []
    for n, row in enumerate(cells):
        line = [row[0].ljust(widths[0])] + [cell.rjust(w) for cell, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(line).rstrip())
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def render(output: CommandOutput, fmt: str, command: str) -> str:
    if fmt == "json":
        envelope = {
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "config": output.config,
            "result": output.result,
        }
        return json.dumps(envelope, indent=2, default=_json_default) + "\n"
    if fmt == "csv":
        if output.csv_text is not None:
            return output.csv_text
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(output.header)
        for row in output.rows:
            writer.writerow([_csv_cell(v) for v in row])
        return buffer.getvalue()
    if output.table is not None:
        return output.table
    return format_table(output.header, output.rows)


def _row_errors(path: str, errors: List[RowError]) -> List[Dict[str, Any]]:
    return [dict(error.to_dict(), file=path) for error in errors]


def _pool_columns(size: int) -> List[str]:
    return [f"r_{i + 1}" for i in range(size)]


# Commands


def cmd_analytic(args: argparse.Namespace) -> CommandOutput:
    config = load_config(args.config).updated({"population": {"mode": args.mode}})
    x = config.distribution()
    p = config.network
    mode = config.evolve["mode"]

    header = ["pool", "hash_share", "p_fork", "p_fail", "p_uncle", "expected_reward", "reward_ratio"]
    fails = fail_probabilities(x, p, mode) if x.size > 1 else [None]
    rows = []
    for i in range(x.size):
        ratio = reward_ratio(i, x, p, mode) if x[i] > 0 else None
        rows.append([
            i,
            float(x[i]),
            prob_fork_after(i, x, p),
            fails[i],
            prob_uncle(i, x, p, mode),
            expected_reward(i, x, p, mode),
            ratio,
        ])

    result: Dict[str, Any] = {
        "mode": mode,
        "p_concurrent": prob_concurrent_block(p),
        "pools": [dict(zip(header, row)) for row in rows],
    }
    if all(share > 0 for share in x):
        low, high, spread = fairness_spread(x, p, mode)
        result["fairness"] = {"min_ratio": low, "max_ratio": high, "spread": spread}
    return CommandOutput(config.to_dict(), result, header, rows)


def cmd_simulate(args: argparse.Namespace) -> CommandOutput:
    config = load_config(args.config).updated({
        "sim": {
            "seed": args.seed,
            "horizon_blocks": args.blocks,
            "tie_mode": TIE_CHOICES.get(args.tie) if args.tie else None,
            "split_mode": SPLIT_CHOICES.get(args.split) if args.split else None,
        }
    })
    cfg = config.sim_config()
    report = simulate(cfg, record_events=args.export is not None)
    logger.info("Simulated %d blocks in %.2fs", report.total_blocks, report.wall_time)

    if args.export is not None:
        os.makedirs(args.export, exist_ok=True)
        export_csv(
            report,
            cfg.pool_names,
            os.path.join(args.export, "blocks.csv"),
            os.path.join(args.export, "forks.csv"),
        )

    analytic = uncle_probabilities(cfg.x, cfg.params, "exact")
    initiator = initiator_uncle_rates(report)
    header = [
        "pool", "hash_share", "blocks_won", "initiator_uncle_rate", "analytic_uncle",
        "uncle_rate", "fork_rate", "fail_rate",
    ]
    rows = []
    for i, (rates, pool) in enumerate(zip(empirical_rates(report), report.pools)):
        uncle_rate, fork_rate, fail_rate = rates
        rows.append([
            cfg.pool_names[i], float(cfg.x[i]), pool.blocks_won, initiator[i], analytic[i],
            uncle_rate, fork_rate, fail_rate,
        ])

    result = {
        "report": report.to_dict(),
        "comparison": [dict(zip(header, row)) for row in rows],
    }
    return CommandOutput(config.to_dict(), result, header, rows)


def cmd_evolve(args: argparse.Namespace) -> CommandOutput:
    config = load_config(args.config).updated({
        "population": {"step": args.step, "t_max": args.tmax, "eps_converge": args.eps, "mode": args.mode}
    })
    market = config.require_market()
    assert config.r0 is not None
    traj = integrate(config.r0, market, config.network, mode=config.evolve["mode"], **config.ode_options())
    if not traj.converged:
        logger.warning("Integration reached t=%g without converging (residual %.3e)",
                       traj.final_time, traj.residual)

    result = traj.to_dict()
    result["final_time"] = traj.final_time
    result["gini"] = gini(hash_fraction(traj.terminal, market))
    header = ["t"] + _pool_columns(market.size)
    rows = [[t] + row for t, row in zip(traj.times.tolist(), traj.states.tolist())]
    return CommandOutput(config.to_dict(), result, header, rows, csv_text=traj.to_csv(), default_format="csv")


def _equilibrium_row(result: EquilibriumResult, size: int) -> List[Any]:
    state = result.state.to_list() if result.state is not None else [None] * size
    theorem = result.witness.get("theorem") if result.witness else None
    return [result.kind, result.stability, theorem] + state + [result.manifold_value]


def cmd_equilibrium(args: argparse.Namespace) -> CommandOutput:
    config = load_config(args.config).updated({"population": {"mode": args.mode}})
    market = config.require_market()
    p = config.network
    mode = config.evolve["mode"]
    options = config.ode_options()
    assert config.r0 is not None

    results = classify(market, p, r0=config.r0, mode=mode, ode_options=options)
    payload: Dict[str, Any] = {"equilibria": [r.to_dict() for r in results]}

    basins = []
    for n, r in enumerate(results):
        if r.ambiguous and r.state is not None:
            candidates = [r.state] + list(r.alternatives)
            for start, nearest in basin_probe(candidates, market, p, [config.r0], mode, **options):
                basins.append({"equilibrium": n, "start": start, "reaches": candidates[nearest].to_list()})
    if basins:
        payload["basins"] = basins

    if args.check:
        checks = []
        for n, r in enumerate(results):
            if r.kind in STATE_KINDS and r.state is not None:
                report = invasion_test(r.state, market, p, mode)
                if report.verdict == "refuted":
                    logger.warning("Invasion test refuted equilibrium %s", r.state.to_list())
                checks.append(dict(report.to_dict(), equilibrium=n))
        payload["invasion"] = checks

    header = ["kind", "stability", "theorem"] + _pool_columns(market.size) + ["manifold_value"]
    rows = [_equilibrium_row(r, market.size) for r in results]
    return CommandOutput(config.to_dict(), payload, header, rows)


def cmd_sweep(args: argparse.Namespace) -> CommandOutput:
    config = load_config(args.config).updated({
        "sweep": {"tau": args.tau, "theta": args.theta, "method": args.method, "workers": args.workers}
    })
    spec = config.sweep_spec()
    rows = sweep(spec)
    pools = spec.market.size

    thresholds = [
        {"theta": theta, "tau": dominance_threshold(rows, theta)} for theta in spec.theta_grid
    ]
    result = {"rows": [row.to_dict() for row in rows], "dominance_threshold": thresholds}
    header = ["tau", "theta"] + _pool_columns(pools) + ["gini", "method", "status"]
    table_rows = [
        [row.tau, row.theta] + (row.r if row.r is not None else [None] * pools)
        + [row.gini, row.method, row.status]
        for row in rows
    ]
    return CommandOutput(
        config.to_dict(), result, header, table_rows, csv_text=to_csv(rows, pools), default_format="csv"
    )


def cmd_gini(args: argparse.Namespace) -> CommandOutput:
    blocks, errors = load_blocks(args.blocks, strict=args.strict)
    value = top_k_gini(blocks, args.top)
    ranked = sorted(canonical_counts(blocks).items(), key=lambda item: (-item[1], item[0]))[:args.top]

    header = ["rank", "miner", "canonical_blocks"]
    rows = [[n + 1, miner, count] for n, (miner, count) in enumerate(ranked)]
    result = {
        "top": args.top,
        "gini": value,
        "miners": [{"miner": miner, "canonical_blocks": count} for miner, count in ranked],
        "row_errors": _row_errors(args.blocks, errors),
    }
    table = format_table(header, rows) + f"Top-{args.top} Gini: {value:.6f}\n"
    config = {"blocks": args.blocks, "top": args.top, "strict": args.strict}
    return CommandOutput(config, result, header, rows, table=table)


def cmd_stats(args: argparse.Namespace) -> CommandOutput:
    blocks, block_errors = load_blocks(args.blocks, strict=args.strict)
    forks, fork_errors = load_forks(args.forks, strict=args.strict)
    stats = miner_stats(blocks, forks)
    frequency = fork_frequency(blocks, forks)

    result = stats.to_dict()
    result["fork_frequency"] = frequency
    result["row_errors"] = (
        _row_errors(args.blocks, block_errors) + _row_errors(args.forks, fork_errors)
    )
    header = ["bin", "miners", "uncle_rate", "fork_rate", "fail_rate"]
    rows = [[b.label, b.miner_count, b.uncle_rate, b.fork_rate, b.fail_rate] for b in stats.bins]
    table = stats.format_table() + f"\nFork frequency: {frequency:.6f}\n"
    config = {"blocks": args.blocks, "forks": args.forks, "strict": args.strict}
    return CommandOutput(config, result, header, rows, table=table)


def cmd_branches(args: argparse.Namespace) -> CommandOutput:
    forks, errors = load_forks(args.forks, strict=args.strict)
    histogram = branch_histogram(forks)

    header = ["branches", "count", "fraction"]
    rows = [[k, count, fraction] for k, (count, fraction) in histogram.items()]
    result = {
        "histogram": [dict(zip(header, row)) for row in rows],
        "row_errors": _row_errors(args.forks, errors),
    }
    config = {"forks": args.forks, "strict": args.strict}
    return CommandOutput(config, result, header, rows)


# Parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=OUTPUT_FORMATS, default=None,
                        help="Output format (default: csv for evolve and sweep, json otherwise)")
    common.add_argument("--out", default=None, help="Write output to this path instead of standard output")
    common.add_argument("--quiet", action="store_true", help="Only log warnings and errors")

    with_config = argparse.ArgumentParser(add_help=False, parents=[common])
    with_config.add_argument("--config", required=True, help="JSON run configuration")

    parser = argparse.ArgumentParser(
        prog="forkpool",
        description="Fork probabilities, mining simulation and pool equilibria",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler: Callable[[argparse.Namespace], CommandOutput], help_text: str,
            parent: argparse.ArgumentParser) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, parents=[parent], help=help_text)
        sub.set_defaults(handler=handler)
        return sub

    sub = add("analytic", cmd_analytic, "Closed-form fork and reward probabilities", with_config)
    sub.add_argument("--mode", choices=MODES, default=None)

    sub = add("simulate", cmd_simulate, "Monte Carlo mining run", with_config)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--blocks", type=int, default=None, help="Canonical blocks to simulate")
    sub.add_argument("--tie", choices=tuple(TIE_CHOICES), default=None)
    sub.add_argument("--split", choices=tuple(SPLIT_CHOICES), default=None)
    sub.add_argument("--export", default=None, help="Directory for blocks.csv and forks.csv")

    sub = add("evolve", cmd_evolve, "Integrate the replicator dynamics", with_config)
    sub.add_argument("--step", type=float, default=None)
    sub.add_argument("--tmax", type=float, default=None)
    sub.add_argument("--eps", type=float, default=None)
    sub.add_argument("--mode", choices=MODES, default=None)

    sub = add("equilibrium", cmd_equilibrium, "Classify the equilibria of a pool market", with_config)
    sub.add_argument("--mode", choices=MODES, default=None)
    sub.add_argument("--check", action="store_true", help="Run the invasion test on every ESS")

    sub = add("sweep", cmd_sweep, "Solve a (tau, theta) grid", with_config)
    sub.add_argument("--tau", default=None, help="Delay grid 'a:b:n'")
    sub.add_argument("--theta", default=None, help="Uncle-fraction grid 'a:b:n'")
    sub.add_argument("--method", choices=("ode", "analytic"), default=None)
    sub.add_argument("--workers", type=int, default=None)

    sub = add("gini", cmd_gini, "Top-k Gini coefficient of block producers", common)
    sub.add_argument("--blocks", required=True)
    sub.add_argument("--top", type=int, default=10)
    sub.add_argument("--strict", action="store_true", help="Fail on the first malformed row")

    sub = add("stats", cmd_stats, "Binned uncle, fork and fail rates", common)
    sub.add_argument("--blocks", required=True)
    sub.add_argument("--forks", required=True)
    sub.add_argument("--strict", action="store_true", help="Fail on the first malformed row")

    sub = add("branches", cmd_branches, "Histogram of fork branch counts", common)
    sub.add_argument("--forks", required=True)
    sub.add_argument("--strict", action="store_true", help="Fail on the first malformed row")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        output = args.handler(args)
        text = render(output, args.output or output.default_format, args.command)
        if args.out is not None:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (DomainError, ValueError) as exc:
        logger.error("%s", exc)
        return 1
    except OSError as exc:
        logger.error("%s", exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
