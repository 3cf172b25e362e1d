#!/usr/bin/env python3
"""Compare search variants on the bundled Game of 24 suite.

Runs the tree-search engine against the tunable scripted oracles at a chosen
competence level and prints one line per arm. best_of_k gets a matched
proposal budget: for each task its rollout count is ceil(proposals used by
mcts / rollout length), so every arm spends about the same number of
generated actions. With --ablations two more mcts arms run, one without the
value function and one without reflections.

Example:
    python3 scripts/compare_variants.py --p-correct 0.3 --accuracy 0.85
    python3 scripts/compare_variants.py --k 10 --ablations --out-dir runs/
"""

import argparse
import math
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from agentsearch.backends import Game24PolicyOracle, Game24ValueOracle, static_backend
from agentsearch.envs import load_task
from agentsearch.report import RunReport
from agentsearch.search import BackendSet, SearchConfig, run_search
from agentsearch.seeding import stable_seed
from agentsearch.templates import load_template_set

REFLECT_TEXT = "Prefer combining toward factors of twenty four early."
DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "agentsearch" / "data"


def suite_tasks(limit):
    files = sorted((DATA_DIR / "game24" / "puzzles").glob("*.json"))
    if limit:
        files = files[:limit]
    return [load_task(path) for path in files]


def backends_for(task, args):
    combo = tuple(task.payload["numbers"])
    return BackendSet(
        policy=Game24PolicyOracle(args.p_correct, stable_seed("c6-policy", combo)),
        value=Game24ValueOracle(args.accuracy, stable_seed("c6-value", combo)),
        reflection=static_backend(REFLECT_TEXT),
    )


def run_arm(name, tasks, templates, args, config_for):
    """Run one arm across the suite and return (report, per-task results)."""
    results = []
    started = time.perf_counter()
    for task in tasks:
        config = config_for(task)
        results.append(run_search(task, backends_for(task, args), templates, config))
    elapsed = time.perf_counter() - started
    report = RunReport.from_results(results)
    stats = next(iter(report.aggregate().values()))
    print(
        f"{name:<18} {stats['successes']:>3}/{stats['tasks']:<3}"
        f" rate {stats['success_rate']:.2f}"
        f"  mean episodes {stats['mean_episodes']:6.2f}"
        f"  proposals {stats['total_policy_proposals']:>6}"
        f"  {elapsed:5.1f}s"
    )
    return report, results


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--p-correct", type=float, default=0.3,
                        help="policy oracle competence (default 0.3)")
    parser.add_argument("--accuracy", type=float, default=0.85,
                        help="value oracle accuracy (default 0.85)")
    parser.add_argument("--k", type=int, default=30, help="episode budget (default 30)")
    parser.add_argument("--n", type=int, default=5, help="expansion width (default 5)")
    parser.add_argument("--seed", type=int, default=7, help="engine seed (default 7)")
    parser.add_argument("--limit", type=int, default=0, help="run only the first N puzzles")
    parser.add_argument("--ablations", action="store_true",
                        help="also run mcts without values and without reflections")
    parser.add_argument("--out-dir", type=Path, default=None,
                        help="write one JSON and CSV report per arm into this directory")
    args = parser.parse_args()

    tasks = suite_tasks(args.limit)
    templates = load_template_set("game24")
    print(f"{len(tasks)} puzzles, p_correct={args.p_correct}, accuracy={args.accuracy}, "
          f"k={args.k}, n={args.n}, seed={args.seed}")

    base = dict(n=args.n, k=args.k, seed=args.seed)
    reports = {}

    reports["mcts"], mcts_results = run_arm(
        "mcts", tasks, templates, args,
        lambda task: SearchConfig(variant="mcts", **base),
    )

    budget = {}
    for task, result in zip(tasks, mcts_results):
        steps = len(task.payload["numbers"]) - 1
        budget[task.task_id] = max(1, math.ceil(result.proposals / steps))
    reports["best_of_k"], _ = run_arm(
        "best_of_k", tasks, templates, args,
        lambda task: SearchConfig(variant="best_of_k", n=args.n, seed=args.seed,
                                  k=budget[task.task_id]),
    )

    reports["dfs_prune"], _ = run_arm(
        "dfs_prune", tasks, templates, args,
        lambda task: SearchConfig(variant="dfs_prune", **base),
    )

    if args.ablations:
        reports["mcts_no_value"], _ = run_arm(
            "mcts_no_value", tasks, templates, args,
            lambda task: SearchConfig(variant="mcts", value_mode="none", **base),
        )
        reports["mcts_no_reflect"], _ = run_arm(
            "mcts_no_reflect", tasks, templates, args,
            lambda task: SearchConfig(variant="mcts", reflection_enabled=False, **base),
        )

    if args.out_dir is not None:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        for name, report in reports.items():
            report.write_json(args.out_dir / f"{name}.json")
            report.write_csv(args.out_dir / f"{name}.csv")
        print(f"reports written to {args.out_dir}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
