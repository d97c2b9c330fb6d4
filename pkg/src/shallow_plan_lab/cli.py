"""Command-line interface.

Exit codes: 0 success, 1 validation error (bad arguments, malformed or
invariant-violating JSON), 2 I/O error, 3 invariant violation during a
campaign run.
"""

from __future__ import annotations

import argparse
import json
import sys

from .abstraction import abstract_mdp, load_observation_map
from .bounds import CONDITION_DENOMINATORS, compute_bound_report
from .campaign import (
    EXPERIMENTS,
    FORMATS,
    SCHEMAS,
    CampaignConfig,
    CampaignInvariantError,
    _EXPERIMENT_TABLES,
    run_campaign,
)
from .mdp import DiscountGrid, SchemaError, blackwell_gamma, load_mdp, optimal_policy
from .modelgen import FixedSpec, generate_fixed, sample_empirical_model
from .structure import compute_structural_report


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors are validation errors: exit 1
        self.print_usage(sys.stderr)
        raise SystemExit(self.prog + ": error: " + message)


def _add_grid_flags(p):
    p.add_argument("--gamma-start", type=float, default=0.99)
    p.add_argument("--gamma-step", type=float, default=0.01)
    p.add_argument("--gamma-end", type=float, default=0.0)


def _grid(args) -> DiscountGrid:
    return DiscountGrid(args.gamma_start, args.gamma_step, args.gamma_end)


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=1)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shallow-plan-lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a Fixed(|S|, d) random MDP")
    p.add_argument("--states", type=int, required=True)
    p.add_argument("--branching", type=int, required=True)
    p.add_argument("--actions", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("sample", help="sample an empirical model of an MDP")
    p.add_argument("--mdp", required=True)
    p.add_argument("--n-per-pair", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("solve", help="canonical optimal policy and values")
    p.add_argument("--mdp", required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("blackwell", help="Blackwell discount factor on a grid")
    p.add_argument("--mdp", required=True)
    _add_grid_flags(p)
    p.add_argument("--out", default=None)

    p = sub.add_parser("params", help="structural parameters of an instance")
    p.add_argument("--mdp", required=True)
    p.add_argument("--mdp-hat", default=None, help="approximate model (defaults to the true MDP)")
    p.add_argument("--gamma", type=float, required=True)
    _add_grid_flags(p)
    p.add_argument("--out", default=None)

    p = sub.add_parser("bounds", help="measured losses and every bound value")
    p.add_argument("--mdp", required=True)
    p.add_argument("--mdp-hat", default=None)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--condition-denominator", choices=CONDITION_DENOMINATORS, default="paper")
    _add_grid_flags(p)
    p.add_argument("--out", default=None)

    p = sub.add_parser("abstract", help="abstract an MDP through an observation map")
    p.add_argument("--mdp", required=True)
    p.add_argument("--omap", required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("run", help="run an experiment campaign")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--n-mdps", type=int, default=1000)
    p.add_argument("--states", type=int, default=10)
    p.add_argument("--branching", type=int, default=3)
    p.add_argument("--actions", type=int, default=2)
    p.add_argument(
        "--obs-sizes",
        type=lambda s: tuple(int(x) for x in s.split(",")),
        default=None,
        help="comma-separated observation counts (default: 10,8,6,4,2,1 capped at --states)",
    )
    _add_grid_flags(p)
    p.add_argument("--n-per-pair", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma", type=float, default=0.5, help="planning discount for `single`")
    p.add_argument("--out", default="results.csv")
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--condition-denominator", choices=CONDITION_DENOMINATORS, default="paper")
    p.add_argument("--mdp", default=None, help="MDP JSON for `single`")
    p.add_argument("--omap", default=None, help="observation map JSON for `single`")

    p = sub.add_parser("schema", help="print the CSV header of an experiment")
    p.add_argument("--experiment", choices=EXPERIMENTS, required=True)

    return parser


def _cmd_gen(args) -> int:
    spec = FixedSpec(args.states, args.branching, args.actions, args.seed)
    _emit(generate_fixed(spec).to_json_dict(), args.out)
    return 0


def _cmd_sample(args) -> int:
    mdp = load_mdp(args.mdp)
    emp = sample_empirical_model(mdp, args.n_per_pair, args.seed)
    _emit(emp.to_json_dict(), args.out)
    return 0


def _cmd_solve(args) -> int:
    mdp = load_mdp(args.mdp)
    policy, values = optimal_policy(mdp, args.gamma)
    _emit(
        {"gamma": args.gamma, "policy": policy.actions.tolist(), "values": values.tolist()},
        args.out,
    )
    return 0


def _cmd_blackwell(args) -> int:
    mdp = load_mdp(args.mdp)
    _emit({"gamma_bw": blackwell_gamma(mdp, _grid(args))}, args.out)
    return 0


def _load_pair(args):
    mdp = load_mdp(args.mdp)
    mdp_hat = load_mdp(args.mdp_hat) if args.mdp_hat else mdp
    return mdp, mdp_hat


def _cmd_params(args) -> int:
    mdp, mdp_hat = _load_pair(args)
    gamma_bw = blackwell_gamma(mdp, _grid(args))
    report = compute_structural_report(mdp, mdp_hat, args.gamma, gamma_bw)
    _emit(report.to_json_dict(), args.out)
    return 0


def _cmd_bounds(args) -> int:
    mdp, mdp_hat = _load_pair(args)
    gamma_bw = blackwell_gamma(mdp, _grid(args))
    report = compute_bound_report(
        mdp, mdp_hat, args.gamma, gamma_bw, condition_denominator=args.condition_denominator
    )
    _emit(report.to_json_dict(), args.out)
    return 0


def _cmd_abstract(args) -> int:
    mdp = load_mdp(args.mdp)
    omap = load_observation_map(args.omap)
    omap.validate_for(mdp)
    _emit(abstract_mdp(mdp, omap).to_json_dict(), args.out)
    return 0


def _cmd_run(args) -> int:
    if args.obs_sizes is None:
        obs_sizes = tuple(o for o in (10, 8, 6, 4, 2, 1) if o <= args.states)
        if args.states not in obs_sizes:
            obs_sizes = (args.states,) + obs_sizes
    else:
        obs_sizes = args.obs_sizes
    config = CampaignConfig(
        experiment=args.experiment,
        n_mdps=args.n_mdps,
        n_states=args.states,
        branching=args.branching,
        n_actions=args.actions,
        observation_sizes=obs_sizes,
        gamma_start=args.gamma_start,
        gamma_step=args.gamma_step,
        gamma_end=args.gamma_end,
        n_per_pair=args.n_per_pair,
        master_seed=args.seed,
        output_path=args.out,
        output_format=args.format,
        workers=args.workers,
        condition_denominator=args.condition_denominator,
        gamma=args.gamma,
    )
    if config.experiment == "single":
        if not args.mdp:
            raise SchemaError("experiment 'single' requires --mdp")
        payload = run_campaign(config, mdp_path=args.mdp, omap_path=args.omap)
        _emit(payload, None if args.out == "results.csv" else args.out)
        return 0
    paths = run_campaign(config)
    for name in _EXPERIMENT_TABLES[config.experiment]:
        print(f"wrote {paths[name]}")
    return 0


def _cmd_schema(args) -> int:
    for name in _EXPERIMENT_TABLES[args.experiment]:
        print(",".join(SCHEMAS[name]))
    if args.experiment == "single":
        print("single emits JSON: structural + bounds + abstraction objects")
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "sample": _cmd_sample,
    "solve": _cmd_solve,
    "blackwell": _cmd_blackwell,
    "params": _cmd_params,
    "bounds": _cmd_bounds,
    "abstract": _cmd_abstract,
    "run": _cmd_run,
    "schema": _cmd_schema,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse usage error routed through _Parser
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return 1
        return 0 if exc.code in (0, None) else int(exc.code)
    except CampaignInvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3
    except (SchemaError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
