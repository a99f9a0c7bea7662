"""Command-line entry point ``relay-beamform``.

Exit codes: 0 success, 2 invalid input, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import harness
from .optimizer import BeamStatus, SolverSettings, grid_oracle, maximize_min_sinr
from .scenario import ScenarioConfig, ScenarioError, load_scenario, sample_channels, save_scenario
from .signal_model import forms_for

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3

log = logging.getLogger("relay_beamform")


def _setup_logging():
    level = os.environ.get("RELAY_BEAMFORM_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        level = "error"
    logging.basicConfig(level=levels[level], stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


class InputError(Exception):
    pass


def _load(path):
    try:
        return load_scenario(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except ScenarioError as exc:
        raise InputError(str(exc)) from exc


def cmd_solve(args) -> int:
    config, channels = _load(args.scenario)
    forms = forms_for(config, channels)
    sol = maximize_min_sinr(forms, config.I_p, config.P_t, SolverSettings(tol_gamma_rel=args.tol))
    json.dump(sol.to_dict(), sys.stdout, indent=1)
    sys.stdout.write("\n")
    return EXIT_SOLVER if sol.status is BeamStatus.SOLVER_FAILURE else EXIT_OK


def cmd_oracle(args) -> int:
    config, channels = _load(args.scenario)
    if config.R > 3:
        raise InputError(f"oracle supports at most 3 relays, scenario has R={config.R}")
    forms = forms_for(config, channels)
    gamma, w = grid_oracle(forms, config.I_p, config.P_t, n_samples=args.samples, seed=args.seed)
    json.dump({"gamma_best": gamma, "w_re": w.real.tolist(), "w_im": w.imag.tolist(),
               "samples": args.samples}, sys.stdout, indent=1)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        with open(args.spec) as fh:
            doc = json.load(fh)
        specs = harness.specs_from_file_dict(doc)
    except OSError as exc:
        raise InputError(f"cannot read {args.spec}: {exc}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid sweep file {args.spec}: {exc}") from exc
    results = []
    for spec in specs:
        log.info("running %s: %d values x %d trials", spec.label, len(spec.values), spec.trials)
        results.append(harness.run_sweep(spec, workers=args.workers))
    for p in harness.write_outputs(results, args.out, args.format):
        print(p)
    failed = any(pt.trials_failed for r in results for pt in r.points)
    return EXIT_SOLVER if failed else EXIT_OK


def cmd_scenario(args) -> int:
    def lin(db):
        return 10.0 ** (db / 10.0)
    try:
        config = ScenarioConfig(R=args.R, M=args.pairs, N=args.pairs, P_p=lin(args.P_p_db),
                                P_s=lin(args.P_s_db), sigma_n2=args.sigma_n2,
                                I_p=lin(args.I_p_db), P_t=lin(args.P_t_db), seed=args.seed)
    except ScenarioError as exc:
        raise InputError(str(exc)) from exc
    save_scenario(config, sample_channels(config), args.out)
    print(args.out)
    return EXIT_OK


def cmd_preset(args) -> int:
    doc = harness.figure_preset(args.name, trials=args.trials)
    text = json.dumps(doc, indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relay-beamform",
                                description="Max-min SINR relay beamforming for underlay cognitive radio.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="optimize the weights of one scenario file")
    s.add_argument("--scenario", required=True)
    s.add_argument("--tol", type=float, default=1e-4, help="relative bisection tolerance")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("sweep", help="run a Monte-Carlo sweep file")
    s.add_argument("--spec", required=True)
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("oracle", help="random-search lower bound (R <= 3)")
    s.add_argument("--scenario", required=True)
    s.add_argument("--samples", type=int, default=10**6)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("scenario", help="sample a scenario and write it as JSON")
    s.add_argument("--out", required=True)
    s.add_argument("--R", type=int, default=10)
    s.add_argument("--pairs", type=int, default=3)
    s.add_argument("--P-p-db", dest="P_p_db", type=float, default=5.0)
    s.add_argument("--P-s-db", dest="P_s_db", type=float, default=5.0)
    s.add_argument("--I-p-db", dest="I_p_db", type=float, default=0.0)
    s.add_argument("--P-t-db", dest="P_t_db", type=float, default=10.0)
    s.add_argument("--sigma-n2", dest="sigma_n2", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_scenario)

    s = sub.add_parser("preset", help="print a sweep file reproducing fig2, fig3 or fig4")
    s.add_argument("name", choices=("fig2", "fig3", "fig4"))
    s.add_argument("--trials", type=int, default=200)
    s.add_argument("--out")
    s.set_defaults(func=cmd_preset)
    return p


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) < 1 or getattr(args, "samples", 1) < 1:
        print("error: --workers and --samples must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
