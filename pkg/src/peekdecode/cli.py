"""Command line entry point: ``peekdecode {gen,decode,sweep,bounds,adversary}``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys

import numpy as np

from . import bounds as B
from .adversary import play_deterministic_game, randomized_adversary_instance
from .decoders import DECODERS, online_decode, viterbi_decode
from .harness import RatioReport, emit_csv, run_sweep
from .hmm import SyntheticSpec, generate_synthetic_hmm, load_model, read_observations

EXIT_INVALID = 2
EXIT_INAPPLICABLE = 3

BOUND_COLUMNS = ("peek_search_upper", "randomized_upper", "peek_reset_upper",
                 "deterministic_lower", "randomized_lower")


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_common(p, latency_list=False):
    if latency_list:
        p.add_argument("--latency", type=_int_list, default=[1, 3, 5, 9],
                       help="comma-separated latencies")
    else:
        p.add_argument("--latency", type=int, default=5)
    p.add_argument("--gamma", type=float, default=None,
                   help="Peek Search discount (default: optimal for the instance)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--padding", action=argparse.BooleanOptionalAction, default=True)


def build_parser():
    parser = argparse.ArgumentParser(prog="peekdecode", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a random HMM model file")
    p.add_argument("output")
    p.add_argument("--states", type=int, default=4)
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--vocab", type=int, default=4)
    p.add_argument("--horizon", type=int, default=100)
    p.add_argument("--density", type=float, default=1.0)
    p.add_argument("--transition-concentration", type=float, default=1.0)
    p.add_argument("--emission-concentration", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--observations", metavar="PATH",
                   help="also sample a token sequence of length --horizon to PATH")

    p = sub.add_parser("decode", help="decode one observation file, labels to stdout")
    p.add_argument("model")
    p.add_argument("observations", help="one token per line, '-' for stdin")
    p.add_argument("--decoder", choices=DECODERS, default="peek_search")
    p.add_argument("--order", type=int, default=None, help="must match the model if given")
    _add_common(p)

    p = sub.add_parser("sweep", help="latency sweep, CSV report")
    p.add_argument("model")
    p.add_argument("observations")
    p.add_argument("--decoders", default=",".join(DECODERS))
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--trials", type=int, default=1, help="seeds seed .. seed+trials-1")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="fill wall_time_ms (not reproducible)")
    p.add_argument("-o", "--output")
    _add_common(p, latency_list=True)

    p = sub.add_parser("bounds", help="tabulate every bound over a grid")
    p.add_argument("--latency", type=_int_list, default=list(range(1, 11)))
    p.add_argument("--order", type=_int_list, default=[1])
    p.add_argument("--delta", type=_int_list, default=[1])
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--check", choices=BOUND_COLUMNS,
                   help="fail with exit code 3 if this bound is inapplicable anywhere")
    p.add_argument("-o", "--output")

    p = sub.add_parser("adversary", help="play a lower-bound instance against a decoder")
    p.add_argument("--decoder", choices=DECODERS[1:], default="peek_search")
    p.add_argument("--game", choices=("deterministic", "randomized"), default="deterministic")
    p.add_argument("--latency", type=int, default=1)
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--delta", type=int, default=1)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    return parser


def _write(data: bytes, path):
    if path:
        with open(path, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _load(args):
    model = load_model(args.model)
    if args.order is not None and args.order != model.order:
        raise ValueError(f"--order {args.order} does not match model order {model.order}")
    if args.observations == "-":
        tokens = [line.strip() for line in sys.stdin if line.strip()]
    else:
        tokens = read_observations(args.observations)
    if not tokens:
        raise ValueError("observation sequence is empty")
    return model, model.encode(tokens)


def cmd_gen(args):
    spec = SyntheticSpec(args.states, args.order, args.vocab, args.horizon,
                         args.transition_concentration, args.emission_concentration,
                         args.density, args.seed)
    _, model = generate_synthetic_hmm(spec)
    model.save(args.output)
    if args.observations:
        _, obs = model.sample(args.horizon, args.seed)
        with open(args.observations, "w", encoding="utf-8") as fh:
            fh.writelines(model.vocabulary[w] + "\n" for w in obs)
    return 0


def cmd_decode(args):
    model, obs = _load(args)
    oracle = model.rewards(obs)
    trace = online_decode(args.decoder, oracle, model.graph, args.latency, gamma=args.gamma,
                          seed=args.seed, padding=args.padding)
    out = "".join(model.states[y] + "\n" for y in trace.labels)
    _write(out.encode("utf-8"), None)
    return 0


def cmd_sweep(args):
    model, obs = _load(args)
    decoders = [d.strip() for d in args.decoders.split(",") if d.strip()]
    if args.trials < 1:
        raise ValueError("--trials must be positive")
    seeds = list(range(args.seed, args.seed + args.trials))
    reports = run_sweep(model.rewards(obs), model.graph, decoders, args.latency, seeds,
                        padding=args.padding, gamma=args.gamma, workers=args.workers,
                        timing=args.timing)
    _write(emit_csv(reports), args.output)
    return 0


def bounds_table(latencies, orders, deltas, epsilon, check=None) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("L", "n", "delta") + BOUND_COLUMNS)
    for n in orders:
        for delta in deltas:
            for L in latencies:
                values = B.all_bounds(L, n, delta, epsilon)
                if check and values[check] is None:
                    raise B.BoundInapplicable(f"{check} is inapplicable at L={L}, n={n}, "
                                              f"delta={delta}")
                writer.writerow([L, n, delta] + ["n/a" if values[c] is None else f"{values[c]:.12f}"
                                                 for c in BOUND_COLUMNS])
    return buf.getvalue().encode("utf-8")


def cmd_bounds(args):
    _write(bounds_table(args.latency, args.order, args.delta, args.epsilon, args.check),
           args.output)
    return 0


def cmd_adversary(args):
    L, n, delta = args.latency, args.order, args.delta
    if args.trials < 1:
        raise ValueError("--trials must be positive")
    reports = []
    if args.game == "deterministic":
        outcome = play_deterministic_game(args.decoder, L, n, delta)
        agree = float(np.mean(np.array(outcome.online_labels) == np.array(outcome.opt_labels)))
        floor = B.deterministic_lower_bound(L, n, delta)
        reports.append(RatioReport(args.decoder, L, outcome.trace.gamma, args.seed, outcome.opt,
                                   outcome.on, outcome.ratio, agree, floor))
    else:
        try:
            floor = B.randomized_lower_bound(L, n, delta, args.epsilon)
        except B.BoundInapplicable:
            floor = None
        total = 0.0
        for k in range(args.trials):
            seed = args.seed + k
            graph, oracle, opt = randomized_adversary_instance(args.epsilon, delta, n, L, seed)
            trace = online_decode(args.decoder, oracle, graph, L, seed=seed + 1_000_003)
            best = viterbi_decode(oracle, graph)
            agree = float(np.mean(np.array(trace.labels) == np.array(best.labels)))
            ratio = opt / trace.total if trace.total > 0 else math.inf
            total += trace.total
            reports.append(RatioReport(args.decoder, L, trace.gamma, seed, opt, trace.total,
                                       ratio, agree, floor))
        print(f"mean reward {total / args.trials:.6f} over {args.trials} trials, "
              f"OPT {L + n}", file=sys.stderr)
    _write(emit_csv(reports), args.output)
    return 0


COMMANDS = {"gen": cmd_gen, "decode": cmd_decode, "sweep": cmd_sweep, "bounds": cmd_bounds,
            "adversary": cmd_adversary}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except B.BoundInapplicable as exc:
        print(f"peekdecode: {exc}", file=sys.stderr)
        return EXIT_INAPPLICABLE
    except (ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"peekdecode: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
