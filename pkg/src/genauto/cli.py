"""Command-line front end.

Subcommands: play, evolve-ipd, emerge, distance, eval. Exit status is 0 on
success, 1 on a runtime failure and 2 on a usage or configuration error.
Evolution commands write ``run.json``, ``stats.csv``, ``population/*.json``
and ``timing.json`` (wall-clock data, kept apart so that ``run.json`` is
byte-identical across reruns with the same seed).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import automaton as au
from . import emergence as em
from . import ipd
from .errors import ComparabilityError, GenautoError
from .genetics import INIT, GeneticConfig, substream


class UsageError(Exception):
    pass


# -- output helpers -------------------------------------------------------------

def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def stats_csv(rows: list, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _jsonable(x):
    # json has no infinity literal; keep it as a string
    if isinstance(x, float) and not np.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def write_run(out: Path, record: dict, stats: list, columns, population: list, started: float) -> None:
    write_atomic(out / "run.json", to_json(_jsonable(record)))
    write_atomic(out / "stats.csv", stats_csv(stats, columns))
    for i, a in enumerate(population):
        write_atomic(out / "population" / f"member_{i:03d}.json", au.dumps(a) + "\n")
    write_atomic(out / "timing.json", to_json({"started": started, "elapsed_s": time.time() - started}))


# -- config ------------------------------------------------------------------

def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError("config must be a JSON object")
    return doc


def merge(cfg: dict, args, mapping: dict) -> dict:
    """Flags override config values; ``mapping`` is flag attribute -> config key."""
    out = dict(cfg)
    for attr, key in mapping.items():
        value = getattr(args, attr, None)
        if value is not None:
            out[key] = value
    return out


def _positive(cfg, key, allow_zero=False):
    value = cfg.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < (0 if allow_zero else 1):
        raise UsageError(f"{key} must be a {'non-negative' if allow_zero else 'positive'} integer, got {value!r}")
    return value


def _seed(cfg):
    seed = cfg.get("seed")
    if seed is None:
        raise UsageError("--seed (or 'seed' in the config) is required")
    if not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise UsageError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return seed


def _genetics(cfg, seed) -> GeneticConfig:
    doc = dict(cfg.get("genetics", {}))
    doc["rng_seed"] = seed
    return GeneticConfig.from_dict(doc)


# -- commands ---------------------------------------------------------------------

def cmd_play(args) -> int:
    a = ipd.strategy_from_id(args.strategy_a)
    b = ipd.strategy_from_id(args.strategy_b)
    rounds = args.rounds if args.rounds is not None else 10
    if rounds < 1:
        raise UsageError("--rounds must be >= 1")
    stochastic = not (ipd.is_deterministic(a) and ipd.is_deterministic(b))
    if stochastic and args.seed is None:
        raise UsageError("stochastic strategies need --seed")
    rng = substream(args.seed if args.seed is not None else 0, INIT)
    result = ipd.play_match(a, b, rounds, rng)
    for t, (x, y) in enumerate(result.history, 1):
        print(f"{t}\t{x}\t{y}")
    print(f"total\t{result.payoff_a:g}\t{result.payoff_b:g}")
    if args.out:
        record = {
            "command": "play", "version": __version__,
            "config": {"strategy_a": args.strategy_a, "strategy_b": args.strategy_b,
                       "rounds": rounds, "seed": args.seed},
            "payoff_a": result.payoff_a, "payoff_b": result.payoff_b,
            "history": [[str(x), str(y)] for x, y in result.history],
            "population": [au.to_dict(a), au.to_dict(b)],
        }
        write_atomic(Path(args.out) / "run.json", to_json(record))
    return 0


def cmd_evolve_ipd(args) -> int:
    started = time.time()
    cfg = merge(load_config(args.config), args, {
        "pop": "pop", "generations": "generations", "rounds": "rounds", "repeats": "repeats",
        "s0": "s0", "seed": "seed", "fitness_mode": "fitness_mode",
    })
    cfg.setdefault("pop", 32)
    cfg.setdefault("generations", 60)
    cfg.setdefault("rounds", 64)
    cfg.setdefault("repeats", 1)
    cfg.setdefault("s0", "tft")
    cfg.setdefault("fitness_mode", "sample")
    seed = _seed(cfg)
    pop = _positive(cfg, "pop")
    if pop % 2:
        raise UsageError(f"pop must be even, got {pop}")
    generations = _positive(cfg, "generations", allow_zero=True)
    rounds, repeats = _positive(cfg, "rounds"), _positive(cfg, "repeats")
    s0 = ipd.strategy_from_id(str(cfg["s0"]))
    run = ipd.evolve_ipd(pop, generations, s0, rounds, repeats, _genetics(cfg, seed),
                         fitness_mode=cfg["fitness_mode"])
    members = list(run.final.members)
    record = {
        "command": "evolve-ipd", "version": __version__, "config": cfg,
        "stats": run.stats,
        "final_population": [au.to_dict(a) for a in members],
    }
    out = Path(args.out or "out/evolve-ipd")
    write_run(out, record, run.stats, ipd.STAT_COLUMNS, members, started)
    last = run.stats[-1]
    print(f"generation {last['generation']}: fit_mean={last['fit_mean']:.4g} coop_rate={last['coop_rate']:.4g}")
    print(f"wrote {out}")
    return 0


def _emerge_agents(cfg, seed):
    if "agents" in cfg:
        agents = []
        for i, doc in enumerate(cfg["agents"]):
            if "automaton" in doc:
                behavior = au.from_dict(doc["automaton"])
            elif "strategy" in doc:
                behavior = ipd.strategy_from_id(doc["strategy"])
            else:
                raise UsageError(f"agent {i} needs an 'automaton' or a 'strategy'")
            pos = doc.get("position")
            agents.append(em.Agent(doc.get("id", i), behavior, tuple(pos) if pos is not None else None))
        return tuple(agents)
    init = cfg.get("init", {})
    return em.clustered_agents(substream(seed, INIT), cfg["pop"], int(init.get("centers", 2)),
                               float(init.get("spread", 0.05)))


def cmd_emerge(args) -> int:
    started = time.time()
    cfg = merge(load_config(args.config), args, {
        "pop": "pop", "generations": "generations", "seed": "seed", "epsilon": "epsilon", "alpha": "alpha",
    })
    cfg.setdefault("pop", 32)
    cfg.setdefault("generations", 40)
    cfg.setdefault("epsilon", 0.05)
    cfg.setdefault("alpha", 2.0)
    seed = _seed(cfg)
    generations = _positive(cfg, "generations", allow_zero=True)
    if "agents" not in cfg:
        _positive(cfg, "pop")
    agents = _emerge_agents(cfg, seed)
    if len(agents) % 2 or len(agents) < 2:
        raise UsageError(f"agent count must be even and >= 2, got {len(agents)}")
    spec = em.NeighborhoodSpec.from_dict(cfg.get("neighborhood", {"kind": "all"}))
    f_problem, mode, weight = None, "product", 0.5
    problem = cfg.get("problem")
    if problem:
        s0 = ipd.strategy_from_id(problem.get("s0", "tft"))
        prounds = int(problem.get("rounds", 16))
        mode, weight = problem.get("mode", "product"), float(problem.get("w", 0.5))
        if mode not in ("product", "weighted_sum"):
            raise UsageError(f"unknown problem composition mode {mode!r}")

        def f_problem(a, s0=s0, prounds=prounds):
            return ipd.expected_payoff(a, s0, prounds)[0]

    run = em.evolve_emergent(agents, spec, generations, _genetics(cfg, seed), f_problem=f_problem,
                             compose_mode=mode, compose_weight=weight,
                             epsilon=float(cfg["epsilon"]), alpha=float(cfg["alpha"]))
    members = [a.behavior for a in run.final]
    record = {
        "command": "emerge", "version": __version__, "config": cfg,
        "stats": run.stats,
        "clusters": run.clusters,
        "final_population": [au.to_dict(a) for a in members],
        "agent_ids": [a.id for a in run.final],
    }
    out = Path(args.out or "out/emerge")
    write_run(out, record, run.stats, em.STAT_COLUMNS, members, started)
    last = run.stats[-1]
    print(f"generation {last['generation']}: mean_within_nbhd_dist={last['mean_within_nbhd_dist']:.4g} "
          f"n_clusters={last['n_clusters']}")
    print(f"wrote {out}")
    return 0


def _load_automaton(path):
    try:
        return au.load(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    except (json.JSONDecodeError, GenautoError) as exc:
        raise UsageError(f"{path} is not a valid automaton: {exc}") from None


def cmd_distance(args) -> int:
    a, b = _load_automaton(args.file_a), _load_automaton(args.file_b)
    alpha = args.alpha if args.alpha is not None else au.DEFAULT_ALPHA
    max_len = args.max_len if args.max_len is not None else au.DEFAULT_MAX_LEN
    try:
        d = au.automaton_distance(a, b, alpha)
        gap = au.behavior_gap(a, b, max_len, alpha)
    except ComparabilityError as exc:
        raise UsageError(str(exc)) from None
    print(f"automaton_distance\t{d!r}")
    print(f"behavior_gap\t{gap!r}")
    return 0


def cmd_eval(args) -> int:
    a = _load_automaton(args.file)
    m = em.evaluate(a)
    for row in m:
        print("\t".join(repr(float(x)) for x in row))
    return 0


# -- entry point --------------------------------------------------------------------

def _float(text):
    if text in ("inf", "infinity"):
        return float("inf")
    return float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="genauto", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, config=True):
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        if config:
            p.add_argument("--config")

    p = sub.add_parser("play", help="play one match between two named strategies")
    p.add_argument("strategy_a")
    p.add_argument("strategy_b")
    p.add_argument("--rounds", type=int)
    common(p, config=False)
    p.set_defaults(func=cmd_play)

    p = sub.add_parser("evolve-ipd", help="evolve strategies against a fixed opponent")
    common(p)
    p.add_argument("--pop", type=int)
    p.add_argument("--generations", type=int)
    p.add_argument("--rounds", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--s0")
    p.add_argument("--fitness-mode", choices=("sample", "expected"))
    p.set_defaults(func=cmd_evolve_ipd)

    p = sub.add_parser("emerge", help="evolve agents under the neighborhood fitness")
    common(p)
    p.add_argument("--pop", type=int)
    p.add_argument("--generations", type=int)
    p.add_argument("--alpha", type=_float)
    p.add_argument("--epsilon", type=float)
    p.set_defaults(func=cmd_emerge)

    p = sub.add_parser("distance", help="vector distance and behavior gap of two automata")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--alpha", type=_float)
    p.add_argument("--max-len", type=int)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("eval", help="print the evaluation matrix of an automaton")
    p.add_argument("file")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, GenautoError) as exc:
        print(f"genauto {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"genauto {args.command}: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
