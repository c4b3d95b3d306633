"""Iterated prisoner's dilemma with two-state probabilistic strategy automata.

A strategy is a stochastic 2-state automaton over the perception alphabet
``("C", "D")``. State 0 means "just cooperated", state 1 "just betrayed":
the state a player enters *is* the action it plays. From state ``s`` after
perceiving the opponent's previous action ``x`` the player moves to state
``s'`` with probability ``trans[x][s, s']``. The opening move is drawn from
the entry vector. The final vector plays no part in a match.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .automaton import WeightedAutomaton, is_stochastic
from .errors import ConfigError, ParameterError
from .genetics import INIT, STATS, GeneticConfig, Population, evolve_generation, substream

ALPHABET = ("C", "D")


class Action(enum.IntEnum):
    C = 0  # cooperate
    D = 1  # betray

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class PayoffTable:
    # payoff[own][other] -> (own points, other points)
    payoff: tuple = (((3.0, 3.0), (0.0, 5.0)), ((5.0, 0.0), (1.0, 1.0)))

    def __call__(self, own: Action, other: Action) -> tuple:
        return self.payoff[own][other]

    def own_matrix(self) -> np.ndarray:
        """2x2 array of the row player's points."""
        return np.array([[self.payoff[i][j][0] for j in range(2)] for i in range(2)])

    def other_matrix(self) -> np.ndarray:
        return np.array([[self.payoff[i][j][1] for j in range(2)] for i in range(2)])


TABLE1 = PayoffTable()


@dataclass(frozen=True)
class StrategyParams:
    p1: float
    p2: float
    p3: float
    p4: float
    p5: float
    p6: float = 1.0

    def __post_init__(self):
        for name, value in zip(("p1", "p2", "p3", "p4", "p5", "p6"), self.as_tuple()):
            if not (0.0 <= value <= 1.0):
                raise ParameterError(f"{name}={value} is not a probability")

    def as_tuple(self) -> tuple:
        return (self.p1, self.p2, self.p3, self.p4, self.p5, self.p6)


def build_strategy(p: StrategyParams) -> WeightedAutomaton:
    if not isinstance(p, StrategyParams):
        p = StrategyParams(*p)
    p1, p2, p3, p4, p5, p6 = p.as_tuple()
    return WeightedAutomaton(
        ALPHABET,
        entry=[p1, 1 - p1],
        final=[p6, 1 - p6],
        trans=(
            [[p2, 1 - p2], [p3, 1 - p3]],
            [[1 - p4, p4], [1 - p5, p5]],
        ),
    )


def strategy_params(a: WeightedAutomaton) -> StrategyParams:
    """Read p1..p6 back from any 2-state strategy automaton."""
    check_strategy(a)
    tc, td = a.trans
    clip = lambda x: min(1.0, max(0.0, float(x)))  # noqa: E731
    return StrategyParams(*(clip(x) for x in (a.entry[0], tc[0, 0], tc[1, 0], td[0, 1], td[1, 1], a.final[0])))


def check_strategy(a: WeightedAutomaton) -> None:
    if a.alphabet != ALPHABET or a.n != 2:
        raise ParameterError(f"not a strategy automaton: {a!r}")
    if not is_stochastic(a):
        raise ParameterError("strategy automaton must be stochastic")


def make_tit_for_tat() -> WeightedAutomaton:
    return build_strategy(StrategyParams(1, 1, 1, 1, 1, 1))


def make_vindictive() -> WeightedAutomaton:
    return build_strategy(StrategyParams(1, 1, 0, 1, 1, 1))


def make_always_cooperate() -> WeightedAutomaton:
    return build_strategy(StrategyParams(1, 1, 1, 0, 0, 1))


def make_always_defect() -> WeightedAutomaton:
    return build_strategy(StrategyParams(0, 0, 0, 1, 1, 1))


def make_uniform() -> WeightedAutomaton:
    return build_strategy(StrategyParams(*(0.5,) * 6))


NAMED = {
    "tft": make_tit_for_tat,
    "vindictive": make_vindictive,
    "allc": make_always_cooperate,
    "alld": make_always_defect,
    "uniform": make_uniform,
}


def strategy_from_id(spec: str) -> WeightedAutomaton:
    """``tft``, ``vindictive``, ``allc``, ``alld``, ``uniform`` or ``params:p1,...,p6``."""
    spec = spec.strip()
    if spec in NAMED:
        return NAMED[spec]()
    if spec.startswith("params:"):
        try:
            values = [float(x) for x in spec[len("params:"):].split(",")]
        except ValueError:
            raise ConfigError(f"bad parameter list in {spec!r}") from None
        if len(values) != 6:
            raise ConfigError(f"{spec!r} needs exactly six probabilities")
        return build_strategy(StrategyParams(*values))
    raise ConfigError(f"unknown strategy {spec!r}; expected one of {sorted(NAMED)} or params:p1,...,p6")


def is_deterministic(a: WeightedAutomaton) -> bool:
    vals = np.concatenate([a.entry] + [m.ravel() for m in a.trans])
    return bool(np.all((vals == 0) | (vals == 1)))


# -- play ----------------------------------------------------------------------

@dataclass(frozen=True)
class MatchResult:
    payoff_a: float
    payoff_b: float
    history: tuple = field(repr=False)  # ((Action, Action), ...) per round

    def cooperation_rate(self, player: int = 0) -> float:
        return sum(1 for r in self.history if r[player] is Action.C) / len(self.history)


def play_match(a: WeightedAutomaton, b: WeightedAutomaton, rounds: int,
               rng: np.random.Generator, table: PayoffTable = TABLE1) -> MatchResult:
    """Sample one match. Consumes exactly ``rounds * 2`` uniforms from ``rng``."""
    if rounds < 1:
        raise ParameterError("rounds must be >= 1")
    u = rng.random((rounds, 2))
    # probability of moving to state 1 (betray), indexed [perceived][current]
    to_d_a = [[float(m[s, 1]) for s in range(2)] for m in a.trans]
    to_d_b = [[float(m[s, 1]) for s in range(2)] for m in b.trans]
    sa = int(u[0, 0] < a.entry[1])
    sb = int(u[0, 1] < b.entry[1])
    history = [(Action(sa), Action(sb))]
    pa, pb = table.payoff[sa][sb]
    for t in range(1, rounds):
        sa, sb = int(u[t, 0] < to_d_a[sb][sa]), int(u[t, 1] < to_d_b[sa][sb])
        history.append((Action(sa), Action(sb)))
        ga, gb = table.payoff[sa][sb]
        pa += ga
        pb += gb
    return MatchResult(pa, pb, tuple(history))


def play_many(a: WeightedAutomaton, b: WeightedAutomaton, rounds: int, runs: int,
              rng: np.random.Generator, table: PayoffTable = TABLE1) -> np.ndarray:
    """Total payoffs of ``runs`` independent matches, shape ``(runs, 2)``.

    Same sampling rule as :func:`play_match`; with ``runs=1`` both consume the
    stream identically and give the same totals.
    """
    if rounds < 1 or runs < 1:
        raise ParameterError("rounds and runs must be >= 1")
    u = rng.random((rounds, runs, 2))
    to_d_a = np.array([[m[s, 1] for s in range(2)] for m in a.trans])
    to_d_b = np.array([[m[s, 1] for s in range(2)] for m in b.trans])
    own, other = table.own_matrix(), table.other_matrix()
    sa = (u[0, :, 0] < a.entry[1]).astype(np.intp)
    sb = (u[0, :, 1] < b.entry[1]).astype(np.intp)
    total = np.zeros((runs, 2))
    total[:, 0] += own[sa, sb]
    total[:, 1] += other[sa, sb]
    for t in range(1, rounds):
        sa, sb = (u[t, :, 0] < to_d_a[sb, sa]).astype(np.intp), (u[t, :, 1] < to_d_b[sa, sb]).astype(np.intp)
        total[:, 0] += own[sa, sb]
        total[:, 1] += other[sa, sb]
    return total


def joint_distributions(a: WeightedAutomaton, b: WeightedAutomaton, rounds: int):
    """Yield the 2x2 distribution of (action_a, action_b) for each round."""
    joint = np.outer(a.entry, b.entry)
    ta, tb = np.asarray(a.trans), np.asarray(b.trans)
    for t in range(rounds):
        yield joint
        if t + 1 < rounds:
            # new[i', j'] = sum_{i,j} joint[i,j] * ta[j][i,i'] * tb[i][j,j']
            joint = np.einsum("ij,jix,ijy->xy", joint, ta, tb)


def expected_payoff(a: WeightedAutomaton, b: WeightedAutomaton, rounds: int,
                    table: PayoffTable = TABLE1) -> tuple:
    """Exact expected cumulative payoffs by forward propagation of the joint state."""
    if rounds < 1:
        raise ParameterError("rounds must be >= 1")
    own, other = table.own_matrix(), table.other_matrix()
    ea = eb = 0.0
    for joint in joint_distributions(a, b, rounds):
        ea += float(np.sum(joint * own))
        eb += float(np.sum(joint * other))
    return ea, eb


def expected_cooperation(a: WeightedAutomaton, b: WeightedAutomaton, rounds: int) -> float:
    """Expected fraction of rounds in which ``a`` cooperates."""
    return sum(float(j[0].sum()) for j in joint_distributions(a, b, rounds)) / rounds


def tournament_fitness(a: WeightedAutomaton, s0: WeightedAutomaton, rounds: int = 64, repeats: int = 1,
                       rng: np.random.Generator | None = None, mode: str = "sample",
                       table: PayoffTable = TABLE1) -> float:
    """Sum of ``a``'s payoffs over ``repeats`` matches of ``rounds`` plays against ``s0``.

    ``mode="expected"`` replaces the sampled matches by their exact expectation,
    which makes the fitness deterministic.
    """
    if rounds < 1 or repeats < 1:
        raise ParameterError("rounds and repeats must be >= 1")
    if mode == "expected":
        return repeats * expected_payoff(a, s0, rounds, table)[0]
    if mode != "sample":
        raise ConfigError(f"unknown fitness mode {mode!r}")
    if rng is None:
        raise ParameterError("sampled fitness needs a random generator")
    return float(sum(play_match(a, s0, rounds, rng, table).payoff_a for _ in range(repeats)))


# -- evolution -----------------------------------------------------------------

STAT_COLUMNS = ("generation", "fit_min", "fit_mean", "fit_max", "coop_rate")


@dataclass
class IpdRun:
    config: dict
    stats: list            # one dict per generation, 0..generations
    initial: Population
    final: Population


def random_strategy_population(size: int, rng: np.random.Generator) -> tuple:
    return tuple(build_strategy(StrategyParams(*rng.random(6))) for _ in range(size))


def _generation_stats(pop: Population, s0, rounds, repeats, seed, mode) -> dict:
    fits, coops = [], []
    for idx, a in enumerate(pop.members):
        if mode == "expected":
            fits.append(repeats * expected_payoff(a, s0, rounds)[0])
            coops.append(expected_cooperation(a, s0, rounds))
        else:
            rng = substream(seed, STATS, pop.generation, idx)
            matches = [play_match(a, s0, rounds, rng) for _ in range(repeats)]
            fits.append(float(sum(m.payoff_a for m in matches)))
            coops.append(sum(m.cooperation_rate(0) for m in matches) / repeats)
    params = np.array([strategy_params(a).as_tuple() for a in pop.members])
    row = {
        "generation": pop.generation,
        "fit_min": min(fits),
        "fit_mean": math.fsum(fits) / len(fits),
        "fit_max": max(fits),
        "coop_rate": math.fsum(coops) / len(coops),
    }
    row.update({f"p{i + 1}_mean": float(v) for i, v in enumerate(params.mean(axis=0))})
    return row


def evolve_ipd(pop_size: int, generations: int, s0: WeightedAutomaton, rounds: int = 64, repeats: int = 1,
               cfg: GeneticConfig | None = None, seed: int | None = None, fitness_mode: str = "sample",
               initial=None, observer=None) -> IpdRun:
    """Evolve random strategies against the fixed opponent ``s0``.

    Statistics for each generation are measured on fresh matches (their own
    substreams), so selection noise does not leak into the reported numbers.
    ``observer(population)`` is called after every generation.
    """
    if pop_size < 2 or pop_size % 2:
        raise ConfigError(f"pop_size must be even and >= 2, got {pop_size}")
    if generations < 0:
        raise ConfigError("generations must be >= 0")
    cfg = cfg or GeneticConfig()
    if seed is not None:
        cfg = GeneticConfig(**{**cfg.__dict__, "rng_seed": seed})
    if not cfg.stochastic_mode:
        raise ConfigError("strategy evolution requires stochastic_mode")
    seed = cfg.rng_seed
    check_strategy(s0)
    members = initial if initial is not None else random_strategy_population(pop_size, substream(seed, INIT))
    pop = Population(tuple(members), 0)
    if len(pop) != pop_size:
        raise ConfigError("initial population does not match pop_size")

    def fitness(candidate, slot, rng):
        return tournament_fitness(candidate, s0, rounds, repeats, rng, fitness_mode)

    start = pop
    stats = [_generation_stats(pop, s0, rounds, repeats, seed, fitness_mode)]
    for _ in range(generations):
        pop = evolve_generation(pop, fitness, cfg)
        if observer is not None:
            observer(pop)
        stats.append(_generation_stats(pop, s0, rounds, repeats, seed, fitness_mode))
    config = {
        "pop_size": pop_size, "generations": generations, "rounds": rounds, "repeats": repeats,
        "fitness_mode": fitness_mode, "genetics": cfg.to_dict(),
    }
    return IpdRun(config, stats, start, pop)
