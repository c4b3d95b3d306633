"""Behavior semi-distance between agents and emergence-driving fitness.

Each agent's behavior automaton is summarised by an evaluation matrix ``M``:
``M[i, j] = entry[i] * P(i, j) * final[j]`` where ``W`` is the letter-summed
transition matrix and ``P(i, j)`` sums, over every simple path ``i -> ... -> j``
(no state visited twice), the product of ``W`` weights along the path.
``P(i, i) = 1``: only the empty path, since a return to ``i`` repeats a state.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Hashable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .automaton import WeightedAutomaton
from .errors import ComparabilityError, ConfigError, ParameterError
from .genetics import GeneticConfig, Population, evolve_generation
from .ipd import StrategyParams, build_strategy
from .semiring import SemiringKind, hoelder_norm

INF = math.inf

STAT_COLUMNS = ("generation", "fit_min", "fit_mean", "fit_max", "mean_within_nbhd_dist", "n_clusters")


@dataclass(frozen=True, eq=False)
class Agent:
    id: Hashable
    behavior: WeightedAutomaton
    position: tuple | None = None


def letter_sum(a: WeightedAutomaton) -> np.ndarray:
    return np.sum(np.asarray(a.trans, dtype=np.float64), axis=0)


def simple_path_weights(w: np.ndarray) -> np.ndarray:
    """P[i, j]: total weight of simple paths from i to j, identity on the diagonal.

    Dynamic programming over visited-state subsets: ``reach[mask][v]`` is the
    weight of simple paths from the source that visit exactly ``mask`` and end
    at ``v``. Cost is O(n * 2**n * n**2).
    """
    n = w.shape[0]
    p = np.eye(n)
    full = 1 << n
    for src in range(n):
        reach = np.zeros((full, n))
        reach[1 << src, src] = 1.0
        # masks only grow, so increasing numeric order is a valid topological order
        for mask in range(1, full):
            if not mask >> src & 1:
                continue
            row = reach[mask]
            ends = np.nonzero(row)[0]
            for v in ends:
                for u in range(n):
                    if mask >> u & 1 or w[v, u] == 0:
                        continue
                    reach[mask | 1 << u, u] += row[v] * w[v, u]
        totals = reach.sum(axis=0)
        for dst in range(n):
            if dst != src:
                p[src, dst] = totals[dst]
    return p


def evaluate(a: WeightedAutomaton) -> np.ndarray:
    """Evaluation matrix of acyclic successful paths, letter-summed per transition."""
    if a.semiring is not SemiringKind.REAL:
        raise ComparabilityError("evaluation matrices are defined for Real automata")
    p = simple_path_weights(letter_sum(a))
    return a.entry[:, None] * p * a.final[None, :]


def _behavior(x):
    return x.behavior if isinstance(x, Agent) else x


def semi_distance(x, y, alpha: float = 2.0) -> float:
    """Entrywise Hölder norm of the difference of two evaluation matrices.

    Accepts agents or bare automata.
    """
    ex, ey = evaluate(_behavior(x)), evaluate(_behavior(y))
    if ex.shape != ey.shape:
        raise ComparabilityError(f"evaluation shapes differ: {ex.shape} vs {ey.shape}")
    return hoelder_norm(ex - ey, alpha)


def fitness_from_distances(distances: Sequence[float]) -> float:
    """card / sum of squares, infinite when the sum vanishes."""
    total = math.fsum(d * d for d in distances)
    if total == 0:
        return INF
    return len(distances) / total


@dataclass(frozen=True, eq=False)
class Neighborhood:
    center: Agent
    members: tuple
    criterium: str = "all"

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if any(m is self.center or m.id == self.center.id for m in self.members):
            raise ConfigError("an agent cannot be its own neighbor")


def agent_fitness(x, neighbors, alpha: float = 2.0) -> float:
    """Neighborhood fitness of ``x``.

    ``neighbors`` is a :class:`Neighborhood` centred on ``x`` or a plain
    sequence of agents (or automata) not containing ``x``.
    """
    if isinstance(neighbors, Neighborhood):
        if neighbors.center is not x:
            raise ParameterError("neighborhood is centred on another agent")
        neighbors = neighbors.members
    ex = evaluate(_behavior(x))
    ds = [hoelder_norm(ex - evaluate(_behavior(y)), alpha) for y in neighbors]
    return fitness_from_distances(ds)


def compose_fitness(f_emergent: float, f_problem: float, mode: str = "product", w: float = 0.5) -> float:
    if not (f_problem >= 0 and math.isfinite(f_problem)):
        raise ParameterError(f"problem fitness must be finite and >= 0, got {f_problem}")
    if mode == "product":
        if f_problem == 0:
            return 0.0
        return f_emergent * f_problem
    if mode == "weighted_sum":
        if not 0 <= w <= 1:
            raise ParameterError(f"weight must lie in [0, 1], got {w}")
        normalized = 1.0 if math.isinf(f_emergent) else f_emergent / (1.0 + f_emergent)
        return w * normalized + (1 - w) * f_problem
    raise ConfigError(f"unknown composition mode {mode!r}")


# -- neighborhoods -------------------------------------------------------------

@dataclass(frozen=True)
class NeighborhoodSpec:
    kind: str = "all"             # "all", "spatial" or "graph"
    radius: float | None = None
    adjacency: dict | None = None  # agent id -> iterable of neighbor ids

    def __post_init__(self):
        if self.kind not in ("all", "spatial", "graph"):
            raise ConfigError(f"unknown neighborhood kind {self.kind!r}")
        if self.kind == "spatial" and (self.radius is None or self.radius < 0):
            raise ConfigError("spatial neighborhoods need a radius >= 0")
        if self.kind == "graph" and self.adjacency is None:
            raise ConfigError("graph neighborhoods need an adjacency list")

    @classmethod
    def from_dict(cls, doc: dict) -> "NeighborhoodSpec":
        unknown = set(doc) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ConfigError(f"unknown neighborhood keys: {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.radius is not None:
            d["radius"] = self.radius
        if self.adjacency is not None:
            d["adjacency"] = {str(k): list(v) for k, v in self.adjacency.items()}
        return d


def neighborhoods(agents: Sequence[Agent], spec: NeighborhoodSpec) -> list:
    """Neighbor index lists, one per agent; an agent is never its own neighbor."""
    n = len(agents)
    if spec.kind == "all":
        return [[j for j in range(n) if j != i] for i in range(n)]
    if spec.kind == "spatial":
        if any(a.position is None for a in agents):
            raise ConfigError("spatial neighborhoods need a position on every agent")
        pos = np.array([a.position for a in agents], dtype=np.float64)
        dist = np.sqrt(((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=-1))
        return [[j for j in range(n) if j != i and dist[i, j] <= spec.radius] for i in range(n)]
    # ids are matched by their string form, as JSON object keys are strings
    index = {str(a.id): i for i, a in enumerate(agents)}
    adj = {str(k): [str(m) for m in v] for k, v in spec.adjacency.items()}
    out = []
    for i, a in enumerate(agents):
        members = adj.get(str(a.id), [])
        unknown = [m for m in members if m not in index]
        if unknown:
            raise ConfigError(f"adjacency of {a.id!r} names unknown agents {unknown}")
        out.append(sorted({index[m] for m in members} - {i}))
    return out


def pairwise_distances(evals: Sequence[np.ndarray], alpha: float = 2.0) -> np.ndarray:
    n = len(evals)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = hoelder_norm(evals[i] - evals[j], alpha)
    return d


def _sort_key(x):
    return (type(x).__name__, x)


def detect_aggregations(agents: Sequence[Agent], epsilon: float, alpha: float = 2.0) -> list:
    """Connected components of the graph linking agents within ``epsilon``.

    Each cluster is a sorted list of agent ids; clusters are ordered by their
    smallest id.
    """
    if epsilon < 0:
        raise ParameterError("epsilon must be >= 0")
    if not agents:
        return []
    d = pairwise_distances([evaluate(a.behavior) for a in agents], alpha)
    return _components(d <= epsilon, [a.id for a in agents])


def _components(adjacent: np.ndarray, ids: Sequence) -> list:
    _, labels = connected_components(csr_matrix(adjacent), directed=False)
    groups = {}
    for ident, label in zip(ids, labels):
        groups.setdefault(int(label), []).append(ident)
    clusters = [sorted(g, key=_sort_key) for g in groups.values()]
    return sorted(clusters, key=lambda c: _sort_key(c[0]))


# -- evolution -----------------------------------------------------------------

@dataclass
class EmergenceRun:
    config: dict
    stats: list
    initial: tuple     # agents at generation 0
    final: tuple       # agents after the last generation
    clusters: list     # aggregations of the final population


def evolve_emergent(agents: Sequence[Agent], spec: NeighborhoodSpec, generations: int,
                    cfg: GeneticConfig | None = None, seed: int | None = None,
                    f_problem: Callable | None = None, compose_mode: str = "product", compose_weight: float = 0.5,
                    epsilon: float = 0.05, alpha: float = 2.0, observer=None) -> EmergenceRun:
    """Evolve agent behaviors under the neighborhood fitness.

    A candidate for slot ``s`` is scored against the current behaviors of the
    neighbors of slot ``s``; neighborhoods are rebuilt at every generation.
    ``f_problem(automaton) -> float`` optionally composes a task fitness.
    """
    agents = tuple(agents)
    if len(agents) < 2 or len(agents) % 2:
        raise ConfigError(f"agent count must be even and >= 2, got {len(agents)}")
    if generations < 0:
        raise ConfigError("generations must be >= 0")
    cfg = cfg or GeneticConfig()
    if seed is not None:
        cfg = GeneticConfig(**{**cfg.__dict__, "rng_seed": seed})
    pop = Population(tuple(a.behavior for a in agents), 0)

    def with_behaviors(p):
        return tuple(Agent(a.id, b, a.position) for a, b in zip(agents, p.members))

    def stats_row(p):
        current = with_behaviors(p)
        nb = neighborhoods(current, spec)
        evals = [evaluate(b) for b in p.members]
        d = pairwise_distances(evals, alpha)
        fits = [fitness_from_distances([d[i, j] for j in nb[i]]) for i in range(len(p))]
        if f_problem is not None:
            fits = [compose_fitness(f, f_problem(b), compose_mode, compose_weight) for f, b in zip(fits, p.members)]
        within = [float(np.mean([d[i, j] for j in nb[i]])) for i in range(len(p)) if nb[i]]
        finite = [f for f in fits if math.isfinite(f)]
        return {
            "generation": p.generation,
            "fit_min": min(fits),
            "fit_mean": INF if len(finite) < len(fits) else math.fsum(fits) / len(fits),
            "fit_max": max(fits),
            "mean_within_nbhd_dist": math.fsum(within) / len(within) if within else 0.0,
            "n_clusters": len(_components(d <= epsilon, [a.id for a in current])),
        }

    stats = [stats_row(pop)]
    for _ in range(generations):
        current = with_behaviors(pop)
        nb = neighborhoods(current, spec)
        evals = [evaluate(b) for b in pop.members]

        def fitness(candidate, slot, rng, nb=nb, evals=evals):
            ec = evaluate(candidate)
            f = fitness_from_distances([hoelder_norm(ec - evals[j], alpha) for j in nb[slot]])
            if f_problem is not None:
                f = compose_fitness(f, f_problem(candidate), compose_mode, compose_weight)
            return f

        pop = evolve_generation(pop, fitness, cfg)
        if observer is not None:
            observer(pop)
        stats.append(stats_row(pop))

    final = with_behaviors(pop)
    config = {
        "agents": len(agents), "generations": generations, "neighborhood": spec.to_dict(),
        "epsilon": epsilon, "alpha": alpha, "compose_mode": compose_mode if f_problem else None,
        "genetics": cfg.to_dict(),
    }
    return EmergenceRun(config, stats, agents, final, detect_aggregations(final, epsilon, alpha))


def clustered_agents(rng: np.random.Generator, count: int, centers: int = 2, spread: float = 0.05,
                     center_params=None) -> tuple:
    """Strategy-automaton agents with parameters scattered around random centers."""
    if center_params is None:
        center_params = rng.random((centers, 6))
    center_params = np.asarray(center_params, dtype=np.float64)
    out = []
    for i in range(count):
        c = center_params[i % len(center_params)]
        p = np.clip(c + rng.normal(0.0, spread, 6), 0.0, 1.0)
        out.append(Agent(i, build_strategy(StrategyParams(*p))))
    return tuple(out)
