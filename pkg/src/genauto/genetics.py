"""Genetic operators on the matrix representation of automata.

The chromosome of an automaton is its sequence of transition matrices in
alphabet order; each matrix row is an allele. Entry and final vectors are not
genetic material and are inherited unchanged from the parent.

Randomness: every draw comes from a substream of one 64-bit master seed,
keyed by ``(purpose, generation, index)`` (see :func:`substream`), so a
generation's outcome does not depend on the order in which pairs or fitness
calls are evaluated.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .automaton import WeightedAutomaton, check_comparable
from .errors import ComparabilityError, ConfigError, ParameterError

# substream purposes
INIT, PAIRING, PAIR, STATS = 0, 1, 2, 3

SAMPLERS = ("auto", "simplex", "uniform", "identity")
TIEBREAKS = ("prefer_parents", "prefer_children")


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``key`` derived from the master ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class GeneticConfig:
    # "auto" -> simplex rows in stochastic mode, i.i.d. U[0,1] entries otherwise.
    # A callable ``(old_row, rng) -> new_row`` is also accepted.
    mutation_row_sampler: str | Callable = "auto"
    stochastic_mode: bool = True
    crossover_row_count: int | str = "random"
    rng_seed: int = 0
    selection_tiebreak: str = "prefer_parents"

    def __post_init__(self):
        if isinstance(self.mutation_row_sampler, str) and self.mutation_row_sampler not in SAMPLERS:
            raise ConfigError(f"unknown mutation_row_sampler {self.mutation_row_sampler!r}")
        if self.selection_tiebreak not in TIEBREAKS:
            raise ConfigError(f"unknown selection_tiebreak {self.selection_tiebreak!r}")
        c = self.crossover_row_count
        if c != "random" and not (isinstance(c, int) and not isinstance(c, bool) and c >= 0):
            raise ConfigError(f"crossover_row_count must be 'random' or a count >= 0, got {c!r}")
        if not 0 <= int(self.rng_seed) < 2 ** 64:
            raise ConfigError("rng_seed must fit in 64 unsigned bits")

    @classmethod
    def from_dict(cls, doc: dict) -> "GeneticConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - names
        if unknown:
            raise ConfigError(f"unknown genetics keys: {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if callable(self.mutation_row_sampler):
            d["mutation_row_sampler"] = getattr(self.mutation_row_sampler, "__name__", "custom")
        return d


def chromosome(a: WeightedAutomaton) -> tuple:
    """The automaton's transition matrices in alphabet order."""
    return a.trans


@dataclass(frozen=True)
class TupleRecord:
    """Outcome of one parents+children selection."""
    slots: tuple            # population indices of the two parents
    fitness: tuple          # (parent_a, parent_b, child_a, child_b)
    survivors: tuple        # indices into the 4 candidates, in slot order


@dataclass(frozen=True)
class Population:
    members: tuple
    generation: int = 0
    fitness: tuple | None = None     # fitness of members as seen by the last selection
    selections: tuple = field(default=(), repr=False)

    def __post_init__(self):
        members = tuple(self.members)
        if len(members) < 2 or len(members) % 2:
            raise ConfigError(f"population size must be even and >= 2, got {len(members)}")
        for m in members[1:]:
            try:
                check_comparable(members[0], m)
            except ComparabilityError as exc:
                raise ConfigError(f"inhomogeneous population: {exc}") from None
        object.__setattr__(self, "members", members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]


def duplicate(a: WeightedAutomaton) -> WeightedAutomaton:
    return WeightedAutomaton(
        a.alphabet, a.entry.copy(), a.final.copy(), tuple(m.copy() for m in a.trans), a.semiring
    )


def crossover(a: WeightedAutomaton, b: WeightedAutomaton, rows) -> tuple:
    """Swap the given rows of every letter's matrix between ``a`` and ``b``."""
    check_comparable(a, b)
    rows = sorted(set(int(r) for r in rows))
    if rows and (rows[0] < 0 or rows[-1] >= a.n):
        raise ParameterError(f"row indices {rows} out of range for n={a.n}")
    ta, tb = [], []
    for ma, mb in zip(a.trans, b.trans):
        ca, cb = ma.copy(), mb.copy()
        ca[rows], cb[rows] = mb[rows], ma[rows]
        ta.append(ca)
        tb.append(cb)
    return a.replace(trans=ta), b.replace(trans=tb)


def crossover_rows(n: int, cfg: GeneticConfig, rng: np.random.Generator) -> list:
    """Row set for one pairing, shared by all letters."""
    count = cfg.crossover_row_count
    if count == "random":
        if n < 2:
            return []
        # uniform over nonempty proper subsets, encoded as bitmasks 1 .. 2**n - 2
        mask = int(rng.integers(1, 2 ** n - 1))
        return [r for r in range(n) if mask >> r & 1]
    if count > n:
        raise ConfigError(f"crossover_row_count {count} exceeds n={n}")
    return sorted(rng.choice(n, size=count, replace=False).tolist())


def _sample_row(old: np.ndarray, cfg: GeneticConfig, rng: np.random.Generator) -> np.ndarray:
    sampler = cfg.mutation_row_sampler
    if callable(sampler):
        return np.asarray(sampler(old, rng), dtype=old.dtype)
    if sampler == "auto":
        sampler = "simplex" if cfg.stochastic_mode else "uniform"
    n = old.shape[0]
    if sampler == "identity":
        return old.copy()
    if sampler == "simplex":
        row = rng.dirichlet(np.ones(n))
        return row / row.sum()
    return rng.random(n)


def mutate(a: WeightedAutomaton, cfg: GeneticConfig, rng: np.random.Generator) -> WeightedAutomaton:
    """Replace one uniformly chosen row of each letter's matrix by a fresh row."""
    trans = []
    for m in a.trans:
        m = m.copy()
        r = int(rng.integers(a.n))
        m[r] = _sample_row(m[r], cfg, rng)
        trans.append(m)
    return a.replace(trans=trans)


def random_pairing(size: int, rng: np.random.Generator) -> list:
    perm = rng.permutation(size)
    return [(int(perm[i]), int(perm[i + 1])) for i in range(0, size, 2)]


def _select(fitness: Sequence[float], tiebreak: str) -> tuple:
    # candidates 0,1 are parents, 2,3 children
    if tiebreak == "prefer_parents":
        order = sorted(range(4), key=lambda i: (-fitness[i], i))
    else:
        order = sorted(range(4), key=lambda i: (-fitness[i], (i + 2) % 4))
    return tuple(sorted(order[:2]))


def evolve_generation(pop: Population, fitness: Callable, cfg: GeneticConfig, executor=None) -> Population:
    """One reproduction step over the whole population.

    ``fitness(candidate, slot, rng)`` scores a candidate automaton that would
    occupy population index ``slot``; parents are scored at their own slot and
    each child at the slot of the parent whose entry/final vectors it carries.
    Members are paired by a random perfect matching; each pair yields two
    children (duplicate, crossover, mutate) and the best two of the four
    survive into the parents' slots.
    """
    size = len(pop)
    if size % 2:
        raise ConfigError(f"population size must be even, got {size}")
    gen = pop.generation + 1
    seed = cfg.rng_seed
    pairs = random_pairing(size, substream(seed, PAIRING, gen))

    def breed(index_pair):
        index, (i, j) = index_pair
        rng = substream(seed, PAIR, gen, index)
        a, b = pop.members[i], pop.members[j]
        ca, cb = crossover(duplicate(a), duplicate(b), crossover_rows(a.n, cfg, rng))
        ca, cb = mutate(ca, cfg, rng), mutate(cb, cfg, rng)
        candidates = (a, b, ca, cb)
        slots = (i, j, i, j)
        fit = tuple(float(fitness(c, s, rng)) for c, s in zip(candidates, slots))
        keep = _select(fit, cfg.selection_tiebreak)
        return (i, j), candidates, fit, keep

    jobs = list(enumerate(pairs))
    results = list(executor.map(breed, jobs)) if executor is not None else [breed(job) for job in jobs]

    members = list(pop.members)
    fitness_out = [0.0] * size
    records = []
    for (i, j), candidates, fit, keep in results:
        for slot, c in zip((i, j), keep):
            members[slot] = candidates[c]
            fitness_out[slot] = fit[c]
        records.append(TupleRecord((i, j), fit, keep))
    return Population(tuple(members), gen, tuple(fitness_out), tuple(records))
