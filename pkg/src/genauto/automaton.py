"""Automata with multiplicities in matrix form.

An automaton over alphabet ``A`` with ``n`` states is the triplet
(entry, trans, final): a row vector of entry costs, one ``n x n`` matrix per
letter, and a column vector of final costs. The weight of a word
``w = a1...am`` is ``entry @ trans[a1] @ ... @ trans[am] @ final``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import AlphabetError, ComparabilityError, ShapeError
from .semiring import (
    SemiringKind,
    as_matrix,
    as_vector,
    bilinear_form,
    hoelder_norm,
    identity,
    mat_mul,
)

DEFAULT_ALPHA = 2.0
DEFAULT_MAX_LEN = 6
STOCHASTIC_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class WeightedAutomaton:
    alphabet: tuple
    entry: np.ndarray
    final: np.ndarray
    trans: tuple  # one n x n matrix per letter, in alphabet order
    semiring: SemiringKind = SemiringKind.REAL

    def __post_init__(self):
        alphabet = tuple(self.alphabet)
        if not alphabet:
            raise AlphabetError("alphabet must contain at least one letter")
        if len(set(alphabet)) != len(alphabet):
            raise AlphabetError(f"duplicate letters in alphabet {alphabet!r}")
        entry = as_vector(self.entry, self.semiring)
        final = as_vector(self.final, self.semiring)
        n = entry.shape[0]
        if final.shape[0] != n:
            raise ShapeError(f"entry has {n} states but final has {final.shape[0]}")
        trans = tuple(as_matrix(m, self.semiring) for m in self.trans)
        if len(trans) != len(alphabet):
            raise ShapeError(f"{len(alphabet)} letters but {len(trans)} matrices")
        for letter, m in zip(alphabet, trans):
            if m.shape != (n, n):
                raise ShapeError(f"matrix for {letter!r} has shape {m.shape}, expected {(n, n)}")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "entry", entry)
        object.__setattr__(self, "final", final)
        object.__setattr__(self, "trans", trans)

    @classmethod
    def from_mapping(cls, alphabet, entry, final, trans: Mapping, semiring=SemiringKind.REAL):
        """Build from a letter -> matrix mapping."""
        missing = [a for a in alphabet if a not in trans]
        if missing or len(trans) != len(alphabet):
            raise AlphabetError(f"transition letters {sorted(trans)} do not match alphabet {list(alphabet)}")
        return cls(tuple(alphabet), entry, final, tuple(trans[a] for a in alphabet), semiring)

    @property
    def n(self) -> int:
        return self.entry.shape[0]

    @property
    def k(self) -> int:
        return len(self.alphabet)

    def matrix(self, letter) -> np.ndarray:
        try:
            return self.trans[self.alphabet.index(letter)]
        except ValueError:
            raise AlphabetError(f"letter {letter!r} not in alphabet {self.alphabet!r}") from None

    def replace(self, *, entry=None, final=None, trans=None) -> "WeightedAutomaton":
        return WeightedAutomaton(
            self.alphabet,
            self.entry if entry is None else entry,
            self.final if final is None else final,
            self.trans if trans is None else tuple(trans),
            self.semiring,
        )

    def __eq__(self, other):
        if not isinstance(other, WeightedAutomaton):
            return NotImplemented
        return (
            self.alphabet == other.alphabet
            and self.semiring is other.semiring
            and self.n == other.n
            and np.array_equal(self.entry, other.entry)
            and np.array_equal(self.final, other.final)
            and all(np.array_equal(x, y) for x, y in zip(self.trans, other.trans))
        )

    __hash__ = None

    def __repr__(self):
        return f"WeightedAutomaton(alphabet={self.alphabet!r}, n={self.n}, semiring={self.semiring.value})"


def word_matrix(a: WeightedAutomaton, word: Sequence) -> np.ndarray:
    """mu(w): product of the letter matrices, identity for the empty word."""
    m = identity(a.n, a.semiring)
    for letter in word:
        m = mat_mul(m, a.matrix(letter))
    return m


def word_weight(a: WeightedAutomaton, word: Sequence):
    """entry . mu(word) . final. Strings are read one character per letter."""
    return bilinear_form(a.entry, word_matrix(a, word), a.final)


def enumerate_words(alphabet: Sequence, max_len: int):
    """All words of length <= max_len, shortest first, lexicographic in alphabet order."""
    for length in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=length)


@dataclass(frozen=True)
class BehaviorTable:
    max_len: int
    words: tuple
    weights: np.ndarray

    def __getitem__(self, word):
        return self.weights[self.words.index(tuple(word))]

    def __len__(self):
        return len(self.words)

    def as_dict(self) -> dict:
        return dict(zip(self.words, self.weights.tolist()))


def behavior(a: WeightedAutomaton, max_len: int = DEFAULT_MAX_LEN) -> BehaviorTable:
    """Truncated behavior series: the weight of every word of length <= max_len."""
    if max_len < 0:
        raise ValueError("max_len must be >= 0")
    words = []
    weights = []
    # breadth-first over word prefixes so each mu(w) costs one product
    layer = [((), a.entry)]
    for length in range(max_len + 1):
        nxt = []
        for word, row in layer:
            words.append(word)
            weights.append(float(mat_mul(row[None, :], a.final[:, None])[0, 0]))
            if length < max_len:
                for letter, m in zip(a.alphabet, a.trans):
                    nxt.append((word + (letter,), mat_mul(row[None, :], m)[0]))
        layer = nxt
    return BehaviorTable(max_len, tuple(words), np.asarray(weights, dtype=np.float64))


def vectorize(a: WeightedAutomaton) -> np.ndarray:
    """Coordinates ``[entry | final | trans[a1] row-major | ... | trans[ak] row-major]``.

    Length is ``k*n**2 + 2*n``.
    """
    parts = [a.entry, a.final] + [m.ravel() for m in a.trans]
    return np.concatenate([np.asarray(p, dtype=np.float64) for p in parts])


def from_vector(alphabet: Sequence, n: int, v, semiring=SemiringKind.REAL) -> WeightedAutomaton:
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v, dtype=np.float64)
    k = len(alphabet)
    if v.shape != (k * n * n + 2 * n,):
        raise ShapeError(f"vector of length {v.size} does not fit k={k}, n={n}")
    mats = v[2 * n:].reshape(k, n, n)
    return WeightedAutomaton(tuple(alphabet), v[:n], v[n:2 * n], tuple(mats), semiring)


def check_comparable(a1: WeightedAutomaton, a2: WeightedAutomaton, *, same_n: bool = True):
    if a1.alphabet != a2.alphabet:
        raise ComparabilityError(f"alphabets differ: {a1.alphabet!r} vs {a2.alphabet!r}")
    if a1.semiring is not a2.semiring:
        raise ComparabilityError("semirings differ")
    if same_n and a1.n != a2.n:
        raise ComparabilityError(f"state counts differ: {a1.n} vs {a2.n}")


def automaton_distance(a1: WeightedAutomaton, a2: WeightedAutomaton, alpha: float = DEFAULT_ALPHA) -> float:
    check_comparable(a1, a2)
    if a1.semiring is not SemiringKind.REAL:
        raise ComparabilityError("distance is defined for Real automata only")
    return hoelder_norm(vectorize(a1) - vectorize(a2), alpha)


def behavior_gap(a1: WeightedAutomaton, a2: WeightedAutomaton,
                 max_len: int = DEFAULT_MAX_LEN, alpha: float = DEFAULT_ALPHA) -> float:
    """Hölder norm of the difference of two truncated behaviors.

    State counts may differ; only the alphabets must agree.
    """
    check_comparable(a1, a2, same_n=False)
    b1 = behavior(a1, max_len).weights
    b2 = behavior(a2, max_len).weights
    return hoelder_norm(b1 - b2, alpha)


def is_stochastic(a: WeightedAutomaton, tol: float = STOCHASTIC_TOL) -> bool:
    """Entry vector and every transition row are probability distributions."""
    if a.semiring is not SemiringKind.REAL:
        return False
    if np.any(a.entry < -tol) or abs(a.entry.sum() - 1.0) > tol:
        return False
    for m in a.trans:
        if np.any(m < -tol) or np.any(np.abs(m.sum(axis=1) - 1.0) > tol):
            return False
    return True


# -- serialization -----------------------------------------------------------

def _scalar(x, semiring):
    return int(bool(x)) if semiring is SemiringKind.BOOLEAN else float(x)


def to_dict(a: WeightedAutomaton) -> dict:
    s = a.semiring
    return {
        "semiring": s.value,
        "alphabet": list(a.alphabet),
        "n": a.n,
        "entry": [_scalar(x, s) for x in a.entry],
        "final": [_scalar(x, s) for x in a.final],
        "trans": {
            str(letter): [[_scalar(x, s) for x in row] for row in m]
            for letter, m in zip(a.alphabet, a.trans)
        },
    }


def from_dict(doc: dict) -> WeightedAutomaton:
    try:
        semiring = SemiringKind(doc["semiring"])
        alphabet = tuple(doc["alphabet"])
        n = int(doc["n"])
        a = WeightedAutomaton.from_mapping(alphabet, doc["entry"], doc["final"], doc["trans"], semiring)
    except KeyError as exc:
        raise ShapeError(f"automaton document lacks field {exc}") from None
    if a.n != n:
        raise ShapeError(f"document declares n={n} but vectors have {a.n} entries")
    return a


def dumps(a: WeightedAutomaton, indent: int | None = 2) -> str:
    # json writes floats with repr(), the shortest string that round-trips exactly
    return json.dumps(to_dict(a), indent=indent)


def loads(text: str) -> WeightedAutomaton:
    return from_dict(json.loads(text))


def save(a: WeightedAutomaton, path) -> None:
    Path(path).write_text(dumps(a) + "\n")


def load(path) -> WeightedAutomaton:
    return loads(Path(path).read_text())


def random_automaton(rng: np.random.Generator, n: int, alphabet: Iterable = ("a", "b"),
                     stochastic: bool = False) -> WeightedAutomaton:
    """Random Real automaton; uniform [0,1] entries, or simplex rows when stochastic."""
    alphabet = tuple(alphabet)
    if stochastic:
        entry = rng.dirichlet(np.ones(n))
        final = rng.random(n)
        trans = tuple(rng.dirichlet(np.ones(n), size=n) for _ in alphabet)
    else:
        entry = rng.random(n)
        final = rng.random(n)
        trans = tuple(rng.random((n, n)) for _ in alphabet)
    return WeightedAutomaton(alphabet, entry, final, trans)
