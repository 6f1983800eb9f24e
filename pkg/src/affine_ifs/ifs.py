"""Iterated function systems of planar affine maps, with optional probabilities.

Words follow the fibre convention: the word ``(w1, ..., wn)`` denotes
``f_w1 o ... o f_wn``, so its *last* letter acts first. A chaos-game orbit
``x_{n+1} = f_{i_n}(x_n)`` therefore sits at ``f_{(i_n, ..., i_1)}(x_0)``,
i.e. it reads the address newest-letter-first. Stationary statistics do not
depend on that reversal.
"""

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .affine import AffineMap, lipschitz, spectral_norms
from .errors import (
    InvalidIndex,
    MissingProbabilities,
    NonpositiveProbability,
    NoThreshold,
    SizeLimit,
    WrongArity,
)

PROB_SUM_TOL = 1e-12
DEFAULT_WORD_CAP = 2**20
CONTRACTIVE_MARGIN = 1e-12

Word = tuple  # tuple of 1-based map indices


@dataclass(frozen=True, eq=False)
class IfsSystem:
    """Ordered affine maps (1-based in words) plus an optional probability vector.

    Stored as stacked arrays, ``linears`` of shape ``(N, 2, 2)`` and
    ``offsets`` of shape ``(N, 2)``, so kernels can use them directly.
    """

    linears: np.ndarray
    offsets: np.ndarray
    probs: Optional[np.ndarray] = None

    def __post_init__(self):
        lin = np.array(self.linears, dtype=float).reshape(-1, 2, 2)
        off = np.array(self.offsets, dtype=float).reshape(-1, 2)
        if lin.shape[0] == 0 or lin.shape[0] != off.shape[0]:
            raise ValueError("need N >= 1 maps with matching offsets")
        if not (np.isfinite(lin).all() and np.isfinite(off).all()):
            raise ValueError("map entries must be finite")
        lin.flags.writeable = False
        off.flags.writeable = False
        object.__setattr__(self, "linears", lin)
        object.__setattr__(self, "offsets", off)
        if self.probs is not None:
            p = np.array(self.probs, dtype=float).reshape(-1)
            if p.shape[0] != lin.shape[0]:
                raise ValueError(f"{p.shape[0]} probabilities for {lin.shape[0]} maps")
            if (p < 0).any() or not np.isfinite(p).all():
                raise ValueError("probabilities must be finite and >= 0")
            if abs(p.sum() - 1.0) > PROB_SUM_TOL:
                raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
            p.flags.writeable = False
            object.__setattr__(self, "probs", p)

    @classmethod
    def from_maps(cls, maps: Sequence[AffineMap], probs=None) -> "IfsSystem":
        return cls(
            np.stack([m.linear for m in maps]),
            np.stack([m.offset for m in maps]),
            probs,
        )

    @property
    def n_maps(self) -> int:
        return self.linears.shape[0]

    @property
    def maps(self) -> list:
        return [AffineMap(a, b) for a, b in zip(self.linears, self.offsets)]

    def __len__(self):
        return self.n_maps

    def __getitem__(self, i: int) -> AffineMap:
        """1-based access, matching word letters."""
        check_word(self, (i,))
        return AffineMap(self.linears[i - 1], self.offsets[i - 1])

    def with_probs(self, probs) -> "IfsSystem":
        return IfsSystem(self.linears, self.offsets, probs)

    def uniform(self) -> "IfsSystem":
        return self.with_probs(np.full(self.n_maps, 1.0 / self.n_maps))

    def positive_probs(self) -> np.ndarray:
        """The probability vector, checked present and strictly positive."""
        if self.probs is None:
            raise MissingProbabilities("this operation needs a probability vector")
        if (self.probs <= 0).any():
            raise NonpositiveProbability(f"probabilities must be > 0, got {self.probs.tolist()}")
        return self.probs


def check_word(s: IfsSystem, w) -> Word:
    w = tuple(int(c) for c in w)
    if not w:
        raise InvalidIndex("empty word")
    for c in w:
        if not 1 <= c <= s.n_maps:
            raise InvalidIndex(f"letter {c} outside 1..{s.n_maps}")
    return w


def compose_word(s: IfsSystem, w) -> AffineMap:
    """``f_{w1} o f_{w2} o ... o f_{wn}``."""
    w = check_word(s, w)
    a = np.eye(2)
    b = np.zeros(2)
    for c in w:
        # (a, b) o f_c
        b = a @ s.offsets[c - 1] + b
        a = a @ s.linears[c - 1]
    return AffineMap(a, b)


def _word_count(n: int, k: int, cap: int) -> int:
    if k < 1:
        raise ValueError("k must be a positive integer")
    count = n**k
    if count > cap:
        raise SizeLimit(f"{n}**{k} = {count} words exceeds cap {cap}")
    return count


def _iterate_arrays(s: IfsSystem, k: int, cap: int, with_offsets=True):
    """Stacked linears/offsets of all words of length k, lexicographic order."""
    _word_count(s.n_maps, k, cap)
    lin = s.linears
    off = s.offsets
    for _ in range(k - 1):
        # new word = (i,) + old word; first letter is the slowest index
        new_lin = np.einsum("iab,jbc->ijac", s.linears, lin).reshape(-1, 2, 2)
        if with_offsets:
            off = (np.einsum("iab,jb->ija", s.linears, off) + s.offsets[:, None, :]).reshape(-1, 2)
        lin = new_lin
    return lin, off


def words(n_maps: int, k: int):
    """All words of length k over 1..n_maps, lexicographic."""
    return list(itertools.product(range(1, n_maps + 1), repeat=k))


def _word_probs(probs: np.ndarray, k: int) -> np.ndarray:
    p = probs
    for _ in range(k - 1):
        p = np.outer(probs, p).ravel()
    return p


def iterate_system(s: IfsSystem, k: int, cap: int = DEFAULT_WORD_CAP) -> IfsSystem:
    """The k-th iterate: all N**k compositions, probabilities multiplied."""
    if k == 1:
        _word_count(s.n_maps, k, cap)
        return s
    lin, off = _iterate_arrays(s, k, cap)
    probs = None if s.probs is None else _word_probs(s.probs, k)
    if probs is not None:
        # products of a distribution sum to 1 up to rounding; renormalise
        probs = probs / probs.sum()
    return IfsSystem(lin, off, probs)


def word_lipschitz(s: IfsSystem, k: int, cap: int = DEFAULT_WORD_CAP) -> np.ndarray:
    """Lipschitz constants of every length-k word, lexicographic order."""
    lin, _ = _iterate_arrays(s, k, cap, with_offsets=False)
    return spectral_norms(lin)


def average_contractivity(s: IfsSystem, k: int, cap: int = DEFAULT_WORD_CAP) -> float:
    """``sum_w p_w Lip(f_w)`` over words of length k."""
    probs = s.positive_probs()
    lips = word_lipschitz(s, k, cap)
    return float(np.dot(_word_probs(probs, k), lips))


def min_average_contractive_k(s: IfsSystem, max_k: int, cap: int = DEFAULT_WORD_CAP) -> Optional[int]:
    """Smallest ``k <= max_k`` with average contractivity below 1, else None.

    ``None`` only means nothing was found up to ``max_k``.
    """
    s.positive_probs()
    for k in range(1, max_k + 1):
        if average_contractivity(s, k, cap) < 1.0:
            return k
    return None


def find_contractive_word(s: IfsSystem, max_len: int, cap: int = DEFAULT_WORD_CAP):
    """Shortest word whose composition has Lipschitz constant below 1.

    Breadth-first by length. Among words of the shortest length, powers of a
    single letter come first (their periodic address is a constant sequence),
    then lexicographic order. Returns ``(word, lip)`` or ``None``.
    """
    for k in range(1, max_len + 1):
        lips = word_lipschitz(s, k, cap)
        hits = [_unrank(int(j), s.n_maps, k) for j in np.flatnonzero(lips < 1.0 - CONTRACTIVE_MARGIN)]
        hits.sort(key=lambda w: (len(set(w)) != 1, w))
        for w in hits:
            # the reported value comes from the same path a caller would use
            lip = lipschitz(compose_word(s, w))
            if lip < 1.0 - CONTRACTIVE_MARGIN:
                return w, lip
    return None


def _unrank(j: int, n: int, k: int) -> Word:
    letters = []
    for _ in range(k):
        j, r = divmod(j, n)
        letters.append(r + 1)
    return tuple(reversed(letters))


def average_contractivity_poly(s: IfsSystem, k: int, cap: int = DEFAULT_WORD_CAP):
    """For a two-map system, return ``g(p1)`` = average contractivity at iterate k.

    ``g`` is a polynomial in p1; the closure evaluates it without touching
    the system's own probabilities.
    """
    if s.n_maps != 2:
        raise WrongArity(f"need exactly two maps, got {s.n_maps}")
    lips = word_lipschitz(s, k, cap)
    ones = np.array([w.count(1) for w in itertools.product((1, 2), repeat=k)])

    def g(p1: float) -> float:
        return float(np.dot(p1**ones * (1.0 - p1) ** (k - ones), lips))

    return g


def critical_probability(
    s: IfsSystem,
    k: int,
    tol: float = 1e-10,
    max_iter: int = 200,
    scan: int = 1000,
    cap: int = DEFAULT_WORD_CAP,
) -> float:
    """Boundary value of p1 between average-contractive and not, at iterate k.

    The polynomial is scanned on a uniform grid over [0, 1]. When the feasible
    region (average < 1) touches p1 = 0 the supremum of its first interval is
    returned; when it only touches p1 = 1 the infimum of its last interval is
    returned. Either way the crossing is refined by bisection to ``tol``.
    Raises :class:`NoThreshold` if the system is contractive on average for
    every p1 or for none.
    """
    g = average_contractivity_poly(s, k, cap)
    grid = np.linspace(0.0, 1.0, scan + 1)
    ok = np.array([g(p) < 1.0 for p in grid])
    if ok.all():
        raise NoThreshold(f"average contractive at iterate {k} for every p1")
    if not ok.any():
        raise NoThreshold(f"not average contractive at iterate {k} for any p1")
    if ok[0]:
        j = int(np.argmin(ok))  # first infeasible grid point
        lo, hi = grid[j - 1], grid[j]
    else:
        j = int(np.argmax(ok))  # first feasible grid point
        lo, hi = grid[j], grid[j - 1]
    # invariant: g(lo) < 1 <= g(hi)
    for _ in range(max_iter):
        if abs(hi - lo) <= tol:
            break
        mid = 0.5 * (lo + hi)
        if g(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return float(0.5 * (lo + hi))

