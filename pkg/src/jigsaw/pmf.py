"""Sparse probability-mass functions over fixed-width bitstrings.

Outcomes are plain ``str`` objects of ``'0'``/``'1'`` characters.  The leftmost
character is the highest qubit index, so for a 3-qubit outcome ``"100"`` qubit 2
reads 1 and qubits 1 and 0 read 0.

Internally a :class:`SparsePmf` keeps an ``(entries, width)`` ``uint8`` bit matrix
whose column ``q`` holds qubit ``q``; the string keys are rendered lazily.  Only
observed outcomes are stored, so memory scales with the number of distinct
outcomes rather than with ``2**width``.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError, ValidationError

__all__ = [
    "SparsePmf",
    "Marginal",
    "from_counts",
    "marginalize",
    "reduce",
    "reduced_keys",
    "hellinger",
    "align",
]

# reduced outcomes wider than this are grouped by row instead of packed ints
_MAX_PACKED_BITS = 62


def _check_bitstring(s, width):
    if not isinstance(s, str) or len(s) != width or s.strip("01"):
        raise ValidationError(f"malformed outcome {s!r}: expected {width} characters from '01'")


def _bits_from_strings(outcomes: Sequence[str], width: int) -> np.ndarray:
    if not outcomes:
        return np.zeros((0, width), dtype=np.uint8)
    raw = np.frombuffer("".join(outcomes).encode("ascii"), dtype=np.uint8)
    return (raw.reshape(len(outcomes), width) - 48)[:, ::-1].copy()


def _strings_from_bits(bits: np.ndarray) -> tuple[str, ...]:
    m, width = bits.shape
    if m == 0:
        return ()
    if width == 0:
        return ("",) * m
    text = (bits[:, ::-1] + 48).astype(np.uint8).tobytes().decode("ascii")
    return tuple(text[i * width:(i + 1) * width] for i in range(m))


def _bits_from_ints(keys: np.ndarray, width: int) -> np.ndarray:
    shifts = np.arange(width, dtype=np.int64)
    return ((keys[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


class SparsePmf(Mapping):
    """Immutable, normalized map ``outcome -> probability``.

    Entries are kept in ascending lexicographic order of their bitstrings when
    built from a mapping; operations that derive one PMF from another keep the
    parent's order.  Every stored probability is strictly positive.

    Args:
        entries: mapping of bitstring to non-negative weight.  Weights are
            normalized; zero (and, after float round-off, negative) weights
            are dropped.
        width: number of qubits.  Inferred from the keys when omitted.
        total_trials: number of trials the histogram came from, if known.
    """

    __slots__ = ("_width", "_bits", "_probs", "_outcomes", "_index", "_total_trials")

    def __init__(self, entries: Mapping[str, float], width: int | None = None,
                 total_trials: int | None = None):
        items = sorted(entries.items())
        if width is None:
            if not items:
                raise EmptyInputError("cannot infer width of an empty PMF")
            width = len(items[0][0])
        for key, _ in items:
            _check_bitstring(key, width)
        outcomes = [k for k, _ in items]
        weights = np.array([float(v) for _, v in items], dtype=np.float64)
        self._init_arrays(width, _bits_from_strings(outcomes, width), weights, total_trials,
                          tuple(outcomes))

    def _init_arrays(self, width, bits, weights, total_trials, outcomes=None):
        if np.any(~np.isfinite(weights)):
            raise ValidationError("PMF weights must be finite")
        keep = weights > 0.0
        if not np.all(keep):
            bits, weights = bits[keep], weights[keep]
            if outcomes is not None:
                outcomes = tuple(o for o, k in zip(outcomes, keep) if k)
        total = weights.sum()
        if weights.size == 0 or total <= 0.0:
            raise EmptyInputError("PMF has no positive mass")
        probs = weights / total
        probs.flags.writeable = False
        bits = np.asfortranarray(bits)
        bits.flags.writeable = False
        self._width = int(width)
        self._bits = bits
        self._probs = probs
        self._outcomes = outcomes
        self._index = None
        self._total_trials = None if total_trials is None else int(total_trials)

    @classmethod
    def from_arrays(cls, bits: np.ndarray, weights: np.ndarray,
                    total_trials: int | None = None) -> "SparsePmf":
        """Build from a bit matrix (column ``q`` = qubit ``q``) and matching weights.

        Rows must be distinct; order is preserved.
        """
        bits = np.array(bits, dtype=np.uint8, order="C")
        if bits.ndim != 2:
            raise ValidationError("bit matrix must be 2-D")
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (bits.shape[0],):
            raise ValidationError("weights must have one entry per row")
        self = cls.__new__(cls)
        self._init_arrays(bits.shape[1], bits, weights.copy(), total_trials)
        return self

    def _derive(self, weights: np.ndarray) -> "SparsePmf":
        # same support and order as self, new weights
        out = SparsePmf.__new__(SparsePmf)
        out._init_arrays(self._width, self._bits, weights, None, self._outcomes)
        return out

    # Mapping protocol -------------------------------------------------
    @property
    def outcomes(self) -> tuple[str, ...]:
        if self._outcomes is None:
            self._outcomes = _strings_from_bits(self._bits)
        return self._outcomes

    def _lookup(self):
        if self._index is None:
            self._index = {o: i for i, o in enumerate(self.outcomes)}
        return self._index

    def __getitem__(self, outcome: str) -> float:
        return float(self._probs[self._lookup()[outcome]])

    def __iter__(self):
        return iter(self.outcomes)

    def __len__(self) -> int:
        return int(self._probs.size)

    def __contains__(self, outcome) -> bool:
        return outcome in self._lookup()

    def __repr__(self) -> str:
        shown = ", ".join(f"{o}: {p:.6g}" for o, p in list(zip(self.outcomes, self._probs))[:8])
        more = ", ..." if len(self) > 8 else ""
        return f"SparsePmf(width={self._width}, {{{shown}{more}}})"

    def prob(self, outcome: str) -> float:
        """Probability of ``outcome``; 0.0 when it was never observed."""
        i = self._lookup().get(outcome)
        return 0.0 if i is None else float(self._probs[i])

    # Array views ------------------------------------------------------
    @property
    def width(self) -> int:
        return self._width

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    @property
    def total_trials(self) -> int | None:
        return self._total_trials

    def to_dict(self) -> dict[str, float]:
        return dict(zip(self.outcomes, self._probs.tolist()))

    def argmax(self) -> str:
        return self.outcomes[int(np.argmax(self._probs))]

    def sample(self, trials: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``trials`` row indices into this PMF."""
        return rng.choice(len(self), size=int(trials), p=self._probs)

    def permute(self, order: Sequence[int]) -> "SparsePmf":
        """New PMF whose qubit ``j`` is this PMF's qubit ``order[j]``."""
        order = list(order)
        if sorted(order) != list(range(self._width)):
            raise ValidationError(f"{order} is not a permutation of range({self._width})")
        bits = self._bits[:, order]
        idx = np.lexsort(bits.T) if self._width else np.arange(len(self))
        return SparsePmf.from_arrays(bits[idx], self._probs[idx], self._total_trials)


@dataclass(frozen=True)
class Marginal:
    """A local PMF together with the ordered qubits it was measured on.

    Character ``j`` of every outcome in ``pmf`` is the value of ``qubits[j]``,
    matching :func:`reduce`.  With ``qubits=(1, 0)`` the outcome ``"10"`` means
    qubit 1 read 1 and qubit 0 read 0.
    """

    qubits: tuple[int, ...]
    pmf: SparsePmf

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if len(set(qubits)) != len(qubits):
            raise ValidationError(f"duplicate qubit index in {qubits}")
        if any(q < 0 for q in qubits):
            raise ValidationError(f"negative qubit index in {qubits}")
        if self.pmf.width != len(qubits):
            raise ValidationError(
                f"marginal over {len(qubits)} qubits has outcomes of width {self.pmf.width}")

    @property
    def width(self) -> int:
        return len(self.qubits)

    def canonical(self) -> "Marginal":
        """Same marginal with qubits listed in descending order (file layout)."""
        target = tuple(sorted(self.qubits, reverse=True))
        return self if target == self.qubits else self.reorder(target)

    def reorder(self, qubits: Sequence[int]) -> "Marginal":
        """Same marginal relabelled to list ``qubits`` (a permutation of ``self.qubits``)."""
        k = len(self.qubits)
        qubits = tuple(int(q) for q in qubits)
        if sorted(qubits) != sorted(self.qubits):
            raise ValidationError(f"{qubits} is not a permutation of {self.qubits}")
        # local column c holds qubits[k-1-c]
        col_of = {q: k - 1 - j for j, q in enumerate(self.qubits)}
        order = [col_of[qubits[k - 1 - c]] for c in range(k)]
        return Marginal(qubits, self.pmf.permute(order))


def from_counts(counts: Mapping[str, int], width: int) -> SparsePmf:
    """Normalize a histogram of trial counts.

    >>> from_counts({"00": 3, "01": 1}, 2).to_dict()
    {'00': 0.75, '01': 0.25}
    """
    total = 0
    clean = {}
    for key, value in counts.items():
        _check_bitstring(key, width)
        if isinstance(value, bool) or int(value) != value or value < 0:
            raise ValidationError(f"count for {key!r} must be a non-negative integer, got {value!r}")
        value = int(value)
        total += value
        if value:
            clean[key] = value
    if total == 0:
        raise EmptyInputError("histogram has no trials")
    return SparsePmf(clean, width=width, total_trials=total)


def _check_qubits(qubits, width):
    qubits = tuple(int(q) for q in qubits)
    if len(set(qubits)) != len(qubits):
        raise ValidationError(f"duplicate qubit index in {qubits}")
    bad = [q for q in qubits if not 0 <= q < width]
    if bad:
        raise ValidationError(f"qubit indices {bad} out of range for width {width}")
    return qubits


def reduce(outcome: str, qubits: Iterable[int]) -> str:
    """Bits of ``outcome`` at ``qubits``, first listed qubit leftmost.

    >>> reduce("1010", (0, 3))
    '01'
    """
    width = len(outcome)
    qubits = tuple(qubits)
    bad = [q for q in qubits if not 0 <= q < width]
    if bad:
        raise ValidationError(f"qubit indices {bad} out of range for width {width}")
    return "".join(outcome[width - 1 - q] for q in qubits)


def reduced_keys(bits: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Integer codes of each row reduced to ``qubits``.

    The code's binary rendering at width ``len(qubits)`` equals :func:`reduce`.
    """
    k = len(qubits)
    if k > _MAX_PACKED_BITS:
        raise ValidationError(f"cannot pack {k} bits into an integer key")
    keys = np.zeros(bits.shape[0], dtype=np.int64)
    for j, q in enumerate(qubits):
        keys |= bits[:, q].astype(np.int64) << (k - 1 - j)
    return keys


def marginalize(p: SparsePmf, qubits: Sequence[int]) -> Marginal:
    """Marginal distribution of ``p`` over ``qubits`` (caller order kept)."""
    qubits = _check_qubits(qubits, p.width)
    k = len(qubits)
    if k == 0:
        raise ValidationError("cannot marginalize onto zero qubits")
    if k <= _MAX_PACKED_BITS:
        keys = reduced_keys(p.bits, qubits)
        uniq, inverse = np.unique(keys, return_inverse=True)
        mass = np.bincount(inverse, weights=p.probs, minlength=uniq.size)
        local = _bits_from_ints(uniq, k)
    else:
        sub = p.bits[:, list(qubits[::-1])]
        order = np.lexsort(sub.T)
        local, inverse = np.unique(sub[order], axis=0, return_inverse=True)
        mass = np.bincount(inverse.ravel(), weights=p.probs[order], minlength=local.shape[0])
        idx = np.lexsort(local.T)
        local, mass = local[idx], mass[idx]
    return Marginal(qubits, SparsePmf.from_arrays(local, mass, p.total_trials))


def align(p: SparsePmf, q: SparsePmf) -> tuple[np.ndarray, np.ndarray]:
    """Probability vectors of ``p`` and ``q`` over the union of their supports."""
    if p.width != q.width:
        raise ValidationError(f"width mismatch: {p.width} vs {q.width}")
    a = p.to_dict()
    b = q.to_dict()
    keys = sorted(a.keys() | b.keys())
    return (np.array([a.get(k, 0.0) for k in keys]), np.array([b.get(k, 0.0) for k in keys]))


def hellinger(p: SparsePmf, q: SparsePmf) -> float:
    """Hellinger distance, scaled to lie in ``[0, 1]``."""
    u, v = align(p, q)
    d = math.sqrt(float(np.sum((np.sqrt(u) - np.sqrt(v)) ** 2)) / 2.0)
    return min(d, 1.0)
