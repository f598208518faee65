"""Bayesian reconstruction of a global histogram from high-fidelity marginals.

A round updates the prior ``P`` once per marginal, each update starting from
the same ``P``, then merges ``normalize(P + sum(updates))``.  Rounds repeat on
their own output until the Hellinger distance moved per round stops changing.

Each update regroups the entries of ``P`` by their reduced outcome under the
marginal's qubits.  Inside a group the prior ratios are kept (the update
coefficients); the group as a whole is re-weighted by the marginal's
probability for that reduced outcome, either as odds ``pr/(1 - pr)`` or as the
plain probability.
"""

from __future__ import annotations

import logging
import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateUpdateError, ValidationError
from .pmf import Marginal, SparsePmf, reduced_keys

log = logging.getLogger(__name__)

ODDS = "odds"
PROBABILITY = "probability"

# group sums through bincount up to this many reduced bits, np.unique beyond
_DENSE_GROUP_BITS = 20


@dataclass(frozen=True)
class ReconstructionConfig:
    """Knobs of the reconstruction loop.

    ``weighting`` selects how a marginal probability scales its group:
    ``"probability"`` uses ``pr`` itself and ``"odds"`` uses ``pr / (1 - pr)``
    with ``pr`` clamped to ``1 - odds_clamp``.
    """

    hellinger_tolerance: float = 1e-4
    max_rounds: int = 100
    odds_clamp: float = 1e-9
    weighting: str = PROBABILITY

    def __post_init__(self):
        if not self.hellinger_tolerance > 0:
            raise ValidationError("hellinger_tolerance must be positive")
        if int(self.max_rounds) != self.max_rounds or self.max_rounds < 1:
            raise ValidationError("max_rounds must be an integer >= 1")
        if not 0 < self.odds_clamp < 1:
            raise ValidationError("odds_clamp must lie in (0, 1)")
        if self.weighting not in (ODDS, PROBABILITY):
            raise ValidationError(f"weighting must be {ODDS!r} or {PROBABILITY!r}")


DEFAULT_CONFIG = ReconstructionConfig()


@dataclass
class LayerSet:
    """Marginal layers for multi-layer reconstruction, one per subset size."""

    layers: list[tuple[int, list[Marginal]]]

    def __post_init__(self):
        self.layers = [(int(s), list(ms)) for s, ms in self.layers]
        sizes = [s for s, _ in self.layers]
        if len(set(sizes)) != len(sizes):
            raise ValidationError(f"repeated subset size in layers {sizes}")
        for s, ms in self.layers:
            bad = [m.qubits for m in ms if m.width != s]
            if bad:
                raise ValidationError(f"layer of size {s} holds marginals over {bad}")

    @property
    def sizes(self) -> list[int]:
        return [s for s, _ in self.layers]

    def is_descending(self) -> bool:
        sizes = self.sizes
        return all(a > b for a, b in zip(sizes, sizes[1:]))

    def sorted(self) -> "LayerSet":
        return LayerSet(sorted(self.layers, key=lambda layer: -layer[0]))

    @classmethod
    def from_marginals(cls, marginals: Sequence[Marginal]) -> "LayerSet":
        """Group marginals by width, largest first, keeping input order within a layer."""
        groups: dict[int, list[Marginal]] = {}
        for m in marginals:
            groups.setdefault(m.width, []).append(m)
        return cls(sorted(groups.items(), key=lambda layer: -layer[0]))


def _check_marginal(p: SparsePmf, m: Marginal, index=None):
    bad = [q for q in m.qubits if q >= p.width]
    if bad:
        where = "" if index is None else f" (marginal {index})"
        raise ValidationError(f"marginal qubits {bad} out of range for width {p.width}{where}")


def _marginal_weights(m: Marginal, cfg: ReconstructionConfig) -> tuple[np.ndarray, np.ndarray]:
    # integer codes of the marginal outcomes (first listed qubit = most significant bit)
    keys = reduced_keys(m.pmf.bits[:, ::-1], range(m.width))
    pr = m.pmf.probs
    if cfg.weighting == ODDS:
        pr = np.minimum(pr, 1.0 - cfg.odds_clamp)
        return keys, pr / (1.0 - pr)
    return keys, pr.copy()


class _Prepared:
    """A marginal bound to a fixed support: group index per entry plus group weights.

    The support of the PMF never changes during reconstruction, so the
    grouping is computed once and reused every round.
    """

    __slots__ = ("group", "n_groups", "table", "index", "qubits")

    def __init__(self, p: SparsePmf, m: Marginal, cfg: ReconstructionConfig, index=None):
        _check_marginal(p, m, index)
        keys = reduced_keys(p.bits, m.qubits)
        mkeys, mweights = _marginal_weights(m, cfg)
        if m.width <= _DENSE_GROUP_BITS:
            self.n_groups = 1 << m.width
            self.table = np.zeros(self.n_groups)
            self.table[mkeys] = mweights
            group = keys
        else:
            uniq, group = np.unique(keys, return_inverse=True)
            self.n_groups = uniq.size
            order = np.argsort(mkeys)
            mkeys, mweights = mkeys[order], mweights[order]
            pos = np.minimum(np.searchsorted(mkeys, uniq), mkeys.size - 1)
            self.table = np.where(mkeys[pos] == uniq, mweights[pos], 0.0)
        self.group = group.astype(np.min_scalar_type(max(self.n_groups - 1, 0)))
        self.index = index
        self.qubits = m.qubits

    def posterior(self, probs: np.ndarray) -> np.ndarray:
        group_mass = np.bincount(self.group, weights=probs, minlength=self.n_groups)
        present = group_mass > 0
        total = self.table[present].sum()
        if not total > 0:
            where = "" if self.index is None else f" {self.index}"
            raise DegenerateUpdateError(
                f"marginal{where} over qubits {self.qubits} shares no outcome with the global PMF",
                marginal_index=self.index)
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(present, self.table / group_mass, 0.0) / total
        return probs * factor[self.group]


def update_weights(p: SparsePmf, m: Marginal, cfg: ReconstructionConfig = DEFAULT_CONFIG,
                   index=None) -> np.ndarray:
    """Normalized posterior of one update, aligned with ``p``'s entries (zeros kept).

    Each entry's weight is its share of its reduced-outcome group in ``p``
    (the update coefficient) times the marginal's weight for that group.
    """
    return _Prepared(p, m, cfg, index).posterior(p.probs)


def bayesian_update(p: SparsePmf, m: Marginal, cfg: ReconstructionConfig = DEFAULT_CONFIG) -> SparsePmf:
    """Posterior of ``p`` given one marginal; support is a subset of ``p``'s."""
    return p._derive(update_weights(p, m, cfg))


def _round(probs: np.ndarray, prepared: Sequence[_Prepared]) -> np.ndarray:
    acc = probs.copy()
    for prep in prepared:
        acc += prep.posterior(probs)
    return acc / acc.sum()


def _hellinger_aligned(u: np.ndarray, v: np.ndarray) -> float:
    return min(math.sqrt(float(np.sum((np.sqrt(u) - np.sqrt(v)) ** 2)) / 2.0), 1.0)


def reconstruction_round(p: SparsePmf, marginals: Sequence[Marginal],
                         cfg: ReconstructionConfig = DEFAULT_CONFIG) -> SparsePmf:
    """One round: ``normalize(P + sum_j update(P, m_j))``."""
    prepared = [_Prepared(p, m, cfg, j) for j, m in enumerate(marginals)]
    return p._derive(_round(p.probs, prepared))


def bayesian_reconstruction(p: SparsePmf, marginals: Sequence[Marginal],
                            cfg: ReconstructionConfig = DEFAULT_CONFIG,
                            history: list | None = None) -> SparsePmf:
    """Iterate reconstruction rounds to a Hellinger fixed point.

    Round ``r`` moves the PMF by ``d_r = hellinger(P_{r-1}, P_r)``; the loop
    stops once ``|d_r - d_{r-1}| < cfg.hellinger_tolerance`` (with ``d_0 = 0``)
    or after ``cfg.max_rounds`` rounds.  Per-round distances are appended to
    ``history`` when given.

    Raises:
        DegenerateUpdateError: a marginal matches none of ``p``'s outcomes.
    """
    prepared = [_Prepared(p, m, cfg, j) for j, m in enumerate(marginals)]
    if not prepared:
        return p
    probs = p.probs
    previous = 0.0
    for r in range(1, cfg.max_rounds + 1):
        nxt = _round(probs, prepared)
        d = _hellinger_aligned(probs, nxt)
        if history is not None:
            history.append(d)
        probs = nxt
        if abs(d - previous) < cfg.hellinger_tolerance:
            log.debug("converged after %d rounds (last move %.3g)", r, d)
            break
        previous = d
    else:
        log.info("reconstruction stopped at max_rounds=%d, last move %.3g", cfg.max_rounds, d)
    return p._derive(probs)


def reconstruct_multilayer(p: SparsePmf, layers: LayerSet | Sequence[tuple[int, Sequence[Marginal]]],
                           cfg: ReconstructionConfig = DEFAULT_CONFIG,
                           history: list | None = None) -> SparsePmf:
    """Top-down multi-layer reconstruction: largest subsets first.

    Layers not given in descending size are sorted (with a warning).  When
    ``history`` is given, one ``(size, distances)`` pair is appended per layer.
    """
    if not isinstance(layers, LayerSet):
        layers = LayerSet(list(layers))
    if not layers.is_descending():
        warnings.warn(f"layer sizes {layers.sizes} not descending; sorting", stacklevel=2)
        layers = layers.sorted()
    current = p
    for size, marginals in layers.layers:
        trace = [] if history is not None else None
        current = bayesian_reconstruction(current, marginals, cfg, trace)
        if history is not None:
            history.append((size, trace))
    return current
