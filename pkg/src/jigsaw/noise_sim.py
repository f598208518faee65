"""Synthetic readout-noise channel standing in for quantum hardware.

Each physical readout channel has asymmetric flip rates: ``e01`` is the chance
of reading 1 when the qubit is in 0 and ``e10`` the reverse.  Measuring ``k``
qubits at once inflates both rates by a crosstalk factor ``kappa(k)``.
Partial-measurement circuits are "recompiled" by remapping their measured
qubits onto the lowest-error channels.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .pmf import SparsePmf, reduced_keys

# kappa(10) = 1.26, the isolated-vs-simultaneous average error ratio on Sycamore
DEFAULT_CROSSTALK_SLOPE = 0.26 / 9
# state-0 vs state-1 readout error split
DEFAULT_ASYMMETRY = (2.3, 3.6)
MAX_FLIP = 0.5 - 1e-9
EXHAUSTIVE_MAX_BITS = 12


@dataclass(frozen=True)
class LinearCrosstalk:
    """``kappa(k) = 1 + slope * (k - 1)``."""

    slope: float = DEFAULT_CROSSTALK_SLOPE

    def __post_init__(self):
        if self.slope < 0:
            raise ValidationError("crosstalk slope must be non-negative")

    def __call__(self, k: int) -> float:
        return 1.0 + self.slope * (max(int(k), 1) - 1)


@dataclass(frozen=True)
class NoiseProfile:
    e01: np.ndarray
    e10: np.ndarray
    crosstalk: LinearCrosstalk = field(default_factory=LinearCrosstalk)
    seed: int | None = None
    depolarizing: float = 0.0

    def __post_init__(self):
        e01 = np.asarray(self.e01, dtype=np.float64)
        e10 = np.asarray(self.e10, dtype=np.float64)
        if e01.shape != e10.shape or e01.ndim != 1:
            raise ValidationError("e01 and e10 must be 1-D arrays of equal length")
        if np.any((e01 < 0) | (e01 >= 0.5) | (e10 < 0) | (e10 >= 0.5)):
            raise ValidationError("readout error rates must lie in [0, 0.5)")
        if not 0.0 <= self.depolarizing <= 1.0:
            raise ValidationError("depolarizing probability must lie in [0, 1]")
        object.__setattr__(self, "e01", e01)
        object.__setattr__(self, "e10", e10)

    @property
    def n_channels(self) -> int:
        return int(self.e01.size)

    @property
    def mean_error(self) -> np.ndarray:
        return (self.e01 + self.e10) / 2.0

    def flip_rates(self, channels: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
        """Inflated, clamped ``(e01, e10)`` for channels measured together."""
        channels = np.asarray(channels, dtype=np.int64)
        kappa = self.crosstalk(len(channels))
        return (np.minimum(self.e01[channels] * kappa, MAX_FLIP),
                np.minimum(self.e10[channels] * kappa, MAX_FLIP))

    def to_json(self) -> list:
        return [[float(a), float(b)] for a, b in zip(self.e01, self.e10)]

    @classmethod
    def from_json(cls, data, crosstalk_slope: float = DEFAULT_CROSSTALK_SLOPE, **kwargs) -> "NoiseProfile":
        pairs = np.asarray(data, dtype=np.float64)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise ValidationError("profile must be a JSON array of [e01, e10] pairs")
        return cls(pairs[:, 0], pairs[:, 1], LinearCrosstalk(crosstalk_slope), **kwargs)

    @classmethod
    def uniform(cls, n_channels: int, e01: float, e10: float | None = None, **kwargs) -> "NoiseProfile":
        e10 = e01 if e10 is None else e10
        return cls(np.full(n_channels, e01), np.full(n_channels, e10), **kwargs)


def spatial_profile(n_channels: int = 27, median_err: float = 0.027, max_err: float = 0.222,
                    seed=None, sigma: float = 0.6, n_worst: int = 1,
                    asymmetry: tuple[float, float] = DEFAULT_ASYMMETRY,
                    crosstalk: LinearCrosstalk | None = None) -> NoiseProfile:
    """Per-channel readout errors with device-like spatial variation.

    Mean errors are log-normal, shifted so their sample median is exactly
    ``median_err``; the ``n_worst`` largest draws are pinned to ``max_err``
    and the rest capped below it.  Each mean is split into ``(e01, e10)``
    in the ratio ``asymmetry``.
    """
    if not 0 < median_err <= max_err < 0.5:
        raise ValidationError("need 0 < median_err <= max_err < 0.5")
    if n_channels < 1 or not 0 <= n_worst <= n_channels:
        raise ValidationError("invalid channel counts")
    rng = np.random.default_rng(seed)
    if median_err == max_err:
        base = np.full(n_channels, median_err)
    else:
        logs = rng.normal(0.0, sigma, size=n_channels)
        logs -= np.median(logs)
        base = median_err * np.exp(logs)
        worst = np.argsort(-base, kind="stable")[:n_worst]
        base = np.minimum(base, max_err)
        base[worst] = max_err
    a0, a1 = asymmetry
    scale = 2.0 / (a0 + a1)
    e01 = np.minimum(base * a0 * scale, MAX_FLIP)
    e10 = np.minimum(base * a1 * scale, MAX_FLIP)
    return NoiseProfile(e01, e10, crosstalk or LinearCrosstalk(),
                        seed=None if seed is None else int(seed))


def best_qubit_assignment(profile: NoiseProfile, k: int, measured: Sequence[int] | None = None) -> dict[int, int]:
    """Map ``measured`` logical qubits onto the ``k`` lowest-error channels.

    Channels are ranked by mean error, ties broken by lower index; the first
    measured qubit gets the best channel.
    """
    if not 0 < k <= profile.n_channels:
        raise ValidationError(f"cannot place {k} qubits on {profile.n_channels} channels")
    measured = list(range(k)) if measured is None else list(measured)
    if len(measured) != k:
        raise ValidationError("measured list length must equal k")
    ranked = np.lexsort((np.arange(profile.n_channels), profile.mean_error))[:k]
    return {q: int(c) for q, c in zip(measured, ranked)}


def identity_assignment(n: int) -> dict[int, int]:
    return {q: q for q in range(n)}


# ideal distributions ------------------------------------------------------

@dataclass(frozen=True)
class IdealSpec:
    """Description of a noise-free output distribution.

    ``kind`` is one of ``ghz``, ``bv``, ``planted`` or ``custom``.  ``secret``
    is the BV answer or the planted correct outcome; ``support`` lists the
    planted background outcomes; ``pmf`` carries a custom distribution.
    """

    kind: str
    width: int
    secret: str | None = None
    signal: float = 0.5
    support: tuple[str, ...] = ()
    pmf: SparsePmf | None = None

    def correct_outcomes(self) -> set[str]:
        if self.kind == "ghz":
            return {"0" * self.width, "1" * self.width}
        if self.kind in ("bv", "planted"):
            return {self.secret}
        ideal = ideal_distribution(self)
        top = ideal.probs.max()
        return {o for o, p in zip(ideal.outcomes, ideal.probs) if p >= top * (1 - 1e-12)}


def ghz(width: int) -> IdealSpec:
    return IdealSpec("ghz", width)


def bernstein_vazirani(secret: str) -> IdealSpec:
    return IdealSpec("bv", len(secret), secret=secret)


def planted(width: int, signal: float, correct: str, support: Sequence[str]) -> IdealSpec:
    return IdealSpec("planted", width, secret=correct, signal=signal, support=tuple(support))


def random_planted(width: int, signal: float = 0.5, floor_size: int = 16, seed=None) -> IdealSpec:
    """Planted workload with a random correct outcome and random background."""
    rng = np.random.default_rng(seed)
    size = min(floor_size, 2 ** width)
    codes = rng.choice(2 ** width, size=size, replace=False)
    support = tuple(format(int(c), f"0{width}b") for c in codes)
    return planted(width, signal, support[0], support)


def ideal_distribution(spec: IdealSpec) -> SparsePmf:
    n = spec.width
    if spec.kind == "ghz":
        return SparsePmf({"0" * n: 0.5, "1" * n: 0.5}, width=n)
    if spec.kind == "bv":
        return SparsePmf({spec.secret: 1.0}, width=n)
    if spec.kind == "planted":
        if not 0.0 <= spec.signal <= 1.0:
            raise ValidationError("planted signal must lie in [0, 1]")
        support = list(dict.fromkeys(spec.support or (spec.secret,)))
        weights = dict.fromkeys(support, (1.0 - spec.signal) / len(support))
        weights[spec.secret] = weights.get(spec.secret, 0.0) + spec.signal
        return SparsePmf(weights, width=n)
    if spec.kind == "custom":
        if spec.pmf is None or spec.pmf.width != n:
            raise ValidationError("custom ideal spec needs a PMF of matching width")
        return spec.pmf
    raise ValidationError(f"unknown ideal kind {spec.kind!r}")


# sampling -----------------------------------------------------------------

def _channels_for(assignment: Mapping[int, int], measured: Sequence[int]) -> list[int]:
    missing = [q for q in measured if q not in assignment]
    if missing:
        raise ValidationError(f"assignment has no channel for qubits {missing}")
    return [int(assignment[q]) for q in measured]


def _check_measured(ideal: SparsePmf, measured):
    measured = [int(q) for q in measured]
    if len(set(measured)) != len(measured) or any(not 0 <= q < ideal.width for q in measured):
        raise ValidationError(f"invalid measured qubits {measured} for width {ideal.width}")
    return measured


def _encode(keys: np.ndarray, k: int) -> dict[str, int]:
    uniq, counts = np.unique(keys, return_counts=True)
    return {format(int(u), f"0{k}b"): int(c) for u, c in zip(uniq, counts)}


def sample_counts(ideal: SparsePmf, profile: NoiseProfile, assignment: Mapping[int, int],
                  measured: Sequence[int], trials: int, rng=None) -> dict[str, int]:
    """Noisy histogram of ``trials`` runs measuring ``measured`` qubits.

    Keys list the measured qubits in the given order, first one leftmost.
    ``rng`` is a ``numpy`` generator or seed; ``profile.seed`` is used when
    it is omitted.
    """
    measured = _check_measured(ideal, measured)
    channels = _channels_for(assignment, measured)
    if trials <= 0:
        raise ValidationError("trials must be positive")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(profile.seed if rng is None else rng)
    k = len(measured)
    truth = ideal.bits[ideal.sample(trials, rng)][:, measured]
    if profile.depolarizing > 0:
        scramble = rng.random(trials) < profile.depolarizing
        truth[scramble] = rng.integers(0, 2, size=(int(scramble.sum()), k), dtype=np.uint8)
    e01, e10 = profile.flip_rates(channels)
    flip_p = np.where(truth == 0, e01[None, :], e10[None, :])
    read = truth ^ (rng.random(truth.shape) < flip_p).astype(np.uint8)
    # column j of `read` is measured[j], which goes j-th from the left
    return _encode(reduced_keys(read, range(k)), k)


def expected_distribution(ideal: SparsePmf, profile: NoiseProfile, assignment: Mapping[int, int],
                          measured: Sequence[int]) -> SparsePmf:
    """Exact noisy distribution of the read-out (no sampling), for ``<= 12`` bits.

    Outcomes follow :func:`sample_counts`'s key layout.
    """
    measured = _check_measured(ideal, measured)
    k = len(measured)
    if k > EXHAUSTIVE_MAX_BITS:
        raise ValidationError(f"exhaustive mode supports at most {EXHAUSTIVE_MAX_BITS} bits")
    channels = _channels_for(assignment, measured)
    e01, e10 = profile.flip_rates(channels)
    total = np.zeros(2 ** k)
    codes = reduced_keys(ideal.bits, measured)
    true_mass = np.bincount(codes, weights=ideal.probs, minlength=2 ** k)
    if profile.depolarizing > 0:
        true_mass = (1 - profile.depolarizing) * true_mass + profile.depolarizing / 2 ** k
    for code in np.flatnonzero(true_mass):
        dist = np.ones(1)
        for j in range(k):
            bit = (int(code) >> (k - 1 - j)) & 1
            p1 = e01[j] if bit == 0 else 1.0 - e10[j]
            dist = np.kron(dist, np.array([1.0 - p1, p1]))
        total += true_mass[code] * dist
    outcomes = [format(c, f"0{k}b") for c in range(2 ** k)]
    return SparsePmf(dict(zip(outcomes, total)), width=k)


def all_correct_probability(profile: NoiseProfile, channels: Sequence[int], truth: Sequence[int]) -> float:
    """Chance that every measured bit reads correctly for a fixed true outcome."""
    e01, e10 = profile.flip_rates(channels)
    err = np.where(np.asarray(truth) == 0, e01, e10)
    return float(np.prod(1.0 - err))
