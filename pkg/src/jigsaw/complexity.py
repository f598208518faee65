"""Memory / operation-count model of reconstruction and an empirical timing harness."""

from __future__ import annotations

import csv
import gc
import time
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .errors import ValidationError
from .pmf import Marginal, SparsePmf, marginalize
from .reconstruction import DEFAULT_CONFIG, reconstruction_round


@dataclass(frozen=True)
class ComplexityParams:
    """Inputs of the model.

    n: qubits; N: CPMs per layer; T: trials; epsilon / delta: global / local
    support fractions; s: subset size; layers: number of subset sizes.
    """

    n: int
    N: int
    T: int
    epsilon: float
    delta: float
    s: int
    layers: int = 1

    def __post_init__(self):
        if not (0 <= self.epsilon <= 1 and 0 <= self.delta <= 1):
            raise ValidationError("support fractions must lie in [0, 1]")
        if min(self.n, self.N, self.T, self.s, self.layers) < 0 or self.layers < 1:
            raise ValidationError("counts must be non-negative and layers >= 1")

    @property
    def local_entries(self) -> Fraction:
        """``L = min(2**s, delta * T)``."""
        return min(Fraction(2) ** self.s, _exact(self.delta) * self.T)


def _exact(x) -> Fraction:
    # read floats as the decimals they print as, so 0.05 means 1/20
    return Fraction(repr(x)) if isinstance(x, float) else Fraction(x)


def _round(x: Fraction) -> int:
    return int(x + Fraction(1, 2)) if x >= 0 else -int(-x + Fraction(1, 2))


def memory_bytes(params: ComplexityParams) -> int:
    """``(n + 8(2 + N)) eps T + L (s + 8) S N`` bytes, rounded to the nearest byte."""
    p = params
    global_part = (p.n + 8 * (2 + p.N)) * _exact(p.epsilon) * p.T
    local_part = p.local_entries * (p.s + 8) * p.layers * p.N
    return _round(global_part + local_part)


def operation_count(params: ComplexityParams) -> int:
    """``4 eps S N T`` operations."""
    p = params
    return _round(4 * _exact(p.epsilon) * p.layers * p.N * p.T)


# empirical scaling -------------------------------------------------------

@dataclass
class ScalingRow:
    entries: int
    n_cpms: int
    width: int
    predicted_bytes: int
    predicted_ops: int
    seconds: float
    measured_entries: int

    def as_dict(self):
        return asdict(self)


def synthetic_pmf(width: int, entries: int, rng: np.random.Generator) -> SparsePmf:
    """Random PMF with exactly ``entries`` distinct outcomes of ``width`` bits."""
    if entries > 2 ** min(width, 62):
        raise ValidationError("more entries requested than outcomes exist")
    codes = np.empty(0, dtype=np.int64)
    high = 2 ** min(width, 62)
    while codes.size < entries:
        extra = rng.integers(0, high, size=2 * (entries - codes.size) + 8, dtype=np.int64)
        codes = np.unique(np.concatenate([codes, extra]))
    codes = rng.permutation(codes)[:entries]
    bits = np.zeros((entries, width), dtype=np.uint8)
    for q in range(min(width, 62)):
        bits[:, q] = (codes >> q) & 1
    return SparsePmf.from_arrays(bits, rng.random(entries) + 1e-3)


def synthetic_marginals(p: SparsePmf, n_cpms: int, size: int = 2) -> list[Marginal]:
    qubits = [tuple((i + j) % p.width for j in range(size)) for i in range(n_cpms)]
    return [marginalize(p, qs) for qs in qubits]


def time_call(fn: Callable[[], object], repeats: int = 5) -> float:
    """Best-of-``repeats`` wall time of ``fn()`` in seconds."""
    best = float("inf")
    gc_was = gc.isenabled()
    gc.disable()
    try:
        for _ in range(repeats):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
    finally:
        if gc_was:
            gc.enable()
    return best


def measure_scaling(entries_sweep: Sequence[int], cpm_sweep: Sequence[int] = (10,), width: int = 40,
                    trials: int | None = None, seed: int = 0, repeats: int = 5,
                    engine: Callable | None = None) -> list[ScalingRow]:
    """Time reconstruction over a grid of support sizes and CPM counts.

    ``engine(p, marginals)`` defaults to a single reconstruction round.  Grid
    points are timed round-robin ``repeats`` times and the fastest run kept,
    so slow spells on a shared machine hit every point alike.  The model
    prediction uses ``epsilon = entries / trials``, ``trials`` defaulting to
    the largest support in the sweep.
    """
    engine = engine or (lambda p, ms: reconstruction_round(p, ms, DEFAULT_CONFIG))
    rng = np.random.default_rng(seed)
    trials = trials or max(entries_sweep)
    cases = []
    for entries in entries_sweep:
        p = synthetic_pmf(width, entries, rng)
        for n_cpms in cpm_sweep:
            cases.append((entries, n_cpms, p, synthetic_marginals(p, n_cpms)))
    best = [float("inf")] * len(cases)
    for _ in range(repeats):
        for i, (_, _, p, ms) in enumerate(cases):
            best[i] = min(best[i], time_call(lambda: engine(p, ms), 1))
    rows = []
    for (entries, n_cpms, p, _), seconds in zip(cases, best):
        params = ComplexityParams(n=width, N=n_cpms, T=trials, epsilon=entries / trials,
                                  delta=min(1.0, 4 / trials), s=2)
        rows.append(ScalingRow(entries, n_cpms, width, memory_bytes(params),
                               operation_count(params), seconds, len(p)))
    return rows


def fit_slope(rows: Sequence[ScalingRow], floor_seconds: float = 1e-3) -> float:
    """Least-squares seconds per (entry x CPM), ignoring rows under ``floor_seconds``."""
    use = [r for r in rows if r.seconds >= floor_seconds]
    if len(use) < 2:
        raise ValidationError("need at least two timings above the floor to fit")
    x = np.array([r.entries * r.n_cpms for r in use], dtype=float)
    y = np.array([r.seconds for r in use])
    return float(np.polyfit(x, y, 1)[0])


CSV_FIELDS = ["entries", "n_cpms", "width", "predicted_bytes", "predicted_ops", "seconds",
              "measured_entries"]


def write_scaling_csv(rows: Sequence[ScalingRow], path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row.as_dict())
