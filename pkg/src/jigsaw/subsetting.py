"""Subset plans for the partial-measurement circuits and trial allocation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import ValidationError

DEFAULT_CONFIDENCE = 0.9999


@dataclass
class SubsetPlan:
    """Which qubits each partial-measurement circuit (CPM) measures.

    ``cpms`` holds ``(size, qubits)`` pairs in generation order; ``layers``
    lists the distinct sizes largest first, as reconstruction consumes them.
    """

    width: int
    cpms: list[tuple[int, tuple[int, ...]]]
    trials: dict[tuple[int, ...], int] = field(default_factory=dict)

    def __post_init__(self):
        self.cpms = [(int(s), tuple(int(q) for q in qs)) for s, qs in self.cpms]
        seen = set()
        for s, qs in self.cpms:
            if len(qs) != s:
                raise ValidationError(f"CPM {qs} listed with size {s}")
            if len(set(qs)) != s or any(not 0 <= q < self.width for q in qs):
                raise ValidationError(f"invalid CPM {qs} for width {self.width}")
            key = frozenset(qs)
            if key in seen:
                raise ValidationError(f"duplicate CPM {qs}")
            seen.add(key)

    @property
    def sizes(self) -> list[int]:
        return sorted({s for s, _ in self.cpms}, reverse=True)

    @property
    def subsets(self) -> list[tuple[int, ...]]:
        return [qs for _, qs in self.cpms]

    def layer(self, size: int) -> list[tuple[int, ...]]:
        return [qs for s, qs in self.cpms if s == size]

    def covers_all(self) -> bool:
        return set().union(*map(set, self.subsets)) == set(range(self.width)) if self.cpms else self.width == 0

    def to_json(self) -> dict:
        out = {
            "width": self.width,
            "layers": [{"size": s, "subsets": [list(qs) for qs in self.layer(s)]} for s in self.sizes],
        }
        if self.trials:
            out["trials"] = {",".join(map(str, qs)): int(t) for qs, t in self.trials.items()}
        return out

    @classmethod
    def from_json(cls, data: dict) -> "SubsetPlan":
        cpms = [(layer["size"], tuple(qs)) for layer in data["layers"] for qs in layer["subsets"]]
        trials = {tuple(int(q) for q in k.split(",")): int(v)
                  for k, v in data.get("trials", {}).items()}
        return cls(int(data["width"]), cpms, trials)


def _dedup(windows):
    seen, out = set(), []
    for qs in windows:
        key = frozenset(qs)
        if key not in seen:
            seen.add(key)
            out.append(qs)
    return out


def sliding_window_plan(n: int, s: int = 2) -> SubsetPlan:
    """``n`` wrap-around windows of ``s`` consecutive qubits, duplicates removed.

    >>> sliding_window_plan(4, 2).subsets
    [(0, 1), (1, 2), (2, 3), (0, 3)]
    """
    if s < 2:
        raise ValidationError("subset size must be at least 2; single qubits carry no correlation")
    if s > n:
        raise ValidationError(f"subset size {s} exceeds program width {n}")
    windows = [tuple(sorted((i + j) % n for j in range(s))) for i in range(n)]
    return SubsetPlan(n, [(s, qs) for qs in _dedup(windows)])


def multilayer_plan(n: int, s_min: int = 2, s_max: int = 5) -> SubsetPlan:
    """Union of sliding-window plans for every size in ``[s_min, s_max]``."""
    if s_max > n:
        raise ValidationError(f"s_max={s_max} exceeds program width {n}")
    if s_min > s_max:
        raise ValidationError(f"s_min={s_min} > s_max={s_max}")
    cpms = []
    for s in range(s_max, s_min - 1, -1):
        cpms.extend(sliding_window_plan(n, s).cpms)
    return SubsetPlan(n, cpms)


def random_plan(n: int, s: int, count: int, seed=None, max_attempts: int = 200_000) -> SubsetPlan:
    """``count`` distinct random ``s``-subsets that together cover every qubit.

    Draws are uniform over all ``C(n, s)`` subsets and repeated until the
    coverage rule holds.
    """
    if s < 2 or s > n:
        raise ValidationError(f"subset size {s} invalid for width {n}")
    total = math.comb(n, s)
    if count > total:
        raise ValidationError(f"only {total} distinct subsets of size {s} exist, asked for {count}")
    if count * s < n:
        raise ValidationError(f"{count} subsets of size {s} cannot cover {n} qubits")
    rng = np.random.default_rng(seed)
    everything = list(combinations(range(n), s)) if total <= 1_000_000 else None
    for _ in range(max_attempts):
        if everything is not None:
            picks = [everything[i] for i in rng.choice(total, size=count, replace=False)]
        else:
            chosen = set()
            while len(chosen) < count:
                chosen.add(tuple(sorted(rng.choice(n, size=s, replace=False).tolist())))
            picks = list(chosen)
        if set().union(*map(set, picks)) == set(range(n)):
            return SubsetPlan(n, [(s, tuple(qs)) for qs in picks])
    raise ValidationError(f"no covering plan found in {max_attempts} attempts")


@dataclass(frozen=True)
class TrialBudget:
    total_trials: int
    global_trials: int
    per_cpm: dict[tuple[int, ...], int]

    @property
    def subset_trials(self) -> int:
        return sum(self.per_cpm.values())


def split_trials(total_trials: int, plan: SubsetPlan, global_fraction: float = 0.5) -> TrialBudget:
    """Split trials between the global run and the CPMs.

    The global run gets ``round(global_fraction * total)``; the rest is divided
    evenly over the CPMs, earlier CPMs absorbing the remainder.

    >>> b = split_trials(1000, sliding_window_plan(3, 2))
    >>> b.global_trials, list(b.per_cpm.values())
    (500, [167, 167, 166])
    """
    total_trials = int(total_trials)
    if total_trials <= 0:
        raise ValidationError("total trials must be positive")
    if not 0.0 <= global_fraction <= 1.0:
        raise ValidationError("global fraction must lie in [0, 1]")
    subsets = plan.subsets
    if not subsets:
        return TrialBudget(total_trials, total_trials, {})
    global_trials = int(math.floor(global_fraction * total_trials + 0.5))
    rest = total_trials - global_trials
    base, extra = divmod(rest, len(subsets))
    per_cpm = {qs: base + (1 if i < extra else 0) for i, qs in enumerate(subsets)}
    return TrialBudget(total_trials, global_trials, per_cpm)


def estimate_trials(s: int, confidence: float = DEFAULT_CONFIDENCE) -> int:
    """Trials needed to see every one of the ``2**s`` outcomes at least once.

    Uses ``-ln(1 - confidence) * N**2`` with ``N = 2**s``.
    """
    if not 0.0 < confidence < 1.0:
        raise ValidationError("confidence must lie strictly between 0 and 1")
    if s < 1:
        raise ValidationError("subset size must be positive")
    n_outcomes = 2 ** int(s)
    return int(math.ceil(-math.log1p(-confidence) * n_outcomes * n_outcomes))
