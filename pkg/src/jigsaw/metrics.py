"""Figures of merit: PST, IST, TVD fidelity, Hellinger and the QAOA MaxCut ARG."""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyInputError, ValidationError
from .pmf import SparsePmf, align, hellinger


@dataclass(frozen=True)
class MetricReport:
    pst: float
    ist: float
    tvd: float
    fidelity: float
    hellinger: float
    arg: float | None = None

    def to_json(self) -> dict:
        return asdict(self)


def pst(p: SparsePmf, correct: Iterable[str]) -> float:
    """Probability mass on the correct outcome(s)."""
    return float(sum(p.prob(o) for o in set(correct)))


def ist(p: SparsePmf, correct: Iterable[str]) -> float:
    """Best correct outcome's mass over the most frequent incorrect outcome's.

    Returns ``inf`` when every observed outcome is correct.
    """
    if len(p) == 0:
        raise EmptyInputError("IST of an empty PMF")
    correct = set(correct)
    best_correct = max((p.prob(o) for o in correct), default=0.0)
    wrong = [pr for o, pr in zip(p.outcomes, p.probs) if o not in correct]
    if not wrong:
        return math.inf
    return float(best_correct / max(wrong))


def tvd(p: SparsePmf, q: SparsePmf) -> float:
    u, v = align(p, q)
    return min(0.5 * float(np.abs(u - v).sum()), 1.0)


def fidelity(p: SparsePmf, q: SparsePmf) -> tuple[float, float]:
    """``(tvd, 1 - tvd)`` with the half-normalized total variation distance."""
    d = tvd(p, q)
    return d, 1.0 - d


@dataclass(frozen=True)
class MaxCutInstance:
    n_vertices: int
    edges: tuple[tuple[int, int, float], ...]
    optimum: float

    def __post_init__(self):
        edges = tuple((int(u), int(v), float(w)) for u, v, w in self.edges)
        object.__setattr__(self, "edges", edges)
        for u, v, _ in edges:
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices) or u == v:
                raise ValidationError(f"bad edge ({u}, {v}) for {self.n_vertices} vertices")
        if not self.optimum > 0:
            raise ValidationError("optimum cut value must be positive")

    @classmethod
    def from_edges(cls, n_vertices, edges, optimum=None) -> "MaxCutInstance":
        edges = [(e[0], e[1], e[2] if len(e) > 2 else 1.0) for e in edges]
        if optimum is None:
            optimum = brute_force_maxcut(n_vertices, edges)
        return cls(n_vertices, tuple(edges), optimum)

    def cut_value(self, outcome: str) -> float:
        """Weight of edges cut by ``outcome`` (character for vertex v is ``outcome[-1-v]``)."""
        n = len(outcome)
        return sum(w for u, v, w in self.edges if outcome[n - 1 - u] != outcome[n - 1 - v])


def brute_force_maxcut(n_vertices: int, edges) -> float:
    """Exact MaxCut by enumeration (vertex 0 pinned to side 0)."""
    if n_vertices > 24:
        raise ValidationError("brute force MaxCut limited to 24 vertices")
    best = 0.0
    for code in range(2 ** max(n_vertices - 1, 0)):
        side = code << 1
        cut = sum(e[2] if len(e) > 2 else 1.0 for e in edges
                  if ((side >> e[0]) & 1) != ((side >> e[1]) & 1))
        best = max(best, cut)
    return best


def read_maxcut(path) -> MaxCutInstance:
    """Parse the ``n m opt`` header plus ``u v [w]`` edge lines."""
    lines = [ln.split("#", 1)[0].strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValidationError(f"{path}: empty graph file")
    try:
        n, m, opt = lines[0].split()
        n, m, opt = int(n), int(m), float(opt)
        edges = []
        for ln in lines[1:]:
            parts = ln.split()
            if len(parts) not in (2, 3):
                raise ValueError(ln)
            edges.append((int(parts[0]), int(parts[1]), float(parts[2]) if len(parts) == 3 else 1.0))
    except ValueError as exc:
        raise ValidationError(f"{path}: malformed graph file ({exc})") from None
    if len(edges) != m:
        raise ValidationError(f"{path}: header says {m} edges, found {len(edges)}")
    return MaxCutInstance(n, tuple(edges), opt)


def write_maxcut(path, g: MaxCutInstance):
    lines = [f"{g.n_vertices} {len(g.edges)} {g.optimum:g}"]
    lines += [f"{u} {v} {w:g}" for u, v, w in g.edges]
    Path(path).write_text("\n".join(lines) + "\n")


def maxcut_expectation(p: SparsePmf, g: MaxCutInstance) -> float:
    """Mean cut value over the distribution."""
    if not g.edges:
        return 0.0
    if p.width < g.n_vertices:
        raise ValidationError(f"PMF width {p.width} smaller than graph with {g.n_vertices} vertices")
    bits = p.bits
    cuts = np.zeros(len(p))
    for u, v, w in g.edges:
        cuts += w * (bits[:, u] != bits[:, v])
    return float(np.dot(p.probs, cuts))


def approximation_ratio(p: SparsePmf, g: MaxCutInstance) -> float:
    return maxcut_expectation(p, g) / g.optimum


def arg(p_ideal: SparsePmf, p_real: SparsePmf, g: MaxCutInstance) -> float:
    """Approximation ratio gap in percent; negative when ``p_real`` does better."""
    ar_ideal = approximation_ratio(p_ideal, g)
    if ar_ideal == 0:
        raise ValidationError("ideal approximation ratio is zero")
    return 100.0 * (ar_ideal - approximation_ratio(p_real, g)) / ar_ideal


def evaluate(p: SparsePmf, ideal: SparsePmf, correct: Iterable[str],
             graph: MaxCutInstance | None = None) -> MetricReport:
    correct = set(correct)
    d, fid = fidelity(ideal, p)
    return MetricReport(
        pst=pst(p, correct),
        ist=ist(p, correct),
        tvd=d,
        fidelity=fid,
        hellinger=hellinger(ideal, p),
        arg=None if graph is None else arg(ideal, p, graph),
    )
