"""JSON file formats: count files, PMF files, plans and noise profiles.

Count file::

    {"width": 4, "qubits": [3, 1], "shots": 1000, "counts": {"01": 480, ...}}

``qubits`` is omitted for a global histogram.  For a marginal, character ``j``
of every key is the value of ``qubits[j]``; files are written with qubits in
descending order.  A PMF file replaces ``shots``/``counts`` by
``probabilities``.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ValidationError
from .noise_sim import NoiseProfile
from .pmf import Marginal, SparsePmf, from_counts
from .subsetting import SubsetPlan


def dump_json(data, path):
    """Write ``data`` deterministically (sorted keys, fixed indentation)."""
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text)


def load_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise ValidationError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None


def _qubit_header(qubits):
    return sorted((int(q) for q in qubits), reverse=True)


def count_file(counts: dict[str, int], width: int, qubits=None) -> dict:
    """Count-file payload; marginal keys are permuted into descending-qubit layout."""
    counts = {k: int(v) for k, v in counts.items()}
    data = {"width": int(width), "shots": sum(counts.values())}
    if qubits is not None:
        qubits = [int(q) for q in qubits]
        target = _qubit_header(qubits)
        if target != qubits:
            pos = [qubits.index(q) for q in target]
            counts = {"".join(k[i] for i in pos): v for k, v in counts.items()}
        data["qubits"] = target
    data["counts"] = dict(sorted(counts.items()))
    return data


def write_counts(path, counts, width, qubits=None):
    dump_json(count_file(counts, width, qubits), path)


def _validate_header(data, path):
    if not isinstance(data, dict) or "width" not in data:
        raise ValidationError(f"{path}: missing 'width'")
    width = data["width"]
    if not isinstance(width, int) or width < 1:
        raise ValidationError(f"{path}: 'width' must be a positive integer")
    qubits = data.get("qubits")
    if qubits is not None:
        if (not isinstance(qubits, list) or not all(isinstance(q, int) for q in qubits)
                or len(set(qubits)) != len(qubits) or any(not 0 <= q < width for q in qubits)):
            raise ValidationError(f"{path}: 'qubits' must list distinct indices below width {width}")
    return width, qubits


def parse_counts(data, path="<counts>") -> tuple[int, list[int] | None, dict[str, int]]:
    width, qubits = _validate_header(data, path)
    counts = data.get("counts")
    if not isinstance(counts, dict):
        raise ValidationError(f"{path}: missing 'counts' object")
    key_width = width if qubits is None else len(qubits)
    for key, value in counts.items():
        if len(key) != key_width or key.strip("01"):
            raise ValidationError(f"{path}: outcome {key!r} does not have width {key_width}")
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise ValidationError(f"{path}: count for {key!r} must be a non-negative integer")
    shots = data.get("shots")
    if shots is not None and shots != sum(counts.values()):
        raise ValidationError(f"{path}: 'shots'={shots} but counts sum to {sum(counts.values())}")
    return width, qubits, counts


def read_counts(path) -> tuple[int, list[int] | None, dict[str, int]]:
    return parse_counts(load_json(path), path)


def read_global(path) -> SparsePmf:
    """A global histogram or PMF file as a normalized PMF."""
    data = load_json(path)
    width, qubits = _validate_header(data, path)
    if qubits is not None and sorted(qubits) != list(range(width)):
        raise ValidationError(f"{path}: expected a global file, found a marginal over {qubits}")
    return _pmf_from(data, path, width, None)


def _pmf_from(data, path, width, qubits):
    key_width = width if qubits is None else len(qubits)
    try:
        if "probabilities" in data:
            probs = data["probabilities"]
            if not isinstance(probs, dict):
                raise ValidationError(f"{path}: 'probabilities' must be an object")
            return SparsePmf(probs, width=key_width)
        _, _, counts = parse_counts(data, path)
        return from_counts(counts, key_width)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def read_marginal(path, parent_width: int | None = None) -> Marginal:
    data = load_json(path)
    width, qubits = _validate_header(data, path)
    if qubits is None:
        raise ValidationError(f"{path}: marginal file needs a 'qubits' list")
    if parent_width is not None and width != parent_width:
        raise ValidationError(f"{path}: width {width} does not match global width {parent_width}")
    return Marginal(tuple(qubits), _pmf_from(data, path, width, qubits))


def pmf_file(p: SparsePmf, qubits=None, width=None, **extra) -> dict:
    data = {"width": int(width if width is not None else p.width),
            "probabilities": dict(sorted(p.to_dict().items()))}
    if qubits is not None:
        data["qubits"] = [int(q) for q in qubits]
    data.update(extra)
    return data


def write_pmf(path, p: SparsePmf, **extra):
    dump_json(pmf_file(p, **extra), path)


def write_marginal(path, m: Marginal, parent_width: int):
    m = m.canonical()
    dump_json(pmf_file(m.pmf, qubits=m.qubits, width=parent_width), path)


def read_pmf(path) -> SparsePmf:
    """Any global count or PMF file."""
    return read_global(path)


def read_profile(path, **kwargs) -> NoiseProfile:
    return NoiseProfile.from_json(load_json(path), **kwargs)


def write_profile(path, profile: NoiseProfile):
    dump_json(profile.to_json(), path)


def read_plan(path) -> SubsetPlan:
    try:
        return SubsetPlan.from_json(load_json(path))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: malformed plan ({exc})") from None


def write_plan(path, plan: SubsetPlan):
    dump_json(plan.to_json(), path)
