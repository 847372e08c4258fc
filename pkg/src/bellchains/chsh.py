"""CHSH correlators for opposite-family participant pairs inside a small register.

Participants of the FIRST family measure ``a = sigma_x`` or ``b = sigma_z``;
participants of the SECOND family measure ``X`` or ``Y`` as fixed by a
:class:`ConventionPreset`. The per-pair quantity is

    xi = (E[aX] + E[aY] + E[bX] - E[bY]) / 4

whose classical ceiling is 1/2 and quantum ceiling 1/sqrt(2). The gluing
index of a pair is ``(1 + xi) / 2``.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .qcore import SIGMA_X, SIGMA_Z, PureState, check_hermitian, embed, expectation, observable_basis

SQRT1_2 = 1.0 / np.sqrt(2.0)
TSIRELSON_XI = SQRT1_2
CLASSICAL_XI = 0.5


class Sex(enum.Enum):
    FIRST = "first"
    SECOND = "second"


@dataclass(frozen=True, eq=False)
class ConventionPreset:
    name: str
    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        for label in ("X", "Y"):
            m = check_hermitian(getattr(self, label))
            observable_basis(m)  # enforces eigenvalues +-1
            m = m.copy()
            m.setflags(write=False)
            object.__setattr__(self, label, m)

    def __repr__(self) -> str:
        return f"ConventionPreset({self.name!r})"


SECTION2 = ConventionPreset("section2", SQRT1_2 * (SIGMA_X + SIGMA_Z), SQRT1_2 * (SIGMA_X - SIGMA_Z))
FIGURE4 = ConventionPreset("figure4", SQRT1_2 * (SIGMA_Z - SIGMA_X), -SQRT1_2 * (SIGMA_X + SIGMA_Z))
TRIPLET_CAL = ConventionPreset("triplet-cal", SQRT1_2 * (SIGMA_X - SIGMA_Z), SQRT1_2 * (SIGMA_X + SIGMA_Z))

#: declaration order doubles as the calibration tie-break order
PRESETS: dict[str, ConventionPreset] = {p.name: p for p in (SECTION2, FIGURE4, TRIPLET_CAL)}
DEFAULT_PRESET = TRIPLET_CAL


def get_preset(name: str | ConventionPreset) -> ConventionPreset:
    if isinstance(name, ConventionPreset):
        return name
    key = name.lower().replace("_", "-")
    if key == "triplet":
        key = "triplet-cal"
    try:
        return PRESETS[key]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def swap_labels(preset: ConventionPreset) -> ConventionPreset:
    return ConventionPreset(f"{preset.name}-swapped", preset.Y, preset.X)


@dataclass(frozen=True)
class Participant:
    id: str
    qubit: int
    sex: Sex


@dataclass(frozen=True)
class PairSpec:
    first: Participant
    second: Participant
    legal: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.first.sex is not Sex.FIRST or self.second.sex is not Sex.SECOND:
            raise ValueError(f"pair {self.label} must be FIRST x SECOND")
        if self.first.qubit == self.second.qubit:
            raise ValueError(f"pair {self.label} places both participants on qubit {self.first.qubit}")

    @property
    def label(self) -> str:
        return f"{self.first.id}-{self.second.id}"


def roster(*spec: tuple[str, Sex]) -> tuple[Participant, ...]:
    """Participants in register order: ``roster(("Alice", Sex.FIRST), ...)``."""
    return tuple(Participant(name, q, sex) for q, (name, sex) in enumerate(spec))


def check_roster(participants: Sequence[Participant]) -> None:
    qubits = [p.qubit for p in participants]
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"duplicate qubit indices in roster: {qubits}")
    ids = [p.id for p in participants]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate participant ids in roster: {ids}")


def all_heterosexual_pairs(
    participants: Iterable[Participant], legal: Iterable[tuple[str, str]] = ()
) -> list[PairSpec]:
    """Every FIRST x SECOND pair, sorted by (first id, second id)."""
    participants = list(participants)
    check_roster(participants)
    firsts = sorted((p for p in participants if p.sex is Sex.FIRST), key=lambda p: p.id)
    seconds = sorted((p for p in participants if p.sex is Sex.SECOND), key=lambda p: p.id)
    if not firsts or not seconds:
        raise ValueError("need at least one participant of each family")
    legal = set(legal)
    return [PairSpec(f, s, (f.id, s.id) in legal) for f in firsts for s in seconds]


def first_observables() -> tuple[np.ndarray, np.ndarray]:
    return SIGMA_X, SIGMA_Z


#: sign of each correlator in (aX, aY, bX, bY)
XI_SIGNS = (1, 1, 1, -1)


def _correlator_ops(pair: PairSpec, n: int, preset: ConventionPreset) -> list[np.ndarray]:
    i, j = pair.first.qubit, pair.second.qubit
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"pair {pair.label} does not fit in {n} qubits")
    a, b = first_observables()
    return [embed({i: u, j: v}, n) for u in (a, b) for v in (preset.X, preset.Y)]


def chsh_operator(pair: PairSpec, n: int, preset: ConventionPreset = DEFAULT_PRESET) -> np.ndarray:
    ops = _correlator_ops(pair, n, get_preset(preset))
    return 0.25 * sum(s * o for s, o in zip(XI_SIGNS, ops))


def correlators(state: PureState, pair: PairSpec, preset: ConventionPreset = DEFAULT_PRESET) -> np.ndarray:
    """``[E[aX], E[aY], E[bX], E[bY]]`` for the pair."""
    return np.array([expectation(state, o) for o in _correlator_ops(pair, state.num_qubits, get_preset(preset))])


def xi_exact(state: PureState, pair: PairSpec, preset: ConventionPreset = DEFAULT_PRESET) -> float:
    return expectation(state, chsh_operator(pair, state.num_qubits, preset))


def gluing_index(xi: float) -> float:
    return (1.0 + xi) / 2.0


@dataclass(frozen=True)
class CalibrationTarget:
    label: str
    state: PureState
    pair: PairSpec
    target_index: float


@dataclass
class CalibrationReport:
    chosen: ConventionPreset
    totals: dict[str, float]
    residuals: dict[str, list[tuple[str, float, float]]]  # preset -> [(label, computed, residual)]

    def summary(self) -> str:
        lines = [f"calibrated preset: {self.chosen.name}"]
        for name, total in self.totals.items():
            lines.append(f"  {name:12s} total |deviation| = {total:.6f}")
        return "\n".join(lines)


def calibrate_convention(
    targets: Sequence[CalibrationTarget], presets: Sequence[ConventionPreset] | None = None
) -> CalibrationReport:
    """Preset with the smallest total |computed index - target|; ties go to declaration order."""
    if not targets:
        raise ValueError("calibration registry is empty")
    presets = list(PRESETS.values()) if presets is None else list(presets)
    totals: dict[str, float] = {}
    residuals: dict[str, list[tuple[str, float, float]]] = {}
    for p in presets:
        rows = []
        for t in targets:
            idx = gluing_index(xi_exact(t.state, t.pair, p))
            rows.append((t.label, idx, idx - t.target_index))
        residuals[p.name] = rows
        totals[p.name] = float(sum(abs(r[2]) for r in rows))
    # rounding absorbs float noise so exact ties fall back to declaration order
    best = min(presets, key=lambda p: round(totals[p.name], 12))
    return CalibrationReport(best, totals, residuals)
