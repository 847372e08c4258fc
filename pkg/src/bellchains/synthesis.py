"""Monte Carlo simulation of remote chain synthesis under one-way photon control.

Every round, each participant's growth site receives a monomer of kind ``a``
or ``b`` (equally likely). The kind selects which observable that site's
photon is measured in; outcome +1 attaches the monomer with a forward shift,
-1 with a backward shift. Two chains from opposite families are then laid
over each other and each position either glues or not according to
:data:`GLUING_TABLE`.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .chsh import (
    DEFAULT_PRESET,
    ConventionPreset,
    PairSpec,
    Participant,
    Sex,
    check_roster,
    get_preset,
    gluing_index,
    xi_exact,
)
from .qcore import SIGMA_X, SIGMA_Z, PureState, born_distribution

#: shift magnitude as a fraction of monoblock length; only the shift sign enters the gluing rule
DX = 0.25


class MonomerKind(enum.IntEnum):
    A = 0
    B = 1

    def __str__(self) -> str:
        return "ab"[self]


class Shift(enum.IntEnum):
    FWD = 1
    BACK = -1

    def __str__(self) -> str:
        return "+" if self is Shift.FWD else "-"


class Monoblock(NamedTuple):
    kind: MonomerKind
    shift: Shift

    def __str__(self) -> str:
        return f"{self.kind}{self.shift}"


@dataclass(frozen=True)
class GluingTable:
    """Required shift product per (first-family kind, second-family kind)."""

    aa: int = 1
    ab: int = 1
    ba: int = -1
    bb: int = 1

    def sign(self, k1: int, k2: int) -> int:
        return ((self.aa, self.ab), (self.ba, self.bb))[int(k1)][int(k2)]

    def as_array(self) -> np.ndarray:
        return np.array([[self.aa, self.ab], [self.ba, self.bb]], dtype=np.int8)

    def glues(self, k1, k2, s1, s2) -> bool:
        return int(s1) * int(s2) == self.sign(k1, k2)


GLUING_TABLE = GluingTable()


def kind_to_observable(kind: MonomerKind, sex: Sex, preset: ConventionPreset = DEFAULT_PRESET) -> np.ndarray:
    """Observable measured at a site when a monomer of ``kind`` arrives.

    The second family's kinds map crosswise (a -> Y, b -> X). With the gluing
    table's odd sign on (b, a), this makes the expected glue fraction of a
    pair equal (1 + xi) / 2.
    """
    kind = MonomerKind(kind)
    if sex is Sex.FIRST:
        return SIGMA_X if kind is MonomerKind.A else SIGMA_Z
    preset = get_preset(preset)
    return preset.Y if kind is MonomerKind.A else preset.X


def _site_observables(participants: Sequence[Participant], kinds, preset) -> list[np.ndarray]:
    by_qubit = sorted(participants, key=lambda p: p.qubit)
    return [kind_to_observable(kinds[p.qubit], p.sex, preset) for p in by_qubit]


def _check_register(state: PureState, participants: Sequence[Participant]) -> None:
    check_roster(participants)
    if sorted(p.qubit for p in participants) != list(range(state.num_qubits)):
        raise ValueError("roster must place exactly one participant on each qubit of the state")


def sample_round(
    state: PureState,
    participants: Sequence[Participant],
    preset: ConventionPreset = DEFAULT_PRESET,
    rng: np.random.Generator | None = None,
    kinds: Sequence[int] | None = None,
) -> list[tuple[MonomerKind, int, Shift]]:
    """One synthesis round: ``(kind, outcome, shift)`` per participant, in roster order.

    ``kinds`` (indexed by qubit) overrides the random monomer arrival.
    """
    _check_register(state, participants)
    rng = np.random.default_rng() if rng is None else rng
    n = state.num_qubits
    if kinds is None:
        kinds = rng.integers(0, 2, size=n)
    kinds = [MonomerKind(int(k)) for k in kinds]
    probs = born_distribution(state, _site_observables(participants, kinds, preset)).ravel()
    idx = int(rng.choice(probs.size, p=probs / probs.sum()))
    out = []
    for p in participants:
        outcome = -1 if (idx >> (n - 1 - p.qubit)) & 1 else 1
        out.append((kinds[p.qubit], outcome, Shift(outcome)))
    return out


@dataclass(frozen=True, eq=False)
class ProtocolConfig:
    state: PureState
    participants: tuple[Participant, ...]
    preset: ConventionPreset = DEFAULT_PRESET
    chain_length: int = 1000
    trials: int = 100
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "participants", tuple(self.participants))
        object.__setattr__(self, "preset", get_preset(self.preset))
        if self.chain_length < 1:
            raise ValueError("chain_length must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        _check_register(self.state, self.participants)


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial, a pure function of (master_seed, trial)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(trial,))))


def _alias_table(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vose alias table: column j keeps itself with probability q[j], else yields alias[j]."""
    k = p.size
    scaled = p * k
    q = np.ones(k)
    alias = np.arange(k)
    small = [i for i in range(k) if scaled[i] < 1.0]
    large = [i for i in range(k) if scaled[i] >= 1.0]
    while small and large:
        s, g = small.pop(), large.pop()
        q[s] = scaled[s]
        alias[s] = g
        scaled[g] -= 1.0 - scaled[s]
        (small if scaled[g] < 1.0 else large).append(g)
    # leftovers are 1 up to rounding
    return q, alias


class _JointTable:
    """Alias sampler over (kind combination, outcome tuple) categories.

    Category ``k * m + o`` (``m = 2**n``) means the sites received the kinds
    encoded by the bits of ``k`` and observed the outcomes encoded by the bits
    of ``o``; its probability is ``P(o | k) / m``, i.e. uniform independent
    kinds followed by a Born-rule joint measurement.
    """

    def __init__(self, state: PureState, participants: Sequence[Participant], preset: ConventionPreset):
        _check_register(state, participants)
        n = state.num_qubits
        m = 2**n
        self.n = n
        self.participants = tuple(participants)
        probs = np.empty(m * m)
        for k in range(m):
            kinds = [(k >> (n - 1 - q)) & 1 for q in range(n)]
            p = born_distribution(state, _site_observables(participants, kinds, preset)).ravel()
            probs[k * m : (k + 1) * m] = p / p.sum() / m
        self.probs = probs
        q, alias = _alias_table(probs)
        # one raw 64-bit draw per round: the top 2n bits pick a column, the rest decide keep/alias
        self._shift = np.uint64(64 - 2 * n)
        self._mask = np.uint64(2 ** (64 - 2 * n) - 1)
        self._threshold = np.minimum(np.floor(q * 2.0 ** (64 - 2 * n)), 2.0 ** (64 - 2 * n)).astype(np.uint64)
        self._threshold[q >= 1.0] = np.uint64(2 ** (64 - 2 * n))
        self._alias = alias.astype(np.intp)
        cat = np.arange(m * m)
        bits = (n - 1) - np.arange(n)
        # per-qubit kind (0/1) and outcome (+-1) for every category
        self.kinds = ((cat[:, None] // m) >> bits) & 1
        self.outcomes = 1 - 2 * (((cat[:, None] % m) >> bits) & 1)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raw = rng.bit_generator.random_raw(size)
        col = (raw >> self._shift).astype(np.intp)
        return np.where((raw & self._mask) < self._threshold[col], col, self._alias[col])

    def glue_lookup(self, pair: PairSpec, table: GluingTable = GLUING_TABLE) -> np.ndarray:
        i, j = pair.first.qubit, pair.second.qubit
        sign = table.as_array()[self.kinds[:, i], self.kinds[:, j]]
        return self.outcomes[:, i] * self.outcomes[:, j] == sign


@dataclass(frozen=True, eq=False)
class Chain:
    owner: Participant
    kinds: np.ndarray  # int8, 0 = a, 1 = b
    shifts: np.ndarray  # int8, +1 forward, -1 backward (equal to the measurement outcome)

    def __len__(self) -> int:
        return len(self.kinds)

    @property
    def blocks(self) -> list[Monoblock]:
        return [Monoblock(MonomerKind(k), Shift(s)) for k, s in zip(self.kinds, self.shifts)]

    @classmethod
    def from_blocks(cls, owner: Participant, text: str) -> Chain:
        """Build from compact text such as ``"a+ b- b+"``."""
        toks = text.split()
        kinds = np.array(["ab".index(t[0]) for t in toks], dtype=np.int8)
        shifts = np.array([1 if t[1] == "+" else -1 for t in toks], dtype=np.int8)
        return cls(owner, kinds, shifts)

    def __str__(self) -> str:
        return " ".join(str(b) for b in self.blocks)


def _run_trials(config: ProtocolConfig, table: _JointTable, trial_ids, workers: int) -> list[np.ndarray]:
    def one(t):
        return table.sample(trial_rng(config.master_seed, t), config.chain_length)

    if workers <= 1:
        return [one(t) for t in trial_ids]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, trial_ids))


def synthesize_chains(config: ProtocolConfig, workers: int = 1) -> list[list[Chain]]:
    """Chains for every trial: ``result[trial][k]`` belongs to ``config.participants[k]``."""
    table = _JointTable(config.state, config.participants, config.preset)
    out = []
    for cats in _run_trials(config, table, range(config.trials), workers):
        kinds = table.kinds[cats].astype(np.int8)
        shifts = table.outcomes[cats].astype(np.int8)
        out.append([Chain(p, kinds[:, p.qubit], shifts[:, p.qubit]) for p in config.participants])
    return out


def overlay(c1: Chain, c2: Chain, table: GluingTable = GLUING_TABLE) -> tuple[int, float]:
    """Glue count and fraction when chain ``c1`` (first family) is laid over ``c2`` (second family)."""
    if len(c1) != len(c2):
        raise ValueError(f"chain lengths differ: {len(c1)} vs {len(c2)}")
    if c1.owner.sex is not Sex.FIRST or c2.owner.sex is not Sex.SECOND:
        raise ValueError("overlay expects a first-family chain over a second-family chain")
    if len(c1) == 0:
        raise ValueError("cannot overlay empty chains")
    sign = table.as_array()[c1.kinds, c2.kinds]
    count = int(np.count_nonzero(c1.shifts.astype(int) * c2.shifts == sign))
    return count, count / len(c1)


def _estimate(fractions: np.ndarray, chain_length: int) -> tuple[float, float]:
    est = float(np.mean(fractions))
    if fractions.size > 1:
        se = float(np.std(fractions, ddof=1) / np.sqrt(fractions.size))
    else:
        se = float(np.sqrt(est * (1 - est) / chain_length))
    return est, se


def mc_gluing_indices(
    config: ProtocolConfig, pairs: Sequence[PairSpec], workers: int = 1
) -> dict[str, tuple[float, float]]:
    """``{pair label: (estimate, standard error)}`` from one shared set of simulated chains.

    The standard error comes from the spread of per-trial glue fractions
    (binomial within-trial error when ``trials == 1``).
    """
    if config.trials * config.chain_length < 100:
        raise ValueError("need trials * chain_length >= 100 rounds")
    table = _JointTable(config.state, config.participants, config.preset)
    lookups = {p.label: table.glue_lookup(p) for p in pairs}
    fractions = {label: np.empty(config.trials) for label in lookups}
    for t, cats in enumerate(_run_trials(config, table, range(config.trials), workers)):
        for label, lut in lookups.items():
            fractions[label][t] = np.count_nonzero(lut[cats]) / config.chain_length
    return {label: _estimate(f, config.chain_length) for label, f in fractions.items()}


def mc_gluing_index(config: ProtocolConfig, pair: PairSpec, workers: int = 1) -> tuple[float, float]:
    return mc_gluing_indices(config, [pair], workers)[pair.label]


def exact_glue_fraction(state: PureState, pair: PairSpec, preset: ConventionPreset = DEFAULT_PRESET) -> float:
    return gluing_index(xi_exact(state, pair, preset))


def enumerated_glue_fraction(
    state: PureState,
    participants: Sequence[Participant],
    pair: PairSpec,
    preset: ConventionPreset = DEFAULT_PRESET,
    table: GluingTable = GLUING_TABLE,
) -> float:
    """Expected glue fraction by summing over every kind assignment and outcome tuple.

    Independent of the CHSH operator: it uses only Born probabilities, the
    kind-to-observable map and the gluing table.
    """
    _check_register(state, participants)
    n = state.num_qubits
    i, j = pair.first.qubit, pair.second.qubit
    total = 0.0
    for k in range(2**n):
        kinds = [(k >> (n - 1 - q)) & 1 for q in range(n)]
        probs = born_distribution(state, _site_observables(participants, kinds, preset))
        sign = table.sign(kinds[i], kinds[j])
        for idx in np.ndindex(probs.shape):
            si = 1 - 2 * idx[i]
            sj = 1 - 2 * idx[j]
            if si * sj == sign:
                total += probs[idx]
    return total / 2**n


TRACE_COLUMNS = ("trial", "position", "participant_id", "kind", "outcome", "shift")


def write_trace_csv(chains_by_trial: list[list[Chain]], fh: io.TextIOBase | None = None) -> str:
    """Per-monoblock trace; returns the CSV text and also writes it to ``fh`` if given."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for t, chains in enumerate(chains_by_trial):
        length = len(chains[0])
        for pos in range(length):
            for c in chains:
                s = int(c.shifts[pos])
                w.writerow([t, pos, c.owner.id, "ab"[c.kinds[pos]], s, "+" if s > 0 else "-"])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def summary_json(
    state_id: str, config: ProtocolConfig, pair: PairSpec, estimate: float, stderr: float
) -> str:
    return json.dumps(
        {
            "state_id": state_id,
            "pair": pair.label,
            "preset": config.preset.name,
            "L": config.chain_length,
            "trials": config.trials,
            "seed": config.master_seed,
            "estimate": estimate,
            "stderr": stderr,
            "exact": exact_glue_fraction(config.state, pair, config.preset),
        },
        indent=2,
    )
