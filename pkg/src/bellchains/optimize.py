"""Maxima and minima of pair objectives over quantum states and classical strategies.

Three strategy spaces are supported:

* unrestricted pure states of the whole register (linear objectives are
  solved exactly as a largest-eigenvalue problem);
* biphoton products, i.e. tensor products of two-qubit pure blocks and
  single-qubit pure states over a fixed partition of the qubits, searched by
  a derivative-free pattern search with random restarts;
* deterministic classical strategies, enumerated exhaustively.
"""

from __future__ import annotations

import enum
import itertools
import json
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize as sopt

from .chsh import DEFAULT_PRESET, ConventionPreset, PairSpec, Participant, chsh_operator, get_preset, gluing_index
from .qcore import PureState, eig_hermitian, expectation, format_state

# ---------------------------------------------------------------------------
# objectives


class ObjectiveKind(enum.Enum):
    SINGLE_PAIR_XI = "single_pair_xi"
    SUM_INDEX = "sum_index"
    DIFFERENTIATION = "differentiation"
    MIN_MAX_INDEX = "min_max_index"


@dataclass(frozen=True)
class Objective:
    """A function of the per-pair xi values.

    For ``DIFFERENTIATION`` the first pair is the legal one and the value is
    its gluing index minus the mean index of the remaining (illegal) pairs.
    """

    kind: ObjectiveKind
    pairs: tuple[PairSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        if not self.pairs:
            raise ValueError("objective needs at least one pair")
        if self.kind is ObjectiveKind.SINGLE_PAIR_XI and len(self.pairs) != 1:
            raise ValueError("SINGLE_PAIR_XI takes exactly one pair")
        if self.kind is ObjectiveKind.DIFFERENTIATION and len(self.pairs) < 2:
            raise ValueError("DIFFERENTIATION needs a legal pair and at least one illegal pair")

    @classmethod
    def single_pair_xi(cls, pair: PairSpec) -> Objective:
        return cls(ObjectiveKind.SINGLE_PAIR_XI, (pair,))

    @classmethod
    def sum_index(cls, pairs: Sequence[PairSpec]) -> Objective:
        return cls(ObjectiveKind.SUM_INDEX, tuple(pairs))

    @classmethod
    def differentiation(cls, legal: PairSpec, illegal: Sequence[PairSpec]) -> Objective:
        return cls(ObjectiveKind.DIFFERENTIATION, (legal, *illegal))

    @classmethod
    def min_max_index(cls, pairs: Sequence[PairSpec]) -> Objective:
        return cls(ObjectiveKind.MIN_MAX_INDEX, tuple(pairs))

    @property
    def is_linear(self) -> bool:
        return self.kind is not ObjectiveKind.MIN_MAX_INDEX

    @property
    def label(self) -> str:
        return f"{self.kind.value}({', '.join(p.label for p in self.pairs)})"

    def from_xis(self, xis: Sequence[float]) -> float:
        """Objective value given xi for each pair, in ``self.pairs`` order."""
        xis = np.asarray(xis, dtype=float)
        if self.kind is ObjectiveKind.SINGLE_PAIR_XI:
            return float(xis[0])
        idx = gluing_index(xis)
        if self.kind is ObjectiveKind.SUM_INDEX:
            return float(np.sum(idx))
        if self.kind is ObjectiveKind.DIFFERENTIATION:
            return float(idx[0] - np.mean(idx[1:]))
        return float(np.max(idx))

    def pair_operators(self, n: int, preset: ConventionPreset) -> list[np.ndarray]:
        return [chsh_operator(p, n, preset) for p in self.pairs]

    def operator(self, n: int, preset: ConventionPreset = DEFAULT_PRESET) -> np.ndarray:
        """Hermitian H with objective value <psi|H|psi>; only for linear objectives."""
        if not self.is_linear:
            raise ValueError(f"{self.kind.name} is not linear in the state; use a search method")
        ops = self.pair_operators(n, get_preset(preset))
        eye = np.eye(2**n)
        if self.kind is ObjectiveKind.SINGLE_PAIR_XI:
            return ops[0]
        if self.kind is ObjectiveKind.SUM_INDEX:
            return sum((eye + c) / 2 for c in ops)
        return (ops[0] - sum(ops[1:]) / (len(ops) - 1)) / 2

    def evaluate(self, state: PureState, preset: ConventionPreset = DEFAULT_PRESET) -> float:
        preset = get_preset(preset)
        return self.from_xis([expectation(state, c) for c in self.pair_operators(state.num_qubits, preset)])


# ---------------------------------------------------------------------------
# strategy spaces and results


class SpaceKind(enum.Enum):
    UNRESTRICTED_PURE = "unrestricted"
    BIPHOTON_PRODUCT = "biphoton"
    CLASSICAL_DETERMINISTIC = "classical"


def check_partition(partition: Sequence[Sequence[int]], n: int) -> tuple[tuple[int, ...], ...]:
    blocks = tuple(tuple(sorted(int(q) for q in b)) for b in partition)
    flat = [q for b in blocks for q in b]
    if any(len(b) not in (1, 2) for b in blocks):
        raise ValueError("partition blocks must hold one or two qubits")
    if sorted(flat) != list(range(n)):
        raise ValueError(f"partition {blocks} must cover qubits 0..{n - 1} exactly once")
    return blocks


@dataclass(frozen=True)
class StrategySpace:
    kind: SpaceKind
    partition: tuple[tuple[int, ...], ...] | None = None
    maximally_entangled: bool = False

    @classmethod
    def unrestricted(cls) -> StrategySpace:
        return cls(SpaceKind.UNRESTRICTED_PURE)

    @classmethod
    def biphoton(cls, partition, maximally_entangled: bool = False) -> StrategySpace:
        return cls(SpaceKind.BIPHOTON_PRODUCT, tuple(tuple(b) for b in partition), maximally_entangled)

    @classmethod
    def classical(cls) -> StrategySpace:
        return cls(SpaceKind.CLASSICAL_DETERMINISTIC)

    @property
    def label(self) -> str:
        if self.kind is SpaceKind.BIPHOTON_PRODUCT:
            blocks = "|".join("".join(map(str, b)) for b in self.partition)
            return f"biphoton[{blocks}]" + ("-bell" if self.maximally_entangled else "")
        return self.kind.value


@dataclass
class OptimizationResult:
    value: float
    argmax: PureState | dict[str, tuple[int, int]]
    method: str
    restarts_used: int = 1
    residual: float = 0.0
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# unrestricted states


def max_unrestricted(objective: Objective, n: int, preset: ConventionPreset = DEFAULT_PRESET) -> OptimizationResult:
    """Exact maximum over all pure states: largest eigenvalue of the objective operator."""
    h = objective.operator(n, preset)
    w, v = eig_hermitian(h)
    vec = v[:, 0]
    residual = float(np.linalg.norm(h @ vec - w[0] * vec))
    return OptimizationResult(float(w[0]), PureState.from_vector(vec), "jacobi-eigen", 1, residual)


def _rayleigh(h: np.ndarray):
    d = h.shape[0]

    def fun(x):
        psi = x[:d] + 1j * x[d:]
        nrm = np.vdot(psi, psi).real
        hpsi = h @ psi
        f = np.vdot(psi, hpsi).real / nrm
        g = 2 * (hpsi - f * psi) / nrm
        return f, np.concatenate([g.real, g.imag])

    return fun


def ascent_unrestricted(
    objective: Objective,
    n: int,
    preset: ConventionPreset = DEFAULT_PRESET,
    restarts: int = 8,
    seed: int = 0,
) -> OptimizationResult:
    """Random-restart quasi-Newton ascent of the Rayleigh quotient (no eigensolver involved)."""
    h = objective.operator(n, preset)
    fun = _rayleigh(h)
    rng = np.random.default_rng(seed)
    best_val, best_x = -np.inf, None
    for _ in range(restarts):
        x0 = rng.normal(size=2 * h.shape[0])
        res = sopt.minimize(
            lambda x: tuple(-t for t in fun(x)), x0, jac=True, method="L-BFGS-B",
            options={"gtol": 1e-13, "ftol": 1e-16, "maxiter": 5000},
        )
        val = -res.fun
        if val > best_val:
            best_val, best_x = val, res.x
    d = h.shape[0]
    state = PureState.from_vector(best_x[:d] + 1j * best_x[d:])
    grad_norm = float(np.linalg.norm(fun(best_x)[1]))
    return OptimizationResult(float(best_val), state, "restart-lbfgs", restarts, grad_norm)


def _index_ops(objective: Objective, n: int, preset) -> list[np.ndarray]:
    eye = np.eye(2**n)
    return [(eye + c) / 2 for c in objective.pair_operators(n, get_preset(preset))]


def minmax_dual_bound(ops: Sequence[np.ndarray], seed: int = 0) -> float:
    """Lower bound on min_psi max_k <psi|A_k|psi>: max over convex weights of lambda_min(sum w_k A_k)."""
    ops = list(ops)
    if len(ops) == 1:
        return float(np.linalg.eigvalsh(ops[0])[0])

    def neg(z):
        w = np.exp(z - z.max())
        w /= w.sum()
        return -np.linalg.eigvalsh(sum(wk * a for wk, a in zip(w, ops)))[0]

    rng = np.random.default_rng(seed)
    best = -np.inf
    for z0 in [np.zeros(len(ops)), *rng.normal(size=(4, len(ops)))]:
        res = sopt.minimize(neg, z0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000})
        best = max(best, -res.fun)
    return float(best)


def min_max_unrestricted(
    objective: Objective, n: int, preset: ConventionPreset = DEFAULT_PRESET, restarts: int = 16, seed: int = 0
) -> OptimizationResult:
    """Minimize the largest pair index over all pure states (SLSQP on the epigraph form)."""
    ops = _index_ops(objective, n, preset)
    funs = [_rayleigh(a) for a in ops]
    d = 2**n
    rng = np.random.default_rng(seed)

    cons = [
        {
            "type": "ineq",
            "fun": (lambda z, f=f: z[-1] - f(z[:-1])[0]),
            "jac": (lambda z, f=f: np.concatenate([-f(z[:-1])[1], [1.0]])),
        }
        for f in funs
    ]
    cons.append({"type": "eq", "fun": lambda z: z[:-1] @ z[:-1] - 1.0, "jac": lambda z: np.concatenate([2 * z[:-1], [0.0]])})
    best_val, best_x = np.inf, None
    for _ in range(restarts):
        x0 = rng.normal(size=2 * d)
        x0 /= np.linalg.norm(x0)
        z0 = np.concatenate([x0, [max(f(x0)[0] for f in funs)]])
        res = sopt.minimize(
            lambda z: z[-1], z0, jac=lambda z: np.concatenate([np.zeros(2 * d), [1.0]]),
            method="SLSQP", constraints=cons, options={"ftol": 1e-14, "maxiter": 1000},
        )
        x = res.x[:-1]
        val = max(f(x)[0] for f in funs)
        if val < best_val:
            best_val, best_x = val, x
    state = PureState.from_vector(best_x[:d] + 1j * best_x[d:])
    lower = minmax_dual_bound(ops, seed)
    return OptimizationResult(
        float(best_val), state, "restart-slsqp", restarts, float(best_val - lower), {"dual_lower_bound": lower}
    )


# ---------------------------------------------------------------------------
# biphoton product family


def _block_amps(p: np.ndarray) -> np.ndarray:
    # hyperspherical magnitudes, first amplitude real
    c, sn = np.cos(p[:, :3]), np.sin(p[:, :3])
    out = np.empty((p.shape[0], 4), dtype=complex)
    out[:, 0] = c[:, 0]
    out[:, 1] = sn[:, 0] * c[:, 1]
    rest = sn[:, 0] * sn[:, 1]
    out[:, 2] = rest * c[:, 2]
    out[:, 3] = rest * sn[:, 2]
    out[:, 1:] *= np.exp(1j * p[:, 3:])
    return out


def _bell_block_amps(p: np.ndarray) -> np.ndarray:
    # (U (x) I)|Phi+> with U = Rz(a) Ry(b) Rz(c); amplitude index is 2*row + col of U / sqrt(2)
    a, b, c = p.T
    cb, sb = np.cos(b / 2), np.sin(b / 2)
    u00 = np.exp(-0.5j * (a + c)) * cb
    u01 = -np.exp(-0.5j * (a - c)) * sb
    u10 = np.exp(0.5j * (a - c)) * sb
    u11 = np.exp(0.5j * (a + c)) * cb
    return np.stack([u00, u01, u10, u11], axis=1) / np.sqrt(2)


def _single_amps(p: np.ndarray) -> np.ndarray:
    t, f = p.T
    return np.stack([np.cos(t), np.sin(t) * np.exp(1j * f)], axis=1)


class ProductFamily:
    """Real parameterization of tensor products over a qubit partition."""

    def __init__(self, partition, n: int, maximally_entangled: bool = False):
        self.n = n
        self.blocks = check_partition(partition, n)
        self.maximally_entangled = maximally_entangled
        sizes = []
        for b in self.blocks:
            if len(b) == 2:
                sizes.append(3 if maximally_entangled else 6)
            else:
                sizes.append(2)
        self.sizes = sizes
        self.offsets = np.concatenate([[0], np.cumsum(sizes)])
        self.dim = int(self.offsets[-1])
        order = [q for b in self.blocks for q in b]
        self._perm = np.argsort(order)

    def states(self, params: np.ndarray) -> np.ndarray:
        params = np.atleast_2d(params)
        k = params.shape[0]
        out = np.ones((k, 1), dtype=complex)
        for b, lo, hi in zip(self.blocks, self.offsets[:-1], self.offsets[1:]):
            p = params[:, lo:hi]
            if len(b) == 2:
                amps = _bell_block_amps(p) if self.maximally_entangled else _block_amps(p)
            else:
                amps = _single_amps(p)
            out = (out[:, :, None] * amps[:, None, :]).reshape(k, -1)
        # axes are in block order; move them to register order
        t = out.reshape((k,) + (2,) * self.n)
        t = np.transpose(t, (0, *(1 + self._perm)))
        return t.reshape(k, 2**self.n)

    def random_params(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(0.0, 2 * np.pi, size=(count, self.dim))


def pattern_search(
    fun: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    step: float = 0.1,
    decay: float = 0.5,
    min_step: float = 1e-3,
    max_polls: int = 2000,
) -> tuple[np.ndarray, np.ndarray]:
    """Batched compass search maximizing ``fun`` from every row of ``x0`` at once.

    Each poll evaluates all 2d axis neighbours of every start and moves a
    start to its best neighbour when that improves; otherwise that start's
    step shrinks by ``decay``. A start is frozen once its step drops below
    ``min_step``. ``fun`` maps an ``(k, d)`` array to ``k`` values.
    Returns ``(x, values)``.
    """
    x = np.atleast_2d(np.asarray(x0, dtype=float)).copy()
    r, d = x.shape
    dirs = np.concatenate([np.eye(d), -np.eye(d)])
    fx = fun(x)
    steps = np.full(r, float(step))
    for _ in range(max_polls):
        live = np.flatnonzero(steps >= min_step)
        if live.size == 0:
            break
        cand = x[live, None, :] + steps[live, None, None] * dirs[None, :, :]
        vals = fun(cand.reshape(-1, d)).reshape(live.size, 2 * d)
        j = np.argmax(vals, axis=1)
        best = vals[np.arange(live.size), j]
        up = best > fx[live]
        moved = live[up]
        x[moved] = cand[up, j[up]]
        fx[moved] = best[up]
        steps[live[~up]] *= decay
    return x, fx


def simplex_polish(
    fun: Callable[[np.ndarray], np.ndarray], x0: np.ndarray, step: float, xatol: float, fatol: float
) -> tuple[np.ndarray, float, float]:
    """Nelder-Mead refinement (maximizing); returns ``(x, value, final simplex value spread)``."""
    d = x0.size
    simplex = np.vstack([x0, x0 + step * np.eye(d)])
    res = sopt.minimize(
        lambda z: -fun(z[None, :])[0], x0, method="Nelder-Mead",
        options={"initial_simplex": simplex, "xatol": xatol, "fatol": fatol, "maxiter": 200 * d, "maxfev": 400 * d, "adaptive": True},
    )
    spread = float(np.ptp(res.final_simplex[1]))
    return res.x, float(-res.fun), spread


def _family_values(objective: Objective, family: ProductFamily, preset, sense: float):
    n = family.n
    if objective.is_linear:
        h = objective.operator(n, preset)

        def fun(params):
            s = family.states(params)
            return sense * np.sum(s.conj() * (s @ h.T), axis=1).real

        return fun
    ops = _index_ops(objective, n, preset)

    def fun(params):
        s = family.states(params)
        vals = np.stack([np.sum(s.conj() * (s @ a.T), axis=1).real for a in ops])
        return sense * vals.max(axis=0)

    return fun


def search_biphoton_family(
    objective: Objective,
    partition,
    n: int,
    preset: ConventionPreset = DEFAULT_PRESET,
    maximize: bool = True,
    restarts: int = 64,
    seed: int = 0,
    maximally_entangled: bool = False,
    step: float = 0.1,
    decay: float = 0.5,
    tol: float = 1e-9,
    polish: int = 4,
) -> OptimizationResult:
    """Random-restart derivative-free search over a product family.

    All restarts run a coarse compass search together; the ``polish`` best
    are refined by Nelder-Mead down to ``tol`` and the best result is kept.
    ``residual`` is the objective spread of the winning final simplex.
    """
    preset = get_preset(preset)
    family = ProductFamily(partition, n, maximally_entangled)
    sense = 1.0 if maximize else -1.0
    fun = _family_values(objective, family, preset, sense)
    rng = np.random.default_rng(seed)
    x, fx = pattern_search(fun, family.random_params(rng, restarts), step=step, decay=decay, min_step=1e-3)
    best = None
    for i in np.argsort(-fx, kind="stable")[:polish]:
        xp, fp, spread = simplex_polish(fun, x[i], 1e-2, xatol=tol, fatol=tol * 1e-3)
        if best is None or fp > best[1]:
            best = (xp, fp, spread)
    xb, fb, spread = best
    state = PureState.from_vector(family.states(xb)[0])
    space = StrategySpace.biphoton(family.blocks, maximally_entangled)
    return OptimizationResult(
        float(sense * fb), state, f"pattern-search+simplex:{space.label}", restarts, spread, {"params": xb}
    )


def max_biphoton_family(
    objective: Objective,
    partition,
    n: int,
    preset: ConventionPreset = DEFAULT_PRESET,
    restarts: int = 64,
    seed: int = 0,
    maximally_entangled: bool = False,
    **search,
) -> OptimizationResult:
    """Best objective value over tensor products of pure blocks on ``partition``.

    ``maximally_entangled=True`` restricts two-qubit blocks to local-unitary
    images of a Bell state.
    """
    return search_biphoton_family(
        objective, partition, n, preset, True, restarts, seed, maximally_entangled, **search
    )


# ---------------------------------------------------------------------------
# classical deterministic strategies


def classical_xi(first_resp: tuple[int, int], second_resp: tuple[int, int]) -> float:
    """xi for fixed responses: first family answers (a, b), second family answers (X, Y)."""
    a, b = first_resp
    x, y = second_resp
    return (a * x + a * y + b * x - b * y) / 4


def _classical_search(objective: Objective, participants: Sequence[Participant], maximize: bool) -> OptimizationResult:
    participants = list(participants)
    if len(participants) > 4:
        raise ValueError("classical enumeration supports at most 4 participants")
    ids = [p.id for p in participants]
    pos = {p.id: k for k, p in enumerate(participants)}
    responses = list(itertools.product((-1, 1), repeat=2))
    best_val, best = None, None
    count = 0
    for assign in itertools.product(responses, repeat=len(participants)):
        count += 1
        xis = [classical_xi(assign[pos[pr.first.id]], assign[pos[pr.second.id]]) for pr in objective.pairs]
        val = objective.from_xis(xis)
        if best_val is None or (val > best_val if maximize else val < best_val):
            best_val, best = val, assign
    return OptimizationResult(
        float(best_val), dict(zip(ids, best)), "classical-enumeration", count, 0.0
    )


def classical_bound(objective: Objective, participants: Sequence[Participant]) -> OptimizationResult:
    """Exact maximum over deterministic local strategies (4**n assignments).

    The reported maximizer is the lexicographically smallest one, ordering
    responses -1 < +1 and participants in roster order.
    """
    return _classical_search(objective, participants, maximize=True)


def classical_minimum(objective: Objective, participants: Sequence[Participant]) -> OptimizationResult:
    return _classical_search(objective, participants, maximize=False)


# ---------------------------------------------------------------------------
# minimal overlap


def min_all_pairs(
    space: StrategySpace,
    pairs: Sequence[PairSpec],
    preset: ConventionPreset = DEFAULT_PRESET,
    participants: Sequence[Participant] | None = None,
    n: int | None = None,
    restarts: int | None = None,
    seed: int = 0,
) -> OptimizationResult:
    """Minimize the largest gluing index over ``pairs`` within ``space``."""
    objective = Objective.min_max_index(pairs)
    if n is None:
        qubits = {q for p in pairs for q in (p.first.qubit, p.second.qubit)}
        if participants is not None:
            qubits |= {p.qubit for p in participants}
        n = max(qubits) + 1
    if space.kind is SpaceKind.CLASSICAL_DETERMINISTIC:
        if participants is None:
            seen = {}
            for p in pairs:
                seen.setdefault(p.first.id, p.first)
                seen.setdefault(p.second.id, p.second)
            participants = sorted(seen.values(), key=lambda p: p.qubit)
        return classical_minimum(objective, participants)
    if space.kind is SpaceKind.UNRESTRICTED_PURE:
        return min_max_unrestricted(objective, n, preset, restarts=restarts or 16, seed=seed)
    return search_biphoton_family(
        objective, space.partition, n, preset, maximize=False, restarts=restarts or 64,
        seed=seed, maximally_entangled=space.maximally_entangled,
    )


def optimize(
    objective: Objective,
    space: StrategySpace,
    participants: Sequence[Participant],
    preset: ConventionPreset = DEFAULT_PRESET,
    **kw,
) -> OptimizationResult:
    """Dispatch on the strategy space; MIN_MAX_INDEX objectives are minimized, the rest maximized."""
    n = len(participants)
    if objective.kind is ObjectiveKind.MIN_MAX_INDEX:
        return min_all_pairs(space, objective.pairs, preset, participants, n, **kw)
    if space.kind is SpaceKind.CLASSICAL_DETERMINISTIC:
        return classical_bound(objective, participants)
    if space.kind is SpaceKind.UNRESTRICTED_PURE:
        return max_unrestricted(objective, n, preset)
    return max_biphoton_family(objective, space.partition, n, preset, maximally_entangled=space.maximally_entangled, **kw)



def result_json(objective: Objective, space: StrategySpace, preset: ConventionPreset, result: OptimizationResult) -> str:
    """JSON export; a quantum argmax is written in the ket text grammar."""
    if isinstance(result.argmax, PureState):
        argmax = format_state(result.argmax, digits=12, atol=1e-7)
    else:
        argmax = {k: list(v) for k, v in result.argmax.items()}
    doc = {
        "objective": objective.label,
        "space": space.label,
        "preset": get_preset(preset).name,
        "value": result.value,
        "argmax": argmax,
        "method": result.method,
        "restarts": result.restarts_used,
        "residual": result.residual,
    }
    return json.dumps(doc, indent=2)
