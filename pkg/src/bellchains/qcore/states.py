"""Pure states, density matrices, expectations and Born-rule distributions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, check_hermitian, eig_hermitian, is_hermitian

NORM_ATOL = 1e-12
PSD_ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector; qubit 0 is the most significant bit of the basis index."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        dim = amps.size
        if dim < 2 or dim > 16 or dim & (dim - 1):
            raise ValueError(f"state length must be 2, 4, 8 or 16, got {dim}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("state has non-finite amplitudes")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_ATOL:
            raise ValueError(f"state is not normalized (|psi|^2 = {norm2!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vec) -> PureState:
        """Normalize an arbitrary nonzero vector."""
        v = np.asarray(vec, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0 or not np.isfinite(norm):
            raise ValueError("cannot normalize a zero or non-finite vector")
        return cls(v / norm)

    @classmethod
    def basis(cls, bits: str) -> PureState:
        v = np.zeros(2 ** len(bits), dtype=complex)
        v[int(bits, 2)] = 1.0
        return cls(v)

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def tensor(self, other: PureState) -> PureState:
        return PureState(np.kron(self.amplitudes, other.amplitudes))

    def __repr__(self) -> str:
        from .ketparse import format_state

        return f"PureState({format_state(self, digits=6)!r})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = check_hermitian(self.matrix)
        tr = np.trace(m).real
        if abs(tr - 1.0) > NORM_ATOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        if np.linalg.eigvalsh(m)[0] < -PSD_ATOL:
            raise ValueError("density matrix is not positive semidefinite")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.dim.bit_length() - 1


def expectation(state: PureState, op) -> float:
    """<psi|A|psi> for Hermitian A."""
    a = check_hermitian(op)
    if a.shape[0] != state.dim:
        raise ValueError(f"operator dimension {a.shape[0]} does not match state dimension {state.dim}")
    val = np.vdot(state.amplitudes, a @ state.amplitudes)
    assert abs(val.imag) <= 1e-12 * max(1.0, np.abs(a).max()), val
    return float(val.real)


def expectation_rho(rho: DensityMatrix, op) -> float:
    a = check_hermitian(op)
    if a.shape != rho.matrix.shape:
        raise ValueError("operator and density matrix dimensions differ")
    return float(np.trace(a @ rho.matrix).real)


def partial_trace(rho: DensityMatrix | PureState, keep, n: int | None = None) -> DensityMatrix:
    """Reduced density matrix on the qubits in ``keep`` (strictly increasing)."""
    if isinstance(rho, PureState):
        rho = rho.density_matrix()
    n = rho.num_qubits if n is None else n
    if 2**n != rho.dim:
        raise ValueError(f"density matrix of dimension {rho.dim} is not an {n}-qubit operator")
    keep = list(keep)
    if not keep or any(b <= a for a, b in zip(keep, keep[1:])) or keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep must be a nonempty strictly increasing subset of range({n}), got {keep}")
    t = rho.matrix.reshape((2,) * (2 * n))
    # Contract each dropped ket axis with its bra axis.
    row = list(range(n))
    col = [q + n if q in keep else q for q in range(n)]
    out = keep + [q + n for q in keep]
    reduced = np.einsum(t, row + col, out)
    k = len(keep)
    return DensityMatrix(reduced.reshape(2**k, 2**k))


def observable_basis(obs) -> np.ndarray:
    """Columns are the +1 and -1 eigenvectors of a single-qubit observable."""
    o = check_hermitian(obs)
    if o.shape != (2, 2):
        raise ValueError("observables must be 2x2")
    w, v = eig_hermitian(o)
    if not np.allclose(w, [1.0, -1.0], atol=1e-10):
        raise ValueError(f"observable eigenvalues must be +1 and -1, got {w}")
    return v


def born_distribution(state: PureState | DensityMatrix, observables) -> np.ndarray:
    """Joint outcome probabilities for measuring one observable per qubit.

    The result has shape ``(2,) * n``; index 0 on an axis is outcome +1 and
    index 1 is outcome -1.
    """
    n = state.num_qubits
    observables = list(observables)
    if len(observables) != n:
        raise ValueError(f"need one observable per qubit ({n}), got {len(observables)}")
    bases = [observable_basis(o) for o in observables]
    if isinstance(state, PureState):
        t = state.amplitudes.reshape((2,) * n)
        for q, v in enumerate(bases):
            t = np.moveaxis(np.tensordot(v.conj().T, t, axes=([1], [q])), 0, q)
        probs = np.abs(t) ** 2
    else:
        u = np.eye(1, dtype=complex)
        for v in bases:
            u = np.kron(u, v)
        probs = np.real(np.einsum("ij,jk,ki->i", u.conj().T, state.matrix, u)).reshape((2,) * n)
        probs = np.clip(probs, 0.0, None)
    return probs


def outcome_values(n: int) -> np.ndarray:
    """Array of shape ``(2,)*n + (n,)`` giving the +-1 outcome tuple at each table index."""
    grids = np.meshgrid(*([np.array([1, -1])] * n), indexing="ij")
    return np.stack(grids, axis=-1)


def is_density_matrix(m) -> bool:
    m = as_matrix(m)
    return (
        is_hermitian(m)
        and abs(np.trace(m).real - 1.0) <= NORM_ATOL
        and np.linalg.eigvalsh(m)[0] >= -PSD_ATOL
    )
