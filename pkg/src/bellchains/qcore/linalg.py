"""Small dense complex linear algebra for registers of at most four qubits."""

from __future__ import annotations

import numpy as np

MAX_DIM = 16
HERMITIAN_ATOL = 1e-12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite complex 2-D array with power-of-two shape."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {m.shape}")
    for d in m.shape:
        if d < 1 or d > MAX_DIM or d & (d - 1):
            raise ValueError(f"matrix dimensions must be powers of two <= {MAX_DIM}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def is_hermitian(a, atol: float = HERMITIAN_ATOL) -> bool:
    m = np.asarray(a, dtype=complex)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.allclose(m, m.conj().T, rtol=0, atol=atol)


def check_hermitian(a, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"operator must be square, got {m.shape}")
    if not is_hermitian(m, atol):
        raise ValueError("operator is not Hermitian")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product of two square matrices, capped at 16x16."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[0] != a.shape[1] or b.shape[0] != b.shape[1]:
        raise ValueError("kron expects square matrices")
    if a.shape[0] * b.shape[0] > MAX_DIM:
        raise ValueError(f"product dimension {a.shape[0] * b.shape[0]} exceeds {MAX_DIM}")
    return np.kron(a, b)


def embed(ops: dict[int, np.ndarray], n: int) -> np.ndarray:
    """Tensor product with ``ops[q]`` on qubit q and identity elsewhere.

    Qubit 0 is the most significant (leftmost) tensor factor.
    """
    if not 1 <= n <= 4:
        raise ValueError(f"register size must be 1..4 qubits, got {n}")
    for q in ops:
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range for {n} qubits")
    out = np.eye(1, dtype=complex)
    for q in range(n):
        factor = ops.get(q, IDENTITY_2)
        factor = as_matrix(factor)
        if factor.shape != (2, 2):
            raise ValueError("embedded factors must be 2x2")
        out = np.kron(out, factor)
    return out


def embed_single(op, qubit: int, n: int) -> np.ndarray:
    return embed({qubit: check_hermitian(op)}, n)


def _jacobi_sweep(h: np.ndarray, v: np.ndarray, tol: float) -> float:
    """One cyclic sweep of complex Jacobi rotations; returns the largest off-diagonal modulus before the sweep."""
    n = h.shape[0]
    off = np.max(np.abs(h[~np.eye(n, dtype=bool)]), initial=0.0)
    for p in range(n - 1):
        for q in range(p + 1, n):
            hpq = h[p, q]
            r = abs(hpq)
            if r <= tol:
                continue
            phase = hpq / r
            alpha, beta = h[p, p].real, h[q, q].real
            theta = 0.5 * np.arctan2(2.0 * r, alpha - beta)
            c, s = np.cos(theta), np.sin(theta)
            # D = diag(1, conj(phase)) makes the pivot real, then a real Givens rotation.
            rot = np.array([[c, -s], [s * phase.conjugate(), c * phase.conjugate()]])
            idx = [p, q]
            h[:, idx] = h[:, idx] @ rot
            h[idx, :] = rot.conj().T @ h[idx, :]
            h[p, q] = h[q, p] = 0.0
            h[p, p] = h[p, p].real
            h[q, q] = h[q, q].real
            v[:, idx] = v[:, idx] @ rot
    return off


def eig_hermitian(op, tol: float = 1e-14, max_sweeps: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues in descending
    order and eigenvectors as orthonormal columns.
    """
    h = check_hermitian(op).copy()
    n = h.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(np.max(np.abs(h)), 1.0)
    for _ in range(max_sweeps):
        off = _jacobi_sweep(h, v, tol * scale)
        if off <= tol * scale:
            break
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    w = np.diag(h).real
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]
