import numpy as np

from bellchains.chsh import PairSpec, Participant, Sex


def random_state_vectors(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    v = rng.normal(size=(count, 2**n)) + 1j * rng.normal(size=(count, 2**n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def ab_pair(n_between: int = 0) -> PairSpec:
    """Alice on qubit 0 and Bob on the last of ``2 + n_between`` qubits."""
    return PairSpec(Participant("Alice", 0, Sex.FIRST), Participant("Bob", 1 + n_between, Sex.SECOND))
