"""Brute-force references: dense Kronecker matrices, FCI, matrix exponentials.

Nothing in here reuses the simulator's bit-mask machinery, so the results
can be used to check it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from itertools import combinations

import numpy as np
import scipy.linalg

from qacse.hamiltonian import TwoBodyTensor
from qacse.pauli import PauliSum, map_two_body_tensor
from qacse.simulator import StateVector

MAX_DENSE_QUBITS = 12
MAX_EXPM_QUBITS = 10

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class SectorBasis:
    n_qubits: int
    n_particles: int
    basis_states: tuple[int, ...]


def sector_basis(n_qubits: int, n_particles: int) -> SectorBasis:
    """Basis indices with exactly ``n_particles`` bits set, ascending."""
    if not 0 <= n_particles <= n_qubits:
        raise ValueError(f"no {n_particles}-particle sector on {n_qubits} qubits")
    states = sorted(sum(1 << i for i in occ) for occ in combinations(range(n_qubits), n_particles))
    return SectorBasis(n_qubits, n_particles, tuple(states))


def pauli_matrix(axes: str) -> np.ndarray:
    # qubit 0 is the least significant bit, hence the reversed Kronecker order
    return reduce(np.kron, [_SINGLE[a] for a in reversed(axes)])


def dense_matrix(op: PauliSum) -> np.ndarray:
    if op.n_qubits > MAX_DENSE_QUBITS:
        raise ValueError(f"dense_matrix limited to {MAX_DENSE_QUBITS} qubits")
    dim = 2**op.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for axes, coeff in op:
        out += coeff * pauli_matrix(axes)
    return out


def _canonical_vector(vecs: np.ndarray) -> np.ndarray:
    """Deterministic representative of the span of the columns of ``vecs``."""
    if vecs.shape[1] == 1:
        v = vecs[:, 0]
    else:
        # project the first basis state with non-negligible weight in the span
        weights = np.linalg.norm(vecs, axis=1)
        k = int(np.argmax(weights > 1e-8))
        v = vecs @ vecs[k].conj()
        v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v) > np.abs(v).max() - 1e-10))
    return v * (abs(v[k]) / v[k])


def sector_eigenstates(
    k2: TwoBodyTensor, core: float, n_electrons: int
) -> tuple[np.ndarray, list[StateVector]]:
    """All eigenpairs of the mapped Hamiltonian inside the ``n_electrons`` sector.

    Energies include ``core``. Eigenvectors inside degenerate levels are
    whatever LAPACK returns; use :func:`fci_ground` for a canonical ground state.
    """
    n = k2.n_spin_orbitals
    basis = np.array(sector_basis(n, n_electrons).basis_states)
    if basis.size == 0:
        raise ValueError("empty sector")
    mat = dense_matrix(map_two_body_tensor(k2, n))[np.ix_(basis, basis)]
    evals, evecs = np.linalg.eigh(mat)
    states = []
    for col in evecs.T:
        amps = np.zeros(2**n, dtype=complex)
        amps[basis] = col
        states.append(StateVector.normalized(n, amps))
    return evals + core, states


def fci_ground(
    k2: TwoBodyTensor, core: float, n_electrons: int, degeneracy_tol: float = 1e-8
) -> tuple[float, StateVector]:
    """Lowest eigenpair in the ``n_electrons`` sector, embedded in the full register."""
    n = k2.n_spin_orbitals
    basis = np.array(sector_basis(n, n_electrons).basis_states)
    mat = dense_matrix(map_two_body_tensor(k2, n))[np.ix_(basis, basis)]
    evals, evecs = np.linalg.eigh(mat)
    ground = evecs[:, evals < evals[0] + degeneracy_tol]
    amps = np.zeros(2**n, dtype=complex)
    amps[basis] = _canonical_vector(ground)
    return float(evals[0]) + core, StateVector.normalized(n, amps)


def dense_ground(op: PauliSum) -> tuple[float, StateVector]:
    """Lowest eigenpair of ``op`` over the whole register (no sector restriction)."""
    evals, evecs = np.linalg.eigh(dense_matrix(op))
    vec = _canonical_vector(evecs[:, evals < evals[0] + 1e-8])
    return float(evals[0]), StateVector.normalized(op.n_qubits, vec)


def dense_expm_apply(op: PauliSum, prefactor: complex, s: StateVector) -> StateVector:
    """Exact ``exp(prefactor * op)|s>`` by scaling and squaring."""
    if op.n_qubits > MAX_EXPM_QUBITS:
        raise ValueError(f"dense_expm_apply limited to {MAX_EXPM_QUBITS} qubits")
    if op.n_qubits != s.n_qubits:
        raise ValueError("operator and state sizes differ")
    out = scipy.linalg.expm(prefactor * dense_matrix(op)) @ s.amplitudes
    return StateVector(s.n_qubits, out)
