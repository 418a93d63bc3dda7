from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from qacse.hamiltonian import MolecularIntegrals, TwoBodyTensor, build_reduced_hamiltonian, read_fcidump
from qacse.pauli import PauliSum, map_two_body_tensor
from qacse.simulator import StateVector, init_reference

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
CONFIGS = ROOT / "configs"


@dataclass(frozen=True)
class Molecule:
    """A fixture geometry with its pyscf reference energies."""

    name: str
    distance: float
    path: Path
    integrals: MolecularIntegrals
    k2: TwoBodyTensor
    h: PauliSum
    e_hf: float
    e_fci: float

    @property
    def n_qubits(self) -> int:
        return self.k2.n_spin_orbitals

    @property
    def core(self) -> float:
        return self.integrals.core_energy

    def hartree_fock(self) -> StateVector:
        return init_reference(self.n_qubits, range(self.integrals.n_electrons))


def manifest(name: str) -> list[dict]:
    return json.loads((FIXTURES / name / "manifest.json").read_text())["geometries"]


def load_molecule(name: str, distance: float) -> Molecule:
    for entry in manifest(name):
        if abs(entry["distance_angstrom"] - distance) < 1e-9:
            path = FIXTURES / name / entry["file"]
            m = read_fcidump(path)
            k2 = build_reduced_hamiltonian(m)
            h = map_two_body_tensor(k2, k2.n_spin_orbitals)
            return Molecule(name, distance, path, m, k2, h, entry["e_hf"], entry["e_fci"])
    raise KeyError(f"{name} at {distance} not in manifest")


def random_state(rng: np.random.Generator, n_qubits: int, real: bool = False) -> StateVector:
    amps = rng.normal(size=2**n_qubits)
    if not real:
        amps = amps + 1j * rng.normal(size=2**n_qubits)
    return StateVector.normalized(n_qubits, amps)


def random_sector_state(rng: np.random.Generator, n_qubits: int, n_particles: int) -> StateVector:
    amps = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    counts = np.array([bin(b).count("1") for b in range(2**n_qubits)])
    amps[counts != n_particles] = 0
    return StateVector.normalized(n_qubits, amps)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def h2() -> Molecule:
    return load_molecule("h2", 2.0)


@pytest.fixture(scope="session")
def h2_eq() -> Molecule:
    return load_molecule("h2", 0.75)


@pytest.fixture(scope="session")
def h3() -> Molecule:
    return load_molecule("h3", 1.5)
