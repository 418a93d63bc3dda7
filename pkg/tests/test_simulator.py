from __future__ import annotations

import itertools

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_sector_state, random_state
from qacse import simulator
from qacse.hamiltonian import TwoBodyTensor, anti_hermitize, antisymmetrize
from qacse.oracle import dense_expm_apply, dense_matrix, pauli_matrix
from qacse.pauli import PauliString, PauliSum
from qacse.simulator import (
    StateVector,
    annihilate,
    apply_exponential,
    apply_pauli_exponential,
    apply_pauli_string,
    apply_pauli_sum,
    expectation,
    init_reference,
)
from qacse.solver import generator_from_residual


def particle_counts(n: int) -> np.ndarray:
    return np.array([bin(b).count("1") for b in range(2**n)])


class TestStateVector:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError, match="not normalized"):
            StateVector(1, [1.0, 1.0])

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError, match="expected 4 amplitudes"):
            StateVector(2, [1.0, 0.0])

    def test_amplitudes_read_only(self):
        s = init_reference(2, [0])
        with pytest.raises(ValueError):
            s.amplitudes[0] = 0.5

    def test_input_array_is_copied(self):
        amps = np.array([1.0, 0.0])
        s = StateVector(1, amps)
        amps[0] = 0.0
        assert s.amplitudes[0] == 1.0

    @pytest.mark.parametrize("occupied, index", [([], 0), ([0], 1), ([0, 1], 3), ([1, 3], 10)])
    def test_reference_bit_layout(self, occupied, index):
        s = init_reference(4, occupied)
        assert s.amplitudes[index] == 1.0

    def test_reference_range_check(self):
        with pytest.raises(ValueError, match="out of range"):
            init_reference(2, [2])

    def test_overlap(self, rng):
        a, b = random_state(rng, 3), random_state(rng, 3)
        assert a.overlap(b) == pytest.approx(np.vdot(a.amplitudes, b.amplitudes))


class TestPauliAction:
    @settings(max_examples=50, deadline=None)
    @given(st.text(alphabet="IXYZ", min_size=3, max_size=3), st.sampled_from([1, 1j, -1, -1j]))
    def test_string_matches_kron(self, axes, phase):
        rng = np.random.default_rng(sum(map(ord, axes)))
        s = random_state(rng, 3)
        out = apply_pauli_string(s, PauliString(axes, phase))
        np.testing.assert_allclose(out, phase * pauli_matrix(axes) @ s.amplitudes, atol=1e-14)

    def test_sum_matches_dense(self, rng):
        keys = ["".join(p) for p in itertools.product("IXYZ", repeat=3)]
        op = PauliSum({k: rng.normal() + 1j * rng.normal() for k in keys}, 3)
        s = random_state(rng, 3)
        np.testing.assert_allclose(
            apply_pauli_sum(s, op), dense_matrix(op) @ s.amplitudes, atol=1e-12
        )

    def test_empty_sum_gives_zero(self):
        s = init_reference(2, [0])
        assert not np.any(apply_pauli_sum(s, PauliSum({}, 2)))

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            apply_pauli_string(init_reference(2, []), PauliString("XXX"))

    def test_expectation_matches_dense(self, rng):
        op = PauliSum({"XZI": 0.4, "YYZ": -1.2, "IIZ": 0.3}, 3)
        s = random_state(rng, 3)
        expected = np.vdot(s.amplitudes, dense_matrix(op) @ s.amplitudes)
        assert expectation(s, op) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("axes", ["X", "YZ", "ZXY"])
    def test_single_exponential(self, axes, rng):
        s = random_state(rng, len(axes))
        out = apply_pauli_exponential(s, 0.37, PauliString(axes))
        expected = scipy.linalg.expm(0.37j * pauli_matrix(axes)) @ s.amplitudes
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-13)


class TestExponential:
    def test_commuting_terms_exact(self, rng):
        op = PauliSum({"ZZI": 0.7, "IZZ": -0.4, "XXX": 0.2}, 3)
        s = random_state(rng, 3)
        out = apply_exponential(s, op, 0.9j)
        np.testing.assert_allclose(
            out.amplitudes, dense_expm_apply(op, 0.9j, s).amplitudes, atol=1e-12
        )

    def test_trotter_error_shrinks_with_steps(self, rng):
        op = PauliSum({"XI": 0.8, "ZZ": 0.5, "YX": -0.3}, 2)
        s = random_state(rng, 2)
        exact = dense_expm_apply(op, 0.5j, s).amplitudes
        errors = [
            np.linalg.norm(apply_exponential(s, op, 0.5j, steps).amplitudes - exact)
            for steps in (1, 2, 4, 8)
        ]
        assert all(b < a for a, b in zip(errors, errors[1:]))
        # first-order product formula: error ~ 1/steps
        assert errors[0] / errors[-1] > 5

    def test_non_unitary_rejected(self):
        with pytest.raises(ValueError, match="not be unitary"):
            apply_exponential(init_reference(1, []), PauliSum({"X": 1.0}, 1), 0.5)

    def test_zero_steps_rejected(self):
        with pytest.raises(ValueError, match="steps"):
            apply_exponential(init_reference(1, []), PauliSum({"X": 1.0}, 1), 0.5j, 0)

    def test_zero_prefactor_is_identity(self, rng):
        s = random_state(rng, 2)
        assert apply_exponential(s, PauliSum({"XY": 1.0}, 2), 0) is s

    def test_preserves_norm(self, rng):
        keys = ["".join(p) for p in itertools.product("IXYZ", repeat=3)]
        op = PauliSum({k: rng.normal() for k in keys}, 3)
        out = apply_exponential(random_state(rng, 3), op, 1.3j, 3)
        assert np.linalg.norm(out.amplitudes) == pytest.approx(1, abs=1e-12)

    def test_hamiltonian_evolution_conserves_particle_number(self, h3, rng):
        n, n_el = h3.n_qubits, h3.integrals.n_electrons
        s = random_sector_state(rng, n, n_el)
        out = apply_exponential(s, h3.h, 0.4j)
        leak = out.amplitudes[particle_counts(n) != n_el]
        assert np.linalg.norm(leak) < 1e-12

    def test_real_generator_conserves_particle_number(self, h3, rng):
        n, n_el = h3.n_qubits, h3.integrals.n_electrons
        a = anti_hermitize(antisymmetrize(TwoBodyTensor(n, rng.normal(size=(n,) * 4))))
        out = apply_exponential(h3.hartree_fock(), generator_from_residual(a), 0.3)
        leak = out.amplitudes[particle_counts(n) != n_el]
        assert np.linalg.norm(leak) < 1e-12

    def test_compiled_kernel_matches_python(self, rng):
        op = PauliSum({"XYZ": 0.3, "ZZI": 1.1, "YII": -0.6}, 3)
        s = random_state(rng, 3)
        thetas = simulator.trotter_angles(op, 0.7j, 2)
        src, phase, _ = simulator._compile(op)
        args = (src, phase, np.cos(thetas), np.sin(thetas), 2)
        np.testing.assert_allclose(
            simulator._trotter_kernel(s.amplitudes.copy(), *args),
            simulator._trotter_kernel_py(s.amplitudes.copy(), *args),
            atol=1e-14,
        )


class TestAnnihilate:
    def test_matches_jordan_wigner_matrix(self, rng):
        n = 3
        s = random_state(rng, n)
        for site in range(n):
            a = PauliSum({"Z" * site + "X" + "I" * (n - site - 1): 0.5,
                          "Z" * site + "Y" + "I" * (n - site - 1): 0.5j}, n)
            np.testing.assert_allclose(
                annihilate(s.amplitudes, site), dense_matrix(a) @ s.amplitudes, atol=1e-14
            )

    def test_batched(self, rng):
        batch = np.stack([random_state(rng, 3).amplitudes for _ in range(4)])
        out = annihilate(batch, 1)
        for row, amps in zip(out, batch):
            np.testing.assert_allclose(row, annihilate(amps, 1))

    def test_sign_from_lower_occupations(self):
        # |110> in bit order (qubits 1 and 2 set): a_2 passes the qubit-1 electron
        amps = np.zeros(8)
        amps[0b110] = 1
        out = annihilate(amps, 2)
        assert out[0b010] == -1
