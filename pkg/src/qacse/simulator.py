"""Dense statevector engine.

States are immutable: every operation returns a new :class:`StateVector`.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from qacse.pauli import PauliString, PauliSum

NORM_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(
                f"expected {2**self.n_qubits} amplitudes for {self.n_qubits} qubits, "
                f"got shape {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > NORM_TOLERANCE:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, n_qubits: int, amplitudes) -> StateVector:
        amps = np.asarray(amplitudes, dtype=complex)
        return cls(n_qubits, amps / np.linalg.norm(amps))

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def overlap(self, other: StateVector) -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def init_reference(n_qubits: int, occupied: Iterable[int]) -> StateVector:
    """Computational basis state with the ``occupied`` qubits set."""
    index = 0
    for i in set(occupied):
        if not 0 <= i < n_qubits:
            raise ValueError(f"occupied index {i} out of range for {n_qubits} qubits")
        index |= 1 << i
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[index] = 1.0
    return StateVector(n_qubits, amps)


def _pauli_tables(x_mask: int, z_mask: int, n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
    # (P psi)[b] = sign(b) * psi[b ^ x], sign(b) = (-1)^{|(b ^ x) & z|}
    idx = np.arange(2**n_qubits, dtype=np.int64)
    src = idx ^ x_mask
    sign = 1 - 2 * (np.bitwise_count(src & z_mask) & 1).astype(np.int64)
    return src, sign.astype(complex)


_COMPILED: "weakref.WeakKeyDictionary[PauliSum, tuple]" = weakref.WeakKeyDictionary()


def _compile(op: PauliSum) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gather tables ``(src, phase, coeffs)`` for every term, in Trotter order.

    ``(P_k psi)[b] = phase[k, b] * psi[src[k, b]]``, with ``i**n_Y`` folded in.
    """
    hit = _COMPILED.get(op)
    if hit is None:
        x, z, _, axes = op.compiled
        dim = 2**op.n_qubits
        src = np.empty((len(axes), dim), dtype=np.int64)
        phase = np.empty((len(axes), dim), dtype=complex)
        for k, key in enumerate(axes):
            src[k], phase[k] = _pauli_tables(int(x[k]), int(z[k]), op.n_qubits)
            phase[k] *= 1j ** key.count("Y")
        bare = np.array([op.terms[a] for a in axes], dtype=complex)
        hit = (src, phase, bare)
        _COMPILED[op] = hit
    return hit


def _check_size(n_qubits: int, expected: int) -> None:
    if n_qubits != expected:
        raise ValueError(f"operator acts on {n_qubits} qubits, state has {expected}")


def apply_pauli_string(s: StateVector, p: PauliString) -> np.ndarray:
    """Raw amplitudes of ``p|s>`` (unit norm, so returned as an array)."""
    _check_size(p.n_qubits, s.n_qubits)
    op = PauliSum({p.axes: 1.0}, p.n_qubits)
    src, phase, _ = _compile(op)
    return p.phase * phase[0] * s.amplitudes[src[0]]


def apply_pauli_sum(s: StateVector | np.ndarray, op: PauliSum) -> np.ndarray:
    """Raw amplitudes of ``op|s>``; ``s`` may also be a bare amplitude array."""
    amps = s.amplitudes if isinstance(s, StateVector) else np.asarray(s, dtype=complex)
    if amps.shape != (2**op.n_qubits,):
        raise ValueError(f"operator on {op.n_qubits} qubits, vector of shape {amps.shape}")
    if len(op) == 0:
        return np.zeros_like(amps)
    src, phase, coeffs = _compile(op)
    return np.einsum("k,kb,kb->b", coeffs, phase, amps[src])


def apply_pauli_exponential(s: StateVector, theta: float, p: PauliString) -> StateVector:
    """``exp(i theta p)|s>`` via ``cos(theta) + i sin(theta) p``."""
    rotated = apply_pauli_string(s, p)
    out = np.cos(theta) * s.amplitudes + 1j * np.sin(theta) * rotated
    return StateVector(s.n_qubits, out)


def trotter_angles(op: PauliSum, prefactor: complex, steps: int) -> np.ndarray:
    """Real angles ``theta_k`` with ``prefactor * c_k / steps = i theta_k``.

    Raises ``ValueError`` when some term would give a non-unitary factor.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    _, _, coeffs = _compile(op)
    scaled = prefactor * coeffs / steps
    bad = np.abs(scaled.real) > 1e-12 * max(1.0, float(np.max(np.abs(scaled), initial=0)))
    if np.any(bad):
        raise ValueError(
            "prefactor * op is not anti-Hermitian; the exponential would not be unitary"
        )
    return scaled.imag.copy()


def apply_exponential(
    s: StateVector, op: PauliSum, prefactor: complex, steps: int = 1
) -> StateVector:
    """First-order Trotter approximation of ``exp(prefactor * op)|s>``.

    Each of the ``steps`` repetitions applies the per-term Pauli exponentials
    in :meth:`PauliSum.trotter_terms` order.
    """
    _check_size(op.n_qubits, s.n_qubits)
    if len(op) == 0 or prefactor == 0:
        return s
    thetas = trotter_angles(op, prefactor, steps)
    src, phase, _ = _compile(op)
    amps = _trotter_kernel(s.amplitudes.copy(), src, phase, np.cos(thetas), np.sin(thetas), steps)
    amps /= np.linalg.norm(amps)
    return StateVector(s.n_qubits, amps)


def _trotter_kernel_py(amps, src, phase, cos, sin, steps):
    for _ in range(steps):
        for k in range(len(cos)):
            amps = cos[k] * amps + (1j * sin[k]) * phase[k] * amps[src[k]]
    return amps


try:
    import numba

    @numba.njit(cache=True)
    def _trotter_kernel(amps, src, phase, cos, sin, steps):  # pragma: no cover - jitted
        dim = amps.shape[0]
        buf = np.empty_like(amps)
        for _ in range(steps):
            for k in range(cos.shape[0]):
                c = cos[k]
                s = 1j * sin[k]
                for b in range(dim):
                    buf[b] = c * amps[b] + s * phase[k, b] * amps[src[k, b]]
                amps, buf = buf, amps
        return amps.copy()

except ImportError:  # pragma: no cover
    _trotter_kernel = _trotter_kernel_py


def expectation(s: StateVector, op: PauliSum) -> complex:
    """Exact ``<s|op|s>``."""
    _check_size(op.n_qubits, s.n_qubits)
    return complex(np.vdot(s.amplitudes, apply_pauli_sum(s, op)))


def annihilate(amps: np.ndarray, site: int) -> np.ndarray:
    """Jordan-Wigner action of ``a_site`` on a batch of amplitude vectors.

    ``amps`` has shape ``(..., 2**n)``; the returned array has the same shape.
    """
    dim = amps.shape[-1]
    idx = np.arange(dim, dtype=np.int64)
    bit = 1 << site
    # a_p |b> = (-1)^{occupations below p} |b - bit> for b with the bit set
    sign = 1 - 2 * (np.bitwise_count(idx & (bit - 1)) & 1).astype(np.int64)
    occupied = (idx & bit) != 0
    out = np.zeros_like(amps)
    out[..., idx[occupied] ^ bit] = amps[..., idx[occupied]] * sign[occupied]
    return out
