"""Reduced density matrices: measurement, wedge products, cumulant reconstruction.

RDMs use the bare operator normalization, e.g.
``2D[p,q,s,t] = <a†_p a†_q a_t a_s>`` with trace ``N(N-1)``, and
``3D[p,q,r,s,t,u] = <a†_p a†_q a†_r a_u a_t a_s>`` with trace ``N(N-1)(N-2)``.
Wedge products use the Grassmann convention with ``1/(k!)^2``, which acts on
the ``1/p!``-scaled RDMs; the conversion lives in
:func:`reconstruct_rdm3_cumulant`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from pathlib import Path
from typing import TextIO

import numpy as np

from qacse.hamiltonian import TwoBodyTensor
from qacse.simulator import StateVector, annihilate

MAX_RDM3_ORBITALS = 8


@dataclass(frozen=True, eq=False)
class _RDM:
    n_spin_orbitals: int
    values: np.ndarray

    order = 0

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (self.n_spin_orbitals,) * (2 * self.order):
            raise ValueError(
                f"{type(self).__name__} needs shape {(self.n_spin_orbitals,) * (2 * self.order)}, "
                f"got {vals.shape}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def trace(self) -> complex:
        n, k = self.n_spin_orbitals, self.order
        return complex(np.trace(self.values.reshape(n**k, n**k)))

    def matrix(self) -> np.ndarray:
        """Values as an ``(n**k, n**k)`` matrix, upper indices as rows."""
        n, k = self.n_spin_orbitals, self.order
        return self.values.reshape(n**k, n**k)

    def is_hermitian(self, atol: float = 1e-10) -> bool:
        m = self.matrix()
        return np.allclose(m, m.conj().T, atol=atol)


class RDM1(_RDM):
    order = 1

    @property
    def n_electrons(self) -> int:
        return round(self.trace().real)


class RDM2(_RDM):
    order = 2

    @property
    def n_electrons(self) -> int:
        # N(N-1) = trace
        return round((1 + math.sqrt(1 + 4 * max(self.trace().real, 0))) / 2)

    def is_antisymmetric(self, atol: float = 1e-10) -> bool:
        v = self.values
        return np.allclose(v, -v.transpose(1, 0, 2, 3), atol=atol) and np.allclose(
            v, -v.transpose(0, 1, 3, 2), atol=atol
        )


class RDM3(_RDM):
    order = 3

    def is_antisymmetric(self, atol: float = 1e-10) -> bool:
        v = self.values
        swaps = [(1, 0, 2), (0, 2, 1)]
        for perm in swaps:
            for full in (perm + (3, 4, 5), (0, 1, 2) + tuple(i + 3 for i in perm)):
                if not np.allclose(v, -v.transpose(full), atol=atol):
                    return False
        return True


class ResidualTensor(TwoBodyTensor):
    """ACSE residual; anti-Hermitian and pair-antisymmetric."""


# --------------------------------------------------------------------------- measurement


def _annihilated(amps: np.ndarray, n: int, depth: int) -> np.ndarray:
    """Array ``v[s, t, ...] = ... a_t a_s |amps>`` of shape ``(n,)*depth + (dim,)``."""
    out = amps
    for _ in range(depth):
        out = np.stack([annihilate(out, site) for site in range(n)], axis=-2)
    return out


def transition_rdm2(bra: np.ndarray, ket: np.ndarray, n: int) -> np.ndarray:
    """``<bra| a†_p a†_q a_t a_s |ket>`` as a ``[p,q,s,t]`` array."""
    left = _annihilated(np.asarray(bra, dtype=complex), n, 2).reshape(n * n, -1)
    right = _annihilated(np.asarray(ket, dtype=complex), n, 2).reshape(n * n, -1)
    # <bra|a†_p a†_q a_t a_s|ket> = <a_q a_p bra | a_t a_s ket>
    return (left.conj() @ right.T).reshape(n, n, n, n)


def measure_rdm1(s: StateVector) -> RDM1:
    n = s.n_qubits
    v = _annihilated(s.amplitudes, n, 1)
    return RDM1(n, v.conj() @ v.T)


def measure_rdm2(s: StateVector) -> RDM2:
    """Exact ``<s|a†_p a†_q a_t a_s|s>`` for every index tuple."""
    n = s.n_qubits
    v = _annihilated(s.amplitudes, n, 2).reshape(n * n, -1)
    return RDM2(n, (v.conj() @ v.T).reshape(n, n, n, n))


def measure_rdm2_imag(s: StateVector) -> np.ndarray:
    """Elementwise imaginary part of the 2-RDM (raw, no rescaling)."""
    return measure_rdm2(s).values.imag.copy()


def measure_rdm3(s: StateVector) -> RDM3:
    n = s.n_qubits
    if n > MAX_RDM3_ORBITALS:
        raise ValueError(f"measure_rdm3 is limited to {MAX_RDM3_ORBITALS} spin orbitals")
    v = _annihilated(s.amplitudes, n, 3).reshape(n**3, -1)
    return RDM3(n, (v.conj() @ v.T).reshape((n,) * 6))


def contract_rdm2_to_rdm1(d2: RDM2, n_electrons: int) -> RDM1:
    """``1D[p;s] = sum_q 2D[pq;sq] / (N-1)``."""
    if n_electrons < 2:
        raise ValueError("contraction to the 1-RDM needs at least 2 electrons")
    return RDM1(d2.n_spin_orbitals, np.einsum("pqsq->ps", d2.values) / (n_electrons - 1))


def contract_rdm3_to_rdm2(d3: RDM3, n_electrons: int) -> RDM2:
    if n_electrons < 3:
        raise ValueError("contraction to the 2-RDM needs at least 3 electrons")
    return RDM2(d3.n_spin_orbitals, np.einsum("pqrstr->pqst", d3.values) / (n_electrons - 2))


# --------------------------------------------------------------------------- wedge algebra


def _antisymmetrize_block(t: np.ndarray, offset: int, k: int) -> np.ndarray:
    out = np.zeros_like(t)
    base = list(range(t.ndim))
    for perm in permutations(range(k)):
        axes = list(base)
        for i, j in enumerate(perm):
            axes[offset + i] = offset + j
        parity = _parity(perm)
        out += parity * t.transpose(axes)
    return out / math.factorial(k)


def _parity(perm: tuple[int, ...]) -> int:
    sign, seen = 1, set()
    for start in range(len(perm)):
        if start in seen:
            continue
        length, j = 0, start
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        sign *= (-1) ** (length - 1)
    return sign


def wedge(a, b) -> np.ndarray:
    """Grassmann wedge product of two antisymmetric tensors.

    Tensors are ``(n,)*2k`` arrays with the ``k`` upper indices first; RDM
    objects are accepted as well.
    """
    a = np.asarray(getattr(a, "values", a))
    b = np.asarray(getattr(b, "values", b))
    if a.ndim % 2 or b.ndim % 2:
        raise ValueError("wedge operands need an even number of indices")
    if a.shape[0] != b.shape[0] or len(set(a.shape + b.shape)) != 1:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    ka, kb = a.ndim // 2, b.ndim // 2
    k = ka + kb
    t = np.multiply.outer(a, b)
    # (a_up, a_lo, b_up, b_lo) -> (a_up, b_up, a_lo, b_lo)
    order = (
        list(range(ka))
        + list(range(2 * ka, 2 * ka + kb))
        + list(range(ka, 2 * ka))
        + list(range(2 * ka + kb, 2 * k))
    )
    t = t.transpose(order)
    t = _antisymmetrize_block(t, 0, k)
    return _antisymmetrize_block(t, k, k)


def reconstruct_rdm3_cumulant(d1: RDM1, d2: RDM2) -> RDM3:
    """3-RDM from the 1- and 2-RDM with the connected 3-body cumulant dropped.

    In ``1/p!``-scaled form: ``3d = 1d^1d^1d + 3 (2d - 1d^1d)^1d``.
    Fewer than three electrons gives the (exact) zero tensor.
    """
    n = d1.n_spin_orbitals
    if d2.n_spin_orbitals != n:
        raise ValueError("1-RDM and 2-RDM dimensions differ")
    if d1.n_electrons < 3:
        return RDM3(n, np.zeros((n,) * 6))
    g1 = d1.values
    g11 = wedge(g1, g1)
    cumulant2 = d2.values / 2 - g11
    scaled = wedge(g11, g1) + 3 * wedge(cumulant2, g1)
    return RDM3(n, 6 * scaled)


# --------------------------------------------------------------------------- scalars and I/O


def energy(k2: TwoBodyTensor, d2: RDM2, core: float = 0.0) -> float:
    """``sum K[pq;st] 2D[pq;st] + core``."""
    if k2.n_spin_orbitals != d2.n_spin_orbitals:
        raise ValueError("Hamiltonian and 2-RDM dimensions differ")
    e = np.einsum("pqst,pqst->", k2.values, d2.values)
    if abs(e.imag) > 1e-10:
        raise ValueError(f"energy has imaginary part {e.imag:.3e}")
    return float(e.real) + core


def frobenius_norm(t) -> float:
    return float(np.linalg.norm(np.asarray(getattr(t, "values", t)).ravel()))


def dump_rdm(d: _RDM, stream: TextIO | str | Path) -> None:
    """Text dump: header line, then ``indices... real imag`` in row-major order."""
    if isinstance(stream, (str, Path)):
        with open(stream, "w") as fh:
            return dump_rdm(d, fh)
    n, k = d.n_spin_orbitals, d.order
    labels = ",".join("pqr"[:k] + "stu"[:k])
    stream.write(f"# rdm{k} n_spin_orbitals={n} index_order={labels} row-major\n")
    for idx in np.ndindex(d.values.shape):
        v = d.values[idx]
        stream.write(" ".join(map(str, idx)) + f" {float(v.real)!r} {float(v.imag)!r}\n")


def load_rdm(stream: TextIO | str | Path) -> _RDM:
    if isinstance(stream, (str, Path)):
        with open(stream) as fh:
            return load_rdm(fh)
    header = stream.readline().split()
    order = int(header[1][3:])
    n = int(header[2].split("=")[1])
    values = np.zeros((n,) * (2 * order), dtype=complex)
    for line in stream:
        parts = line.split()
        idx = tuple(int(x) for x in parts[: 2 * order])
        values[idx] = complex(float(parts[-2]), float(parts[-1]))
    cls = {1: RDM1, 2: RDM2, 3: RDM3}[order]
    return cls(n, values)
