"""Dense linear algebra and quantum-information primitives.

States and operators are plain complex ``numpy`` arrays. Qubit ordering is
fixed everywhere in the package: qubit 0 is the most significant bit of a
basis index, and bitstrings are written with qubit 0 first.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

ATOL = 1e-10
EIG_FLOOR = 1e-15

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues (ascending) and column eigenvectors of a Hermitian matrix."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def num_qubits(mat: np.ndarray) -> int:
    dim = mat.shape[0]
    n = int(round(np.log2(dim)))
    if dim < 1 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of 2")
    return n


def ket(bits: str) -> np.ndarray:
    """Computational basis state for a bitstring such as ``"010"``."""
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2)] = 1.0
    return psi


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def kron(*ops: np.ndarray) -> np.ndarray:
    """Tensor product; the first factor carries the high-order index."""
    return reduce(np.kron, ops, np.eye(1, dtype=complex))


def pauli_string(label: str) -> np.ndarray:
    return kron(*(PAULI[c] for c in label))


def _check_targets(targets: Sequence[int], n: int) -> None:
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate targets {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise ValueError(f"target {t} out of range for {n} qubits")


def embed(gate: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """Full ``2**n`` operator acting as ``gate`` on ``targets`` (in order)."""
    targets = list(targets)
    k = len(targets)
    if gate.shape != (2**k, 2**k):
        raise ValueError(f"gate shape {gate.shape} does not match {k} targets")
    _check_targets(targets, n)
    full = np.eye(2**n, dtype=complex).reshape((2,) * (2 * n))
    return apply_unitary_tensor(full, gate, targets, n).reshape(2**n, 2**n)


def apply_unitary_tensor(
    tensor: np.ndarray, gate: np.ndarray, targets: Sequence[int], n: int
) -> np.ndarray:
    """Contract ``gate`` into the leading ``n`` qubit axes of ``tensor``.

    ``tensor`` has shape ``(2,)*n + rest``; the trailing axes are untouched,
    which lets the same routine act on statevectors and on the row index of a
    density matrix.
    """
    k = len(targets)
    g = gate.reshape((2,) * (2 * k))
    out = np.tensordot(g, tensor, axes=(list(range(k, 2 * k)), list(targets)))
    # tensordot puts the gate's output axes first; move them back in place
    return np.moveaxis(out, list(range(k)), list(targets))


def apply_unitary_state(
    psi: np.ndarray, gate: np.ndarray, targets: Sequence[int]
) -> np.ndarray:
    n = num_qubits(psi.reshape(-1, 1)) if psi.ndim == 1 else psi.ndim
    t = psi.reshape((2,) * n)
    return apply_unitary_tensor(t, gate, targets, n).reshape(-1)


def apply_unitary_density(
    rho: np.ndarray, gate: np.ndarray, targets: Sequence[int]
) -> np.ndarray:
    """Return ``G rho G^dagger`` with ``G`` acting on ``targets``."""
    n = num_qubits(rho)
    t = rho.reshape((2,) * (2 * n))
    t = apply_unitary_tensor(t, gate, targets, 2 * n)
    t = apply_unitary_tensor(t, gate.conj(), [q + n for q in targets], 2 * n)
    return t.reshape(2**n, 2**n)


def partial_trace(rho: np.ndarray, keep: Iterable[int]) -> np.ndarray:
    """Reduced state on the qubits in ``keep`` (returned in ascending order)."""
    n = num_qubits(rho)
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("keep set must be nonempty")
    _check_targets(keep, n)
    drop = [q for q in range(n) if q not in keep]
    t = rho.reshape((2,) * (2 * n))
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    rows = list(letters[:n])
    cols = list(letters[n : 2 * n])
    for q in drop:
        cols[q] = rows[q]
    out = "".join(rows[q] for q in keep) + "".join(cols[q] for q in keep)
    spec = "".join(rows) + "".join(cols) + "->" + out
    d = 2 ** len(keep)
    return np.einsum(spec, t).reshape(d, d)


def is_hermitian(mat: np.ndarray, atol: float = ATOL) -> bool:
    return bool(np.max(np.abs(mat - mat.conj().T), initial=0.0) <= atol)


def is_density_matrix(rho: np.ndarray, atol: float = ATOL) -> bool:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if not is_hermitian(rho, atol):
        return False
    if abs(np.trace(rho) - 1.0) > atol:
        return False
    return bool(np.linalg.eigvalsh(rho).min() >= -atol)


def eigh(h: np.ndarray, atol: float = 1e-8) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    if not is_hermitian(h, atol):
        raise ValueError("matrix is not Hermitian")
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return Spectrum(w, v)


def herm_exp(h: np.ndarray, scale: float) -> np.ndarray:
    """``exp(scale * h)`` for Hermitian ``h`` via its spectrum."""
    spec = eigh(h)
    v = spec.eigenvectors
    return (v * np.exp(scale * spec.eigenvalues)) @ v.conj().T


def _clipped_eigvals(rho: np.ndarray) -> np.ndarray:
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    return np.clip(w, 0.0, None)


def shannon_entropy(probs: np.ndarray) -> float:
    """``-sum p ln p`` in nats with ``0 ln 0 = 0``."""
    p = np.asarray(probs, dtype=float)
    p = p[p > EIG_FLOOR]
    return float(-np.sum(p * np.log(p)))


def von_neumann_entropy(rho: np.ndarray) -> float:
    return shannon_entropy(_clipped_eigvals(rho))


def _sqrt_eigvals(w: np.ndarray) -> np.ndarray:
    # eigenvalues at round-off level would contribute ~sqrt(eps) after the root
    tol = w.size * np.finfo(float).eps * max(np.abs(w).max(initial=0.0), 1.0)
    return np.sqrt(np.where(w > tol, w, 0.0))


def sqrtm_psd(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    return (v * _sqrt_eigvals(w)) @ v.conj().T


def _check_same_shape(rho: np.ndarray, sigma: np.ndarray) -> None:
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch {rho.shape} vs {sigma.shape}")


def uhlmann_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Squared Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``."""
    _check_same_shape(rho, sigma)
    s = sqrtm_psd(rho)
    inner = s @ sigma @ s
    w = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    f = np.sum(_sqrt_eigvals(w)) ** 2
    return float(min(max(f, 0.0), 1.0))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    _check_same_shape(rho, sigma)
    d = rho - sigma
    w = np.linalg.eigvalsh((d + d.conj().T) / 2)
    return float(0.5 * np.sum(np.abs(w)))


def random_density_matrix(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Hilbert-Schmidt random state (Ginibre construction)."""
    d = 2**n
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_statevector(n: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return psi / np.linalg.norm(psi)


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    return (g + g.conj().T) / 2
