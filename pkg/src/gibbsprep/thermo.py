"""Transverse-field Ising model and its exact thermal state.

Natural units (k_B = 1): entropies are in nats and beta is dimensionless.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import qcore
from .qcore import X, Z


@dataclass(frozen=True)
class TFIMParams:
    n: int
    h: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"periodic TFIM needs n >= 2, got {self.n}")

    def bonds(self) -> list[tuple[int, int]]:
        """Cyclic nearest-neighbour bonds ``(i, i+1 mod n)``.

        For n = 2 the sum visits the pair (0, 1) twice, and both terms are kept.
        """
        return [(i, (i + 1) % self.n) for i in range(self.n)]


def tfim_hamiltonian(p: TFIMParams) -> np.ndarray:
    """``H = -1/2 sum_i X_i X_{i+1} - h sum_i Z_i`` with periodic boundaries."""
    n = p.n
    dim = 2**n
    ham = np.zeros((dim, dim), dtype=complex)
    xx = qcore.kron(X, X)
    for i, j in p.bonds():
        ham -= 0.5 * qcore.embed(xx, [i, j], n)
    for i in range(n):
        ham -= p.h * qcore.embed(Z, [i], n)
    return ham


@dataclass(frozen=True)
class GibbsTarget:
    params: TFIMParams
    beta: float

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")

    @cached_property
    def hamiltonian(self) -> np.ndarray:
        return tfim_hamiltonian(self.params)

    @cached_property
    def spectrum(self) -> qcore.Spectrum:
        return qcore.eigh(self.hamiltonian)

    def with_beta(self, beta: float) -> "GibbsTarget":
        """Same Hamiltonian at another temperature, sharing the diagonalization."""
        other = GibbsTarget(self.params, beta)
        other.__dict__["hamiltonian"] = self.hamiltonian
        other.__dict__["spectrum"] = self.spectrum
        return other


def boltzmann_weights(t: GibbsTarget) -> np.ndarray:
    """Normalized populations of the energy eigenstates."""
    e = t.spectrum.eigenvalues
    w = np.exp(-t.beta * (e - e[0]))
    return w / w.sum()


def exact_gibbs(t: GibbsTarget) -> np.ndarray:
    if t.beta == 0:
        return np.eye(2**t.params.n, dtype=complex) / 2**t.params.n
    v = t.spectrum.eigenvectors
    rho = (v * boltzmann_weights(t)) @ v.conj().T
    return (rho + rho.conj().T) / 2


def log_partition_function(t: GibbsTarget) -> float:
    e = t.spectrum.eigenvalues
    return float(-t.beta * e[0] + np.log(np.sum(np.exp(-t.beta * (e - e[0])))))


def partition_function(t: GibbsTarget) -> float:
    return float(np.sum(np.exp(-t.beta * t.spectrum.eigenvalues)))


def energy(rho: np.ndarray, ham: np.ndarray) -> float:
    return float(np.real(np.trace(ham @ rho)))


def free_energy(rho: np.ndarray, t: GibbsTarget) -> float:
    """``tr(H rho) - S(rho)/beta``; undefined at beta = 0."""
    if not t.beta > 0:
        raise ValueError("free energy requires beta > 0")
    return energy(rho, t.hamiltonian) - qcore.von_neumann_entropy(rho) / t.beta


def equilibrium_free_energy(t: GibbsTarget) -> float:
    if not t.beta > 0:
        raise ValueError("free energy requires beta > 0")
    return -log_partition_function(t) / t.beta


def cyclic_shift(n: int) -> np.ndarray:
    """Permutation moving site i to site i+1 (mod n)."""
    dim = 2**n
    perm = np.zeros((dim, dim), dtype=complex)
    for idx in range(dim):
        bits = format(idx, f"0{n}b")
        shifted = bits[-1] + bits[:-1]
        perm[int(shifted, 2), idx] = 1.0
    return perm
