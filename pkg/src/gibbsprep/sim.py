"""Statevector and noisy density-matrix execution of circuits, plus shot sampling.

Noise model: after every gate a depolarizing channel acts on the gate's
qubits (``p1`` for one-qubit gates, ``p2`` for two-qubit gates). ``RP`` is
charged as one two-qubit gate followed by one one-qubit gate on each of its
qubits. Readout errors are independent bit flips with probability
``p_spam``, applied only when sampling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import qcore
from .ansatz import Circuit, gate_matrix
from .qcore import H

S_DAG = np.diag([1, -1j]).astype(complex)


@dataclass(frozen=True)
class NoiseProfile:
    name: str
    p1: float = 0.0
    p2: float = 0.0
    p_spam: float = 0.0
    two_qubit_gate: str = "MS"
    metadata: Mapping[str, float] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for key in ("p1", "p2", "p_spam"):
            val = getattr(self, key)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{key}={val} outside [0, 1]")

    @property
    def is_noiseless(self) -> bool:
        return self.p1 == 0 and self.p2 == 0 and self.p_spam == 0

    def scaled(self, factor: float) -> "NoiseProfile":
        """Copy with the two-qubit error rate multiplied by ``factor``."""
        return NoiseProfile(
            f"{self.name}*{factor:g}", self.p1, min(1.0, self.p2 * factor),
            self.p_spam, self.two_qubit_gate, self.metadata,
        )


def _from_fidelities(name, f1, f2, fspam, gate, **timing) -> NoiseProfile:
    return NoiseProfile(
        name, round(1 - f1, 10), round(1 - f2, 10), round(1 - fspam, 10), gate, timing
    )


# Rates are 1 - fidelity for the trapped-ion devices; timings (seconds) are
# kept as metadata only.
_BUILTIN = (
    NoiseProfile("noiseless"),
    _from_fidelities("aria1", 0.9998, 0.9799, 0.9951, "MS",
                     t1=100.0, t2=1.0, gate_1q=135e-6, gate_2q=600e-6,
                     readout=300e-6, reset=20e-6),
    _from_fidelities("forte1", 0.9998, 0.9849, 0.9946, "ZZ",
                     t1=100.0, t2=1.0, gate_1q=130e-6, gate_2q=970e-6,
                     readout=150e-6, reset=50e-6),
    _from_fidelities("forte-ent1", 0.9998, 0.9915, 0.9939, "ZZ",
                     t1=188.0, t2=0.95, gate_1q=63e-6, gate_2q=650e-6,
                     readout=250e-6, reset=150e-6),
)


def builtin_profiles() -> list[NoiseProfile]:
    return list(_BUILTIN)


def get_profile(name: str) -> NoiseProfile:
    for p in _BUILTIN:
        if p.name == name:
            return p
    raise KeyError(f"unknown device profile {name!r}; known: {[p.name for p in _BUILTIN]}")


NOISELESS = _BUILTIN[0]


# -- engines -------------------------------------------------------------------

def run_statevector(c: Circuit) -> np.ndarray:
    """``U|0...0>`` for a measurement-free circuit."""
    if c.has_measurement():
        raise ValueError("mid-circuit measurement present; use run_density")
    n = c.num_qubits
    psi = np.zeros((2,) * n, dtype=complex)
    psi[(0,) * n] = 1.0
    for op in c.ops:
        psi = qcore.apply_unitary_tensor(psi, gate_matrix(op, c.rp), op.targets, n)
    return psi.reshape(-1)


def _front(t: np.ndarray, qubits: Sequence[int], n: int) -> tuple[np.ndarray, list, list]:
    src = list(qubits) + [q + n for q in qubits]
    dst = list(range(len(src)))
    return np.moveaxis(t, src, dst), src, dst


def _depolarize(t: np.ndarray, qubits: Sequence[int], p: float, n: int) -> np.ndarray:
    if p == 0:
        return t
    k = len(qubits)
    d = 2**k
    moved, src, dst = _front(t, qubits, n)
    shape = moved.shape
    m = moved.reshape(d, d, -1)
    reduced = np.einsum("ii...->...", m)
    out = (1 - p) * m + p * np.eye(d)[:, :, None] * reduced[None, None, :] / d
    return np.moveaxis(out.reshape(shape), dst, src)


def _dephase(t: np.ndarray, q: int, n: int) -> np.ndarray:
    moved, src, dst = _front(t, [q], n)
    moved = moved.copy()
    moved[0, 1] = 0
    moved[1, 0] = 0
    return np.moveaxis(moved, dst, src)


def _apply_unitary(t: np.ndarray, u: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    t = qcore.apply_unitary_tensor(t, u, targets, 2 * n)
    return qcore.apply_unitary_tensor(t, u.conj(), [q + n for q in targets], 2 * n)


def run_density(c: Circuit, noise: NoiseProfile = NOISELESS) -> np.ndarray:
    """Evolve ``|0...0><0...0|`` through the circuit's noisy channels.

    ``MEASURE_Z`` dephases the measured qubit, which then holds the classical
    record. ``CLASSICAL_X`` flips its target when that record is 1, i.e. the
    Kraus map ``|0><0| (x) I + |1><1| (x) X``.
    """
    n = c.num_qubits
    t = np.zeros((2,) * (2 * n), dtype=complex)
    t[(0,) * (2 * n)] = 1.0
    for op in c.ops:
        if op.kind == "MEASURE_Z":
            t = _dephase(t, op.targets[0], n)
        elif op.kind == "CLASSICAL_X":
            target, cond = op.targets
            t = _apply_unitary(t, qcore.CNOT, [cond, target], n)
            t = _depolarize(t, [target], noise.p1, n)
        else:
            t = _apply_unitary(t, gate_matrix(op, c.rp), op.targets, n)
            if len(op.targets) == 1:
                t = _depolarize(t, op.targets, noise.p1, n)
            else:
                t = _depolarize(t, op.targets, noise.p2, n)
                if op.kind == "RP":
                    for q in op.targets:
                        t = _depolarize(t, [q], noise.p1, n)
    rho = t.reshape(2**n, 2**n)
    return (rho + rho.conj().T) / 2


def reduced_state(rho_or_psi: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Reduced density matrix on ``qubits`` from a statevector or density matrix."""
    if rho_or_psi.ndim == 1:
        psi = rho_or_psi
        n = qcore.num_qubits(psi.reshape(-1, 1))
        qubits = list(qubits)
        rest = [q for q in range(n) if q not in qubits]
        m = np.moveaxis(psi.reshape((2,) * n), qubits + rest, list(range(n)))
        m = m.reshape(2 ** len(qubits), -1)
        return m @ m.conj().T
    if list(qubits) != sorted(qubits):
        raise ValueError("qubits must be ascending for density input")
    return qcore.partial_trace(rho_or_psi, qubits)


def reduced_system_state(full: np.ndarray, n: int | None = None) -> np.ndarray:
    n = _half(full) if n is None else n
    return reduced_state(full, list(range(n, 2 * n)))


def reduced_ancilla_state(full: np.ndarray, n: int | None = None) -> np.ndarray:
    n = _half(full) if n is None else n
    return reduced_state(full, list(range(n)))


def _half(full: np.ndarray) -> int:
    total = qcore.num_qubits(full.reshape(full.shape[0], -1))
    if total % 2:
        raise ValueError("full GSP state must have an even number of qubits")
    return total // 2


# -- sampling ------------------------------------------------------------------

@dataclass(frozen=True)
class Counts:
    basis: str
    shots: int
    histogram: Mapping[str, int]
    register: str = "S"

    def __post_init__(self):
        if sum(self.histogram.values()) != self.shots:
            raise ValueError("histogram does not sum to shots")
        widths = {len(b) for b in self.histogram}
        if len(widths) > 1:
            raise ValueError("inconsistent bitstring widths")

    @property
    def width(self) -> int:
        return len(next(iter(self.histogram)))

    def frequencies(self) -> np.ndarray:
        """Outcome frequencies indexed by the integer value of the bitstring."""
        f = np.zeros(2**self.width)
        for bits, c in self.histogram.items():
            f[int(bits, 2)] += c
        return f / self.shots

    def dumps(self) -> str:
        lines = [f"basis={self.basis} shots={self.shots} register={self.register}"]
        lines += [f"{b} {c}" for b, c in sorted(self.histogram.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Counts":
        head, *rows = [ln for ln in text.splitlines() if ln.strip()]
        meta = dict(item.split("=", 1) for item in head.split())
        hist = {}
        for row in rows:
            bits, c = row.split()
            hist[bits] = hist.get(bits, 0) + int(c)
        return cls(meta["basis"], int(meta["shots"]), hist, meta.get("register", "S"))


def as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def readout_channel(probs: np.ndarray, p_flip: float) -> np.ndarray:
    """Apply independent bit flips to a distribution over ``k``-bit strings."""
    if p_flip == 0:
        return probs
    k = qcore.num_qubits(probs.reshape(-1, 1))
    flip = np.array([[1 - p_flip, p_flip], [p_flip, 1 - p_flip]])
    t = probs.reshape((2,) * k)
    for q in range(k):
        t = np.moveaxis(np.tensordot(flip, t, axes=(1, q)), 0, q)
    return t.reshape(-1)


def basis_probabilities(rho: np.ndarray, bases: str) -> np.ndarray:
    """Outcome distribution after rotating each qubit into its local basis."""
    k = qcore.num_qubits(rho)
    if len(bases) != k:
        raise ValueError("one basis letter per qubit required")
    for q, b in enumerate(bases):
        if b == "X":
            rho = qcore.apply_unitary_density(rho, H, [q])
        elif b == "Y":
            rho = qcore.apply_unitary_density(rho, H @ S_DAG, [q])
        elif b != "Z":
            raise ValueError(f"unknown basis {b!r}")
    p = np.clip(np.real(np.diag(rho)), 0.0, None)
    return p / p.sum()


def sample_from_probabilities(
    probs: np.ndarray, shots: int, rng, basis: str = "Z", register: str = "S"
) -> Counts:
    if shots <= 0:
        raise ValueError("shots must be positive")
    k = qcore.num_qubits(probs.reshape(-1, 1))
    draws = as_rng(rng).multinomial(shots, probs / probs.sum())
    hist = {format(i, f"0{k}b"): int(c) for i, c in enumerate(draws) if c}
    return Counts(basis, shots, hist, register)


def register_qubits(register: str, n: int) -> list[int]:
    if register == "A":
        return list(range(n))
    if register == "S":
        return list(range(n, 2 * n))
    raise ValueError(f"register must be 'A' or 'S', got {register!r}")


def sample_counts(
    state: np.ndarray,
    basis: str,
    register: str | None,
    shots: int,
    rng,
    p_spam: float = 0.0,
) -> Counts:
    """Sample a register of a GSP state (or a whole state if ``register`` is None)."""
    if basis not in ("Z", "X"):
        raise ValueError("basis must be 'Z' or 'X'")
    if register is None:
        rho = state if state.ndim == 2 else qcore.projector(state)
        label = "S"
    else:
        n = _half(state if state.ndim == 2 else state.reshape(-1, 1))
        rho = reduced_state(state, register_qubits(register, n))
        label = register
    k = qcore.num_qubits(rho)
    probs = readout_channel(basis_probabilities(rho, basis * k), p_spam)
    return sample_from_probabilities(probs, shots, rng, basis, label)
