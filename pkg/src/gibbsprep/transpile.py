"""Lowering to trapped-ion native gates (GPI, GPI2, virtual Z, plus MS or ZZ).

All angles are in radians:

* ``GPI(p)  = [[0, e^{-ip}], [e^{ip}, 0]]``
* ``GPI2(p) = [[1, -i e^{-ip}], [-i e^{ip}, 1]] / sqrt(2)``
* ``VIRTZ(t) = diag(e^{-it/2}, e^{it/2})``
* ``MS(p0, p1, t) = exp(-i t/2 s(p0) (x) s(p1))`` with ``s(p) = cos(p) X + sin(p) Y``
* ``ZZ(t) = exp(-i t/2 Z (x) Z)``

Every abstract two-qubit gate is written as a product of Pauli-pair
rotations ``exp(-i t/2 P (x) Q)``, each realized by one entangler dressed
with one-qubit basis changes. Runs of one-qubit gates are merged per qubit
and emitted as a single Euler sequence ``VIRTZ GPI2 VIRTZ GPI2 VIRTZ``
(or a lone ``VIRTZ``/``GPI`` when that suffices).
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import ansatz, qcore
from .ansatz import Circuit
from .qcore import H, X, Y, Z

S = np.diag([1, 1j]).astype(complex)
# basis changes mapping Z onto each Pauli (L Z L^dagger = P)
_TO_PAULI = {"X": H, "Y": S @ H, "Z": np.eye(2, dtype=complex)}
ONE_QUBIT_NATIVE = ("GPI", "GPI2", "VIRTZ")
TWO_QUBIT_NATIVE = ("MS", "ZZ")


@dataclass(frozen=True)
class NativeGateSet:
    name: str
    two_qubit: str

    def __post_init__(self):
        if self.two_qubit not in TWO_QUBIT_NATIVE:
            raise ValueError(f"two-qubit native must be one of {TWO_QUBIT_NATIVE}")


ARIA = NativeGateSet("aria", "MS")
FORTE = NativeGateSet("forte", "ZZ")
GATE_SETS = {"aria": ARIA, "ms": ARIA, "forte": FORTE, "zz": FORTE}


def gate_set_for(name: str) -> NativeGateSet:
    """Gate set by name, or by device profile name (aria* -> MS, forte* -> ZZ)."""
    key = name.lower()
    if key in GATE_SETS:
        return GATE_SETS[key]
    if key.startswith("aria"):
        return ARIA
    if key.startswith("forte"):
        return FORTE
    raise KeyError(f"no native gate set for {name!r}")


@dataclass(frozen=True)
class NativeGate:
    kind: str
    targets: tuple[int, ...]
    angles: tuple[float, ...]

    def matrix(self) -> np.ndarray:
        if self.kind == "GPI":
            (p,) = self.angles
            return np.array([[0, np.exp(-1j * p)], [np.exp(1j * p), 0]])
        if self.kind == "GPI2":
            (p,) = self.angles
            return np.array([[1, -1j * np.exp(-1j * p)], [-1j * np.exp(1j * p), 1]]) / np.sqrt(2)
        if self.kind == "VIRTZ":
            (t,) = self.angles
            return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
        if self.kind == "MS":
            p0, p1, t = self.angles
            s0 = np.cos(p0) * X + np.sin(p0) * Y
            s1 = np.cos(p1) * X + np.sin(p1) * Y
            return ansatz.pauli_rotation(qcore.kron(s0, s1), t)
        if self.kind == "ZZ":
            (t,) = self.angles
            return ansatz.pauli_rotation(qcore.kron(Z, Z), t)
        raise ValueError(f"unknown native gate {self.kind!r}")


@dataclass(frozen=True)
class NativeCircuit:
    num_qubits: int
    ops: tuple[NativeGate, ...]
    gate_set: NativeGateSet
    source_hash: str

    def __post_init__(self):
        allowed = set(ONE_QUBIT_NATIVE) | {self.gate_set.two_qubit}
        for op in self.ops:
            if op.kind not in allowed:
                raise ValueError(f"{op.kind} not in gate set {self.gate_set.name}")

    def unitary(self) -> np.ndarray:
        n = self.num_qubits
        u = np.eye(2**n, dtype=complex).reshape((2,) * (2 * n))
        for op in self.ops:
            u = qcore.apply_unitary_tensor(u, op.matrix(), op.targets, 2 * n)
        return u.reshape(2**n, 2**n)

    def dumps(self) -> str:
        lines = [f"# qubits={self.num_qubits} gateset={self.gate_set.name} source={self.source_hash}"]
        for op in self.ops:
            lines.append(" ".join([op.kind, *map(str, op.targets), *(format(a, ".17g") for a in op.angles)]))
        return "\n".join(lines) + "\n"


# -- one-qubit synthesis ------------------------------------------------------------

def _wrap(angle: float) -> float:
    """Map onto (-pi, pi]."""
    a = float(np.mod(angle + np.pi, 2 * np.pi) - np.pi)
    return np.pi if a == -np.pi else a


def _is_zero_angle(a: float, tol: float = 1e-12) -> bool:
    return abs(_wrap(a)) < tol


def synthesize_1q(u: np.ndarray, q: int, tol: float = 1e-12) -> list[NativeGate]:
    """Native sequence equal to ``u`` up to global phase."""
    v = u / np.sqrt(np.linalg.det(u))
    a, b = v[0, 0], v[1, 0]
    if abs(b) < tol:
        t = -2 * np.angle(a)
        return [] if _is_zero_angle(t) else [NativeGate("VIRTZ", (q,), (_wrap(t),))]
    if abs(a) < tol:
        # v = [[0, -conj(b)], [b, 0]] is GPI(p) up to phase with e^{2ip} = -b/conj(b)
        p = 0.5 * np.angle(-b / np.conj(b))
        return [NativeGate("GPI", (q,), (_wrap(p),))]
    theta = 2 * np.arctan2(abs(b), abs(a))
    phi = np.angle(b) - np.angle(a)
    lam = -np.angle(a) - np.angle(b)
    seq = [
        ("VIRTZ", lam),
        ("GPI2", 0.0),
        ("VIRTZ", theta + np.pi),
        ("GPI2", 0.0),
        ("VIRTZ", phi + np.pi),
    ]
    return [
        NativeGate(kind, (q,), (_wrap(ang),))
        for kind, ang in seq
        if kind == "GPI2" or not _is_zero_angle(ang)
    ]


# -- two-qubit templates -------------------------------------------------------------

def _pauli_pair_rotations(op: ansatz.GateOp, rp: str) -> list[tuple[str, float]]:
    """Abstract gate as local-dressed rotations ``exp(-i t/2 P (x) Q)``."""
    if op.kind == "RP":
        a, b = op.angles
        if rp == "xy":
            return [("YX", b), ("XY", a)]
        if rp == "xxyy":
            return [("YY", b), ("XX", a)]
        raise ValueError(f"no lowering template for RP realization {rp!r}")
    raise ValueError(f"unsupported op kind {op.kind}")


class _Lowerer:
    def __init__(self, n: int, gs: NativeGateSet):
        self.n = n
        self.gs = gs
        self.pending = [np.eye(2, dtype=complex) for _ in range(n)]
        self.ops: list[NativeGate] = []

    def local(self, u: np.ndarray, q: int) -> None:
        self.pending[q] = u @ self.pending[q]

    def flush(self, q: int) -> None:
        self.ops += synthesize_1q(self.pending[q], q)
        self.pending[q] = np.eye(2, dtype=complex)

    def zz_rotation(self, qa: int, qb: int, theta: float) -> None:
        """``exp(-i theta/2 Z (x) Z)`` with one entangler."""
        theta = _wrap(theta)
        if self.gs.two_qubit == "ZZ":
            ent = NativeGate("ZZ", (qa, qb), (theta,))
            pre = post = np.eye(2, dtype=complex)
        else:
            p0 = 0.0
            if theta < 0:
                theta, p0 = -theta, np.pi
            ent = NativeGate("MS", (qa, qb), (p0, 0.0, theta))
            pre = post = H
        for q in (qa, qb):
            self.local(pre, q)
            self.flush(q)
        self.ops.append(ent)
        for q in (qa, qb):
            self.local(post, q)

    def pauli_rotation(self, paulis: str, qa: int, qb: int, theta: float) -> None:
        la, lb = _TO_PAULI[paulis[0]], _TO_PAULI[paulis[1]]
        self.local(la.conj().T, qa)
        self.local(lb.conj().T, qb)
        self.zz_rotation(qa, qb, theta)
        self.local(la, qa)
        self.local(lb, qb)

    def cnot(self, c: int, t: int) -> None:
        # CNOT = e^{-i pi/4} (I (x) H)(RZ(-pi/2) (x) RZ(-pi/2)) exp(-i pi/4 ZZ) (I (x) H)
        rz = np.diag([np.exp(0.25j * np.pi), np.exp(-0.25j * np.pi)])
        self.local(H, t)
        self.zz_rotation(c, t, np.pi / 2)
        self.local(rz, c)
        self.local(H @ rz, t)


def lower(c: Circuit, gs: NativeGateSet = ARIA) -> NativeCircuit:
    """Native circuit equal to ``c`` up to global phase."""
    low = _Lowerer(c.num_qubits, gs)
    for op in c.ops:
        if op.kind in ("RY", "X"):
            low.local(ansatz.gate_matrix(op, c.rp), op.targets[0])
        elif op.kind == "CNOT":
            low.cnot(*op.targets)
        elif op.kind == "RP":
            qa, qb = op.targets
            for paulis, theta in _pauli_pair_rotations(op, c.rp):
                low.pauli_rotation(paulis, qa, qb, theta)
        else:
            raise ValueError(f"cannot lower {op.kind}")
    for q in range(c.num_qubits):
        low.flush(q)
    digest = hashlib.sha256(ansatz.dumps(c).encode()).hexdigest()[:16]
    return NativeCircuit(c.num_qubits, tuple(low.ops), gs, digest)


def gate_counts(nc: NativeCircuit) -> dict[str, int]:
    kinds = Counter(op.kind for op in nc.ops)
    return {
        "one_qubit": sum(kinds[k] for k in ONE_QUBIT_NATIVE),
        "two_qubit": sum(kinds[k] for k in TWO_QUBIT_NATIVE),
        "virtual_z": kinds["VIRTZ"],
    }


def counts_csv(counts: dict[str, int]) -> str:
    return "category,count\n" + "".join(f"{k},{v}\n" for k, v in counts.items())


def phase_invariant_distance(u: np.ndarray, v: np.ndarray) -> float:
    """``1 - |tr(U^dagger V)| / d``."""
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch {u.shape} vs {v.shape}")
    return float(max(0.0, 1.0 - abs(np.trace(u.conj().T @ v)) / u.shape[0]))


def verify_equivalence(c: Circuit, nc: NativeCircuit) -> float:
    if c.num_qubits != nc.num_qubits:
        raise ValueError("qubit count mismatch")
    return phase_invariant_distance(ansatz.circuit_unitary(c), nc.unitary())
