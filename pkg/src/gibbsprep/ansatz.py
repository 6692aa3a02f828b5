"""Parameterized Gibbs-state-preparation circuits.

Register layout for ``n`` spins: ancilla qubits ``a_1..a_n`` are indices
``0..n-1`` and system qubits ``s_1..s_n`` are ``n..2n-1``.

The two-angle system gate ``RP`` is pluggable. Every realization must be the
identity at zero angles and commute with ``Z (x) Z``. ``"xy"`` (default) is
``exp(-i a XY/2) exp(-i b YX/2)``, a real rotation acting independently on
the even- and odd-parity two-qubit subspaces. ``"xxyy"`` is
``exp(-i a XX/2) exp(-i b YY/2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import qcore
from .qcore import X, Y

ONE_QUBIT = {"RY", "X", "MEASURE_Z"}
TWO_QUBIT = {"CNOT", "RP", "CLASSICAL_X"}
N_ANGLES = {"RY": 1, "RP": 2, "X": 0, "CNOT": 0, "MEASURE_Z": 0, "CLASSICAL_X": 0}


@dataclass(frozen=True)
class GateOp:
    """One gate. ``CLASSICAL_X`` targets are ``(target, condition_qubit)``:
    X is applied to ``target`` when the measured bit of ``condition_qubit`` is 1.
    """

    kind: str
    targets: tuple[int, ...]
    angles: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in N_ANGLES:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        arity = 1 if self.kind in ONE_QUBIT else 2
        if len(self.targets) != arity:
            raise ValueError(f"{self.kind} acts on {arity} qubit(s), got {self.targets}")
        if len(self.angles) != N_ANGLES[self.kind]:
            raise ValueError(f"{self.kind} takes {N_ANGLES[self.kind]} angle(s)")
        if arity == 2 and self.targets[0] == self.targets[1]:
            raise ValueError(f"{self.kind} needs two distinct qubits")


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    ops: tuple[GateOp, ...] = ()
    ancilla: tuple[int, ...] = ()
    system: tuple[int, ...] = ()
    rp: str = "xy"

    def __post_init__(self):
        for op in self.ops:
            if max(op.targets) >= self.num_qubits or min(op.targets) < 0:
                raise ValueError(f"{op} outside {self.num_qubits}-qubit register")
        a, s = set(self.ancilla), set(self.system)
        if (a or s) and (a & s or a | s != set(range(self.num_qubits))):
            raise ValueError("ancilla and system registers must partition the qubits")
        if self.rp not in RP_REALIZATIONS:
            raise ValueError(f"unknown RP realization {self.rp!r}")

    def count(self, kind: str) -> int:
        return sum(op.kind == kind for op in self.ops)

    def has_measurement(self) -> bool:
        return any(op.kind in ("MEASURE_Z", "CLASSICAL_X") for op in self.ops)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.num_qubits != self.num_qubits:
            raise ValueError("register size mismatch")
        return Circuit(
            self.num_qubits,
            self.ops + other.ops,
            self.ancilla or other.ancilla,
            self.system or other.system,
            self.rp,
        )


@dataclass(frozen=True)
class ParamSet:
    n: int
    theta: np.ndarray
    phi: np.ndarray
    ancilla_layers: int = 1
    system_layers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        object.__setattr__(self, "phi", np.asarray(self.phi, dtype=float))
        if self.theta.shape != (2 * self.n * self.ancilla_layers,):
            raise ValueError(f"theta must have length {2 * self.n * self.ancilla_layers}")
        if self.phi.shape != (2 * self.n * self.system_layers,):
            raise ValueError(f"phi must have length {2 * self.n * self.system_layers}")

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.theta, self.phi])

    def with_vector(self, x: np.ndarray) -> "ParamSet":
        k = self.theta.size
        return ParamSet(self.n, x[:k], x[k:], self.ancilla_layers, self.system_layers)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "ancilla_layers": self.ancilla_layers,
            "system_layers": self.system_layers,
            "theta": [float(v) for v in self.theta],
            "phi": [float(v) for v in self.phi],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ParamSet":
        return cls(d["n"], d["theta"], d["phi"], d["ancilla_layers"], d["system_layers"])


def param_init(n: int, ancilla_layers: int = 1, system_layers: int = 1, seed=None) -> ParamSet:
    """Draw all angles i.i.d. uniform on [-pi, pi]."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if ancilla_layers < 1 or system_layers < 1:
        raise ValueError("layer counts must be >= 1")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-np.pi, np.pi, 2 * n * ancilla_layers)
    phi = rng.uniform(-np.pi, np.pi, 2 * n * system_layers)
    return ParamSet(n, theta, phi, ancilla_layers, system_layers)


def ancilla_qubits(n: int) -> tuple[int, ...]:
    return tuple(range(n))


def system_qubits(n: int) -> tuple[int, ...]:
    return tuple(range(n, 2 * n))


def _registers(n: int) -> dict:
    return {"ancilla": ancilla_qubits(n), "system": system_qubits(n)}


# -- gate matrices -----------------------------------------------------------

def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def pauli_rotation(p: np.ndarray, theta: float) -> np.ndarray:
    """``exp(-i theta P / 2)`` for an involutory Pauli product ``P``."""
    return np.cos(theta / 2) * np.eye(p.shape[0]) - 1j * np.sin(theta / 2) * p


XY = qcore.kron(X, Y)
YX = qcore.kron(Y, X)
XX = qcore.kron(X, X)
YY = qcore.kron(Y, Y)


def rp_xy(a: float, b: float) -> np.ndarray:
    return pauli_rotation(XY, a) @ pauli_rotation(YX, b)


def rp_xxyy(a: float, b: float) -> np.ndarray:
    return pauli_rotation(XX, a) @ pauli_rotation(YY, b)


RP_REALIZATIONS: dict[str, Callable[[float, float], np.ndarray]] = {
    "xy": rp_xy,
    "xxyy": rp_xxyy,
}


def rp_gate(a: float, b: float, realization: str = "xy") -> np.ndarray:
    return RP_REALIZATIONS[realization](a, b)


def gate_matrix(op: GateOp, rp: str = "xy") -> np.ndarray:
    if op.kind == "RY":
        return ry(op.angles[0])
    if op.kind == "X":
        return X.copy()
    if op.kind == "CNOT":
        return qcore.CNOT.copy()
    if op.kind == "RP":
        return rp_gate(*op.angles, realization=rp)
    raise ValueError(f"{op.kind} is not a unitary gate")


# -- circuit fragments ---------------------------------------------------------

def _check_len(vec: np.ndarray, expected: int, name: str) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (expected,):
        raise ValueError(f"{name} must have length {expected}, got {vec.shape}")
    return vec


def build_ancilla_unitary(n: int, layers: int, theta: Sequence[float], rp: str = "xy") -> Circuit:
    """RY column, CNOT ladder ``a_i -> a_{i+1}``, RY column; repeated per layer.

    Each layer consumes ``2n`` angles, so ``|theta| = 2 n L``. For one layer
    this is the usual two-column block with ``n - 1`` CNOTs.
    """
    theta = _check_len(theta, 2 * n * layers, "theta")
    a = ancilla_qubits(n)
    ops = []
    for layer in range(layers):
        block = theta[2 * n * layer : 2 * n * (layer + 1)]
        ops += [GateOp("RY", (a[i],), (float(block[i]),)) for i in range(n)]
        ops += [GateOp("CNOT", (a[i], a[i + 1])) for i in range(n - 1)]
        ops += [GateOp("RY", (a[i],), (float(block[n + i]),)) for i in range(n)]
    return Circuit(2 * n, tuple(ops), rp=rp, **_registers(n))


def build_transversal_cnots(n: int, rp: str = "xy") -> Circuit:
    if n < 2:
        raise ValueError("n must be >= 2")
    a, s = ancilla_qubits(n), system_qubits(n)
    ops = tuple(GateOp("CNOT", (a[i], s[i])) for i in range(n))
    return Circuit(2 * n, ops, rp=rp, **_registers(n))


def build_system_unitary(n: int, layers: int, phi: Sequence[float], rp: str = "xy") -> Circuit:
    """Per layer, ``RP(phi_{2i-1}, phi_{2i})`` on ``(s_i, s_{i+1})`` cyclically."""
    phi = _check_len(phi, 2 * n * layers, "phi")
    s = system_qubits(n)
    ops = []
    for layer in range(layers):
        base = 2 * n * layer
        for i in range(n):
            angles = (float(phi[base + 2 * i]), float(phi[base + 2 * i + 1]))
            ops.append(GateOp("RP", (s[i], s[(i + 1) % n]), angles))
    return Circuit(2 * n, tuple(ops), rp=rp, **_registers(n))


def build_gsp_circuit(params: ParamSet, rp: str = "xy") -> Circuit:
    n = params.n
    return (
        build_ancilla_unitary(n, params.ancilla_layers, params.theta, rp)
        + build_transversal_cnots(n, rp)
        + build_system_unitary(n, params.system_layers, params.phi, rp)
    )


def build_feedforward_variant(params: ParamSet, rp: str = "xy") -> Circuit:
    """Ancilla measured mid-circuit; X on ``s_i`` conditioned on ``a_i``."""
    n = params.n
    a, s = ancilla_qubits(n), system_qubits(n)
    middle = tuple(GateOp("MEASURE_Z", (q,)) for q in a) + tuple(
        GateOp("CLASSICAL_X", (s[i], a[i])) for i in range(n)
    )
    return (
        build_ancilla_unitary(n, params.ancilla_layers, params.theta, rp)
        + Circuit(2 * n, middle, rp=rp, **_registers(n))
        + build_system_unitary(n, params.system_layers, params.phi, rp)
    )


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Dense ``2**N x 2**N`` unitary of a measurement-free circuit."""
    if c.has_measurement():
        raise ValueError("circuit contains measurement operations")
    n = c.num_qubits
    u = np.eye(2**n, dtype=complex).reshape((2,) * (2 * n))
    for op in c.ops:
        u = qcore.apply_unitary_tensor(u, gate_matrix(op, c.rp), op.targets, 2 * n)
    return u.reshape(2**n, 2**n)


# -- text format ---------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(x, ".17g")


def dumps(c: Circuit) -> str:
    """One op per line: ``KIND q0 [q1] [angle1] [angle2]``."""
    header = (
        f"# qubits={c.num_qubits} ancilla={','.join(map(str, c.ancilla))} "
        f"system={','.join(map(str, c.system))} rp={c.rp}"
    )
    lines = [header]
    for op in c.ops:
        fields = [op.kind, *map(str, op.targets), *map(_fmt, op.angles)]
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def loads(text: str) -> Circuit:
    meta = {}
    ops = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for item in line[1:].split():
                key, _, value = item.partition("=")
                meta[key] = value
            continue
        kind, *rest = line.split()
        arity = 1 if kind in ONE_QUBIT else 2
        targets = tuple(int(t) for t in rest[:arity])
        angles = tuple(float(v) for v in rest[arity:])
        ops.append(GateOp(kind, targets, angles))
    if "qubits" not in meta:
        raise ValueError("missing '# qubits=' header")

    def idx(key):
        return tuple(int(v) for v in meta.get(key, "").split(",") if v)

    return Circuit(int(meta["qubits"]), tuple(ops), idx("ancilla"), idx("system"), meta.get("rp", "xy"))
