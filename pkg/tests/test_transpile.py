import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gibbsprep import ansatz, qcore, transpile
from gibbsprep.ansatz import Circuit, GateOp
from gibbsprep.transpile import ARIA, FORTE


def _two_qubit_formula(c):
    return c.count("CNOT") + 2 * c.count("RP")


def test_native_matrices_match_closed_forms():
    p0, p1 = 0.3, -1.1
    s2 = 1 / np.sqrt(2)
    want = s2 * np.array([
        [1, 0, 0, -1j * np.exp(-1j * (p0 + p1))],
        [0, 1, -1j * np.exp(-1j * (p0 - p1)), 0],
        [0, -1j * np.exp(1j * (p0 - p1)), 1, 0],
        [-1j * np.exp(1j * (p0 + p1)), 0, 0, 1],
    ])
    ms = transpile.NativeGate("MS", (0, 1), (p0, p1, np.pi / 2)).matrix()
    assert np.allclose(ms, want, atol=1e-12)
    zz = transpile.NativeGate("ZZ", (0, 1), (0.8,)).matrix()
    assert np.allclose(zz, np.diag(np.exp(-0.4j * np.array([1, -1, -1, 1]))), atol=1e-12)
    gpi = transpile.NativeGate("GPI", (0,), (0.0,)).matrix()
    assert np.allclose(gpi, qcore.X)
    for kind in ("GPI", "GPI2", "VIRTZ"):
        u = transpile.NativeGate(kind, (0,), (0.7,)).matrix()
        assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-12)


def test_gate_set_lookup():
    assert transpile.gate_set_for("aria1") is ARIA
    assert transpile.gate_set_for("forte-ent1") is FORTE
    assert transpile.gate_set_for("ZZ") is FORTE
    with pytest.raises(KeyError):
        transpile.gate_set_for("brisbane")
    with pytest.raises(ValueError):
        transpile.NativeGateSet("bad", "CZ")


@pytest.mark.parametrize("gs", [ARIA, FORTE])
def test_single_cnot(gs):
    c = Circuit(2, (GateOp("CNOT", (0, 1)),))
    nc = transpile.lower(c, gs)
    assert transpile.gate_counts(nc)["two_qubit"] == 1
    assert transpile.verify_equivalence(c, nc) <= 1e-12
    assert {op.kind for op in nc.ops} <= {"GPI", "GPI2", "VIRTZ", gs.two_qubit}


@pytest.mark.parametrize("gs", [ARIA, FORTE])
def test_reversed_cnot(gs):
    c = Circuit(3, (GateOp("CNOT", (2, 0)),))
    assert transpile.verify_equivalence(c, transpile.lower(c, gs)) <= 1e-12


@settings(max_examples=20, deadline=None)
@given(theta=st.floats(-7, 7))
def test_single_ry(theta):
    c = Circuit(1, (GateOp("RY", (0,), (theta,)),))
    nc = transpile.lower(c)
    assert transpile.gate_counts(nc)["two_qubit"] == 0
    assert transpile.verify_equivalence(c, nc) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_synthesize_random_su2(seed):
    r = np.random.default_rng(seed)
    q, _ = np.linalg.qr(r.normal(size=(2, 2)) + 1j * r.normal(size=(2, 2)))
    gates = transpile.synthesize_1q(q, 0)
    v = np.eye(2, dtype=complex)
    for g in gates:
        v = g.matrix() @ v
    assert transpile.phase_invariant_distance(q, v) <= 1e-10
    assert len(gates) <= 5


def test_synthesize_identity_is_empty():
    assert transpile.synthesize_1q(np.eye(2), 0) == []


def test_empty_circuit_counts():
    nc = transpile.lower(Circuit(3))
    assert transpile.gate_counts(nc) == {"one_qubit": 0, "two_qubit": 0, "virtual_z": 0}


@pytest.mark.parametrize("rp", ["xy", "xxyy"])
@pytest.mark.parametrize("gs", [ARIA, FORTE])
def test_random_gsp_equivalence(gs, rp):
    r = np.random.default_rng(2024)
    for k in range(10):
        n = int(r.integers(2, 4))
        c = ansatz.build_gsp_circuit(ansatz.param_init(n, seed=int(r.integers(1 << 30))), rp=rp)
        nc = transpile.lower(c, gs)
        assert transpile.verify_equivalence(c, nc) <= 1e-8
        assert transpile.gate_counts(nc)["two_qubit"] == _two_qubit_formula(c)


def test_n2_gsp_count():
    c = ansatz.build_gsp_circuit(ansatz.param_init(2, seed=0))
    assert transpile.gate_counts(transpile.lower(c))["two_qubit"] == 7


@pytest.mark.parametrize("la,ls", [(1, 1), (2, 1), (1, 3)])
def test_linear_growth(la, ls):
    counts = []
    for n in range(2, 7):
        c = ansatz.build_gsp_circuit(ansatz.param_init(n, la, ls, seed=n))
        counts.append(transpile.gate_counts(transpile.lower(c, FORTE))["two_qubit"])
        # closed form (n-1) L_A + n + 2 n L_S
        assert counts[-1] == (n - 1) * la + n + 2 * n * ls
    assert np.all(np.diff(counts) == la + 1 + 2 * ls)


def test_phase_invariance_and_cnot_vs_identity():
    u = qcore.random_hermitian(2, np.random.default_rng(0))
    v = qcore.herm_exp(u, -1j)
    assert transpile.phase_invariant_distance(v, v) == pytest.approx(0.0, abs=1e-12)
    assert transpile.phase_invariant_distance(v, np.exp(1j * np.pi / 3) * v) <= 1e-12
    assert transpile.phase_invariant_distance(qcore.CNOT, np.eye(4)) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        transpile.phase_invariant_distance(np.eye(2), np.eye(4))


def test_verify_equivalence_qubit_mismatch():
    with pytest.raises(ValueError):
        transpile.verify_equivalence(Circuit(2), transpile.lower(Circuit(3)))


def test_lowering_is_deterministic():
    c = ansatz.build_gsp_circuit(ansatz.param_init(3, seed=5))
    a, b = transpile.lower(c, ARIA), transpile.lower(c, ARIA)
    assert a == b
    assert a.dumps() == b.dumps()
    assert a.source_hash != transpile.lower(ansatz.build_gsp_circuit(ansatz.param_init(3, seed=6))).source_hash


def test_measurements_rejected():
    c = ansatz.build_feedforward_variant(ansatz.param_init(2, seed=0))
    with pytest.raises(ValueError):
        transpile.lower(c)


def test_native_circuit_rejects_foreign_gate():
    with pytest.raises(ValueError):
        transpile.NativeCircuit(2, (transpile.NativeGate("ZZ", (0, 1), (0.1,)),), ARIA, "x")


def test_counts_csv():
    assert transpile.counts_csv({"one_qubit": 3, "two_qubit": 1, "virtual_z": 2}) == (
        "category,count\none_qubit,3\ntwo_qubit,1\nvirtual_z,2\n"
    )
