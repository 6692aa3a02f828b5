import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gibbsprep import ansatz, qcore, sim
from gibbsprep.ansatz import GateOp, ParamSet

ZZ = qcore.kron(qcore.Z, qcore.Z)


def random_params(n, seed, la=1, ls=1):
    return ansatz.param_init(n, la, ls, seed)


def test_param_init_shapes_and_determinism():
    p = ansatz.param_init(4, 1, 1, seed=3)
    assert p.theta.shape == (8,) and p.phi.shape == (8,)
    p = ansatz.param_init(2, 2, 1, seed=3)
    assert p.theta.shape == (8,) and p.phi.shape == (4,)
    a, b = ansatz.param_init(3, seed=11), ansatz.param_init(3, seed=11)
    assert np.array_equal(a.vector, b.vector)
    big = ansatz.param_init(6, 3, 3, seed=0).vector
    assert np.all(np.abs(big) <= np.pi)
    with pytest.raises(ValueError):
        ansatz.param_init(1)


def test_paramset_roundtrip_and_validation():
    p = random_params(3, 0)
    assert np.array_equal(ParamSet.from_dict(p.to_dict()).vector, p.vector)
    with pytest.raises(ValueError):
        ParamSet(2, np.zeros(3), np.zeros(4))


def test_gateop_arity():
    with pytest.raises(ValueError):
        GateOp("CNOT", (0,))
    with pytest.raises(ValueError):
        GateOp("RY", (0,), ())
    with pytest.raises(ValueError):
        GateOp("RP", (1, 1), (0.0, 0.0))


def test_ancilla_unitary_structure():
    c = ansatz.build_ancilla_unitary(3, 1, np.arange(6.0))
    kinds = [(op.kind, op.targets) for op in c.ops]
    assert kinds == [
        ("RY", (0,)), ("RY", (1,)), ("RY", (2,)),
        ("CNOT", (0, 1)), ("CNOT", (1, 2)),
        ("RY", (0,)), ("RY", (1,)), ("RY", (2,)),
    ]
    assert [op.angles[0] for op in c.ops if op.kind == "RY"] == [0, 1, 2, 3, 4, 5]
    assert ansatz.build_ancilla_unitary(4, 3, np.zeros(24)).count("CNOT") == 3 * 3
    with pytest.raises(ValueError):
        ansatz.build_ancilla_unitary(3, 1, np.zeros(5))


def test_ancilla_zero_angles_identity():
    c = ansatz.build_ancilla_unitary(2, 1, np.zeros(4))
    assert np.allclose(sim.run_statevector(c), qcore.ket("0000"))


def test_ancilla_bell_state():
    # hand application: RY(pi/2) on a1, CNOT(a1, a2)
    expected = qcore.kron(qcore.CNOT) @ qcore.kron(ansatz.ry(np.pi / 2), np.eye(2)) @ qcore.ket("00")
    assert np.allclose(expected, (qcore.ket("00") + qcore.ket("11")) / np.sqrt(2))
    c = ansatz.build_ancilla_unitary(2, 1, [np.pi / 2, 0, 0, 0])
    psi = sim.run_statevector(c)
    assert np.allclose(psi, np.kron(expected, qcore.ket("00")))


def test_transversal_cnots():
    c = ansatz.build_transversal_cnots(2)
    assert [(op.kind, op.targets) for op in c.ops] == [("CNOT", (0, 2)), ("CNOT", (1, 3))]
    assert ansatz.build_transversal_cnots(4).count("CNOT") == 4
    alpha, beta = 0.6, 0.8
    anc = alpha * qcore.ket("00") + beta * qcore.ket("11")
    u = ansatz.circuit_unitary(c)
    out = u @ np.kron(anc, qcore.ket("00"))
    assert np.allclose(out, alpha * qcore.ket("0000") + beta * qcore.ket("1111"))


@pytest.mark.parametrize("rp", ["xy", "xxyy"])
def test_rp_gate_contract(rp, rng):
    assert np.allclose(ansatz.rp_gate(0, 0, rp), np.eye(4))
    for _ in range(10):
        a, b = rng.uniform(-10, 10, 2)
        g = ansatz.rp_gate(a, b, rp)
        assert np.linalg.norm(g @ ZZ - ZZ @ g) < 1e-12
        assert np.allclose(g @ g.conj().T, np.eye(4), atol=1e-12)


def test_rp_xy_reaches_real_parity_rotations():
    # even subspace: rotation by a+b; odd subspace: rotation by b-a
    a, b = 0.4, 0.9
    g = ansatz.rp_gate(a, b)
    assert np.allclose(g.imag, 0, atol=1e-15)
    out = g @ qcore.ket("00")
    assert np.allclose(out, np.cos((a + b) / 2) * qcore.ket("00") + np.sin((a + b) / 2) * qcore.ket("11"))


def test_system_unitary_structure():
    c = ansatz.build_system_unitary(4, 1, np.zeros(8))
    assert c.count("RP") == 4
    assert c.ops[-1].targets == (7, 4)
    c2 = ansatz.build_system_unitary(2, 1, np.zeros(4))
    assert [op.targets for op in c2.ops] == [(2, 3), (3, 2)]
    assert np.allclose(ansatz.circuit_unitary(c), np.eye(256))


@pytest.mark.parametrize("n,cnot,rp,ry", [(2, 3, 2, 4), (3, 5, 3, 6), (4, 7, 4, 8)])
def test_gsp_gate_counts(n, cnot, rp, ry):
    c = ansatz.build_gsp_circuit(random_params(n, 0))
    # count formula against direct enumeration
    assert (c.count("CNOT"), c.count("RP"), c.count("RY")) == (cnot, rp, ry)
    assert cnot == (n - 1) * 1 + n and rp == n and ry == n * 2


def test_gsp_zero_params_identity():
    p = ParamSet(3, np.zeros(6), np.zeros(6))
    assert np.allclose(sim.run_statevector(ansatz.build_gsp_circuit(p)), qcore.ket("0" * 6))


def test_feedforward_variant_structure():
    c = ansatz.build_feedforward_variant(random_params(2, 0))
    assert c.count("MEASURE_Z") == 2 and c.count("CLASSICAL_X") == 2
    rho = sim.run_density(ansatz.build_feedforward_variant(ParamSet(2, np.zeros(4), np.zeros(4))))
    assert np.isclose(rho[0, 0].real, 1)


@pytest.mark.parametrize("n", [2, 3])
def test_deferred_measurement_equivalence(n):
    for seed in range(20):
        p = random_params(n, seed)
        a = sim.reduced_system_state(sim.run_density(ansatz.build_gsp_circuit(p)))
        b = sim.reduced_system_state(sim.run_density(ansatz.build_feedforward_variant(p)))
        assert qcore.trace_distance(a, b) <= 1e-10


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 3), st.sampled_from(["xy", "xxyy"]))
def test_compiled_unitary_properties(seed, n, rp):
    p = random_params(n, seed)
    u = ansatz.circuit_unitary(ansatz.build_gsp_circuit(p, rp))
    assert np.allclose(u @ u.conj().T, np.eye(4**n), atol=1e-10)
    i = np.random.default_rng(seed).integers(p.theta.size)
    theta = p.theta.copy()
    theta[i] += 4 * np.pi
    u2 = ansatz.circuit_unitary(ansatz.build_gsp_circuit(ParamSet(n, theta, p.phi), rp))
    assert np.allclose(u, u2, atol=1e-10)
    us = ansatz.circuit_unitary(ansatz.build_system_unitary(n, 1, p.phi, rp))
    parity = qcore.embed(qcore.kron(*[qcore.Z] * n), list(range(n, 2 * n)), 2 * n)
    assert np.allclose(us @ parity, parity @ us, atol=1e-10)


def test_text_format_roundtrip():
    p = random_params(3, 5)
    for c in (ansatz.build_gsp_circuit(p, "xxyy"), ansatz.build_feedforward_variant(p)):
        text = ansatz.dumps(c)
        back = ansatz.loads(text)
        assert back == c
        assert ansatz.dumps(back) == text
    line = ansatz.dumps(ansatz.build_gsp_circuit(p)).splitlines()[1]
    kind, q, angle = line.split()
    assert kind == "RY" and float(angle) == p.theta[0]
