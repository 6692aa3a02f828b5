import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gibbsprep import qcore, sim, thermo, verify
from gibbsprep.sim import Counts
from gibbsprep.thermo import GibbsTarget, TFIMParams


def test_default_grid_shape():
    g = verify.default_grid()
    assert g.size == 61
    assert g[0] == 1e-8
    assert g[1] == pytest.approx(0.05) and g[-1] == pytest.approx(6.0)
    assert np.all(np.diff(g) > 0)


@pytest.mark.parametrize("n,count", [(1, 3), (2, 9), (3, 27)])
def test_settings_count(n, count):
    s = verify.tomography_settings(n)
    assert len(s) == count == len(set(s))
    if n == 1:
        assert s == ["X", "Y", "Z"]


def test_zero_state_z_setting_all_zeros():
    data = verify.tomography_collect(qcore.projector(qcore.ket("0")), 100, rng=0)
    assert data.counts["Z"].histogram == {"0": 100}
    assert set(data.distributions) == {"X", "Y", "Z"}


def test_incomplete_settings_rejected():
    with pytest.raises(ValueError):
        verify.TomographyData(1, 10, {"Z": np.array([1.0, 0.0])})


def test_mixed_shot_budgets_rejected():
    counts = {
        "X": Counts("X", 10, {"0": 10}),
        "Y": Counts("Y", 10, {"0": 10}),
        "Z": Counts("Z", 20, {"0": 20}),
    }
    with pytest.raises(ValueError):
        verify.from_counts(counts)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pauli_expectations_match_trace_oracle(n):
    rho = qcore.random_density_matrix(n, np.random.default_rng(n))
    exp = verify.pauli_expectations(verify.tomography_collect(rho, None))
    assert len(exp) == 4**n
    for label in ("".join(p) for p in itertools.product("IXYZ", repeat=n)):
        want = np.real(np.trace(rho @ qcore.pauli_string(label)))
        assert exp[label] == pytest.approx(want, abs=1e-12)


@settings(max_examples=15, deadline=None)
@given(n=st.integers(1, 3), seed=st.integers(0, 2**31 - 1), rank=st.integers(1, 8))
def test_exact_moment_round_trip(n, seed, rank):
    rho = qcore.random_density_matrix(n, np.random.default_rng(seed), rank=min(rank, 2**n))
    rho_hat = verify.reconstruct(verify.tomography_collect(rho, None))
    assert np.max(np.abs(rho_hat - rho)) <= 1e-10


def test_maximally_mixed_at_1024_shots():
    rho = np.eye(2) / 2
    rho_hat = verify.reconstruct(verify.tomography_collect(rho, 1024, rng=7))
    assert qcore.uhlmann_fidelity(rho_hat, rho) >= 0.99
    assert np.max(np.abs(rho_hat - rho)) < 0.05


def test_unphysical_data_still_valid_state():
    n = 2
    counts = {s: Counts(s, 50, {"00": 50}) for s in verify.tomography_settings(n)}
    rho_hat = verify.reconstruct(verify.from_counts(counts))
    assert qcore.is_density_matrix(rho_hat)
    assert np.trace(rho_hat).real == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_project_psd_idempotent_trace_preserving(seed):
    r = np.random.default_rng(seed)
    a = qcore.random_hermitian(2, r)
    a = a / np.trace(a).real if abs(np.trace(a)) > 1e-3 else a + np.eye(4)
    p = verify.project_psd(a)
    assert np.trace(p).real == pytest.approx(1.0, abs=1e-12)
    assert np.min(np.linalg.eigvalsh(p)) >= -1e-12
    assert np.allclose(verify.project_psd(p), p, atol=1e-12)


@pytest.mark.parametrize(
    "hist,frac", [({"00": 512, "11": 512}, 1.0), ({"01": 100}, 0.0), ({"00": 90, "01": 10}, 0.9)]
)
def test_parity_examples(hist, frac):
    c = Counts("Z", sum(hist.values()), hist)
    assert verify.parity_even_fraction(c) == pytest.approx(frac)


def test_parity_zero_shots():
    with pytest.raises(ValueError):
        verify.parity_even_fraction(Counts("Z", 0, {}))


def test_sweep_self_fidelity():
    p = TFIMParams(2, 1.0)
    rho = thermo.exact_gibbs(GibbsTarget(p, 1.0))
    res = verify.beta_sweep(rho, p, 1.0, [0.5, 1.0, 2.0])
    assert res.beta_star == 1.0 and res.delta_beta == 0.0
    assert res.fidelities[1] == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("n", [2, 3])
def test_sweep_maximally_mixed_picks_smallest(n):
    p = TFIMParams(n, 1.0)
    res = verify.beta_sweep(np.eye(2**n) / 2**n, p, 1.0, np.linspace(0.0, 3.0, 301))
    assert res.beta_star == 0.0
    assert np.all(np.diff(res.fidelities) <= 1e-12)


def test_sweep_tie_rule_prefers_smallest():
    # beta=0 and beta=1e-13 give fidelities equal to within round-off
    p = TFIMParams(2, 1.0)
    rho = np.eye(4) / 4
    res = verify.beta_sweep(rho, p, 0.0, [0.0, 1e-13, 1.0])
    assert res.beta_star == 0.0


@pytest.mark.parametrize("grid", [[], [1.0, 1.0], [2.0, 1.0], [-0.1, 1.0]])
def test_sweep_bad_grid(grid):
    with pytest.raises(ValueError):
        verify.beta_sweep(np.eye(4) / 4, TFIMParams(2, 1.0), 1.0, grid)


def test_sweep_csv_layout():
    p = TFIMParams(2, 1.0)
    res = verify.beta_sweep(np.eye(4) / 4, p, 1.0)
    lines = res.to_csv().splitlines()
    assert lines[0] == "beta,fidelity"
    assert len(lines) == 1 + 61 + 1
    assert lines[-1].startswith("# beta_true=1 ")


@pytest.mark.parametrize("beta", [0.7, 2.3, 4.1])
def test_sweep_refinement_continuity(beta):
    p = TFIMParams(2, 1.0)
    rho = 0.9 * thermo.exact_gibbs(GibbsTarget(p, beta)) + 0.1 * np.eye(4) / 4
    coarse = np.linspace(0.0, 6.0, 31)
    fine = np.linspace(0.0, 6.0, 61)
    a = verify.beta_sweep(rho, p, beta, coarse).beta_star
    b = verify.beta_sweep(rho, p, beta, fine).beta_star
    assert abs(a - b) <= coarse[1] - coarse[0] + 1e-12


def test_tomography_save_load_round_trip(tmp_path):
    rho = qcore.random_density_matrix(2, np.random.default_rng(1))
    data = verify.tomography_collect(rho, 256, rng=3)
    paths = data.save(tmp_path)
    assert sorted(p.name for p in paths) == sorted(f"tomo_{s}.txt" for s in verify.tomography_settings(2))
    back = verify.TomographyData.load(tmp_path)
    assert back.shots == 256
    for s in data.distributions:
        assert np.array_equal(back.distributions[s], data.distributions[s])
    assert np.allclose(verify.reconstruct(back), verify.reconstruct(data))


def test_exact_data_cannot_be_saved(tmp_path):
    with pytest.raises(ValueError):
        verify.tomography_collect(np.eye(2) / 2, None).save(tmp_path)


def test_validate_exact_gibbs_state():
    target = GibbsTarget(TFIMParams(2, 1.0), 1.0)
    v = verify.validate_state(thermo.exact_gibbs(target), target, tomo_shots=4096, rng=11)
    assert v.fidelity > 0.99
    assert 0.0 <= v.even_parity_fraction <= 1.0
    assert abs(v.sweep.delta_beta) <= 0.2


def test_spam_lowers_fidelity_of_pure_state():
    rho = qcore.projector(qcore.ket("00"))
    clean = verify.reconstruct(verify.tomography_collect(rho, None))
    noisy = verify.reconstruct(verify.tomography_collect(rho, None, p_spam=0.05))
    assert qcore.uhlmann_fidelity(clean, rho) == pytest.approx(1.0, abs=1e-10)
    assert qcore.uhlmann_fidelity(noisy, rho) < 0.95


def test_delta_beta_curve_noiseless_small():
    budget = verify.TrainingBudget(restarts=3, max_iter=60, shots=None, tomo_shots=2048)
    curve = verify.delta_beta_curve(sim.NOISELESS, TFIMParams(2, 1.0), [1e-8, 1.0], budget, seed=0)
    step = verify.default_grid()[2] - verify.default_grid()[1]
    assert [b for b, _ in curve] == [1e-8, 1.0]
    for _, db in curve:
        assert abs(db) <= 2 * step


def test_delta_beta_curve_rejects_nonpositive_beta():
    with pytest.raises(ValueError):
        verify.delta_beta_curve(sim.NOISELESS, TFIMParams(2, 1.0), [0.0])
