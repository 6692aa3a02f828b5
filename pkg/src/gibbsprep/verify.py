"""Tomographic verification of prepared states and the beta-shift analysis."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import qcore, thermo
from .ansatz import ParamSet
from .sim import (
    NOISELESS,
    Counts,
    NoiseProfile,
    as_rng,
    basis_probabilities,
    readout_channel,
    sample_from_probabilities,
)
from .thermo import GibbsTarget, TFIMParams

TIE_ATOL = 1e-12


def default_grid() -> np.ndarray:
    return np.concatenate([[1e-8], np.linspace(0.05, 6.0, 60)])


def tomography_settings(n: int) -> list[str]:
    return ["".join(s) for s in itertools.product("XYZ", repeat=n)]


@dataclass
class TomographyData:
    """Per-setting outcome distributions.

    ``counts`` is None for exact-moment data, where ``distributions`` holds
    the true outcome probabilities.
    """

    n: int
    shots: int | None
    distributions: dict[str, np.ndarray]
    counts: dict[str, Counts] | None = None

    def __post_init__(self):
        if set(self.distributions) != set(tomography_settings(self.n)):
            raise ValueError(f"need all {3**self.n} settings")

    def save(self, directory) -> list[Path]:
        if self.counts is None:
            raise ValueError("exact-moment data has no counts to save")
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for setting, c in sorted(self.counts.items()):
            path = directory / f"tomo_{setting}.txt"
            path.write_text(c.dumps())
            paths.append(path)
        return paths

    @classmethod
    def load(cls, directory) -> "TomographyData":
        counts = {}
        for path in sorted(Path(directory).glob("tomo_*.txt")):
            counts[path.stem[len("tomo_"):]] = Counts.loads(path.read_text())
        if not counts:
            raise FileNotFoundError(f"no tomo_*.txt files in {directory}")
        return from_counts(counts)


def from_counts(counts: dict[str, Counts]) -> TomographyData:
    n = len(next(iter(counts)))
    shots = {c.shots for c in counts.values()}
    if len(shots) != 1:
        raise ValueError("settings must share one shot budget")
    dists = {s: c.frequencies() for s, c in counts.items()}
    return TomographyData(n, shots.pop(), dists, dict(counts))


def tomography_collect(
    rho: np.ndarray, shots_per_setting: int | None = 1024, rng=None, p_spam: float = 0.0
) -> TomographyData:
    """Measure every qubit in each of the ``3**n`` local Pauli bases.

    ``shots_per_setting=None`` returns exact outcome probabilities.
    """
    n = qcore.num_qubits(rho)
    rng = as_rng(rng)
    dists, counts = {}, {}
    for setting in tomography_settings(n):
        probs = readout_channel(basis_probabilities(rho, setting), p_spam)
        if shots_per_setting is None:
            dists[setting] = probs
        else:
            c = sample_from_probabilities(probs, shots_per_setting, rng, basis=setting)
            counts[setting] = c
            dists[setting] = c.frequencies()
    return TomographyData(n, shots_per_setting, dists, counts or None)


def _parity_signs(n: int, positions: Sequence[int]) -> np.ndarray:
    idx = np.arange(2**n)
    signs = np.ones(2**n)
    for q in positions:
        signs *= 1 - 2 * ((idx >> (n - 1 - q)) & 1)
    return signs


def pauli_expectations(data: TomographyData) -> dict[str, float]:
    """Every ``4**n`` Pauli expectation; identity positions are marginalized
    from the parent setting that measures them in Z."""
    n = data.n
    out = {}
    for label in ("".join(p) for p in itertools.product("IXYZ", repeat=n)):
        parent = label.replace("I", "Z")
        positions = [i for i, ch in enumerate(label) if ch != "I"]
        out[label] = float(data.distributions[parent] @ _parity_signs(n, positions))
    return out


def project_psd(mat: np.ndarray) -> np.ndarray:
    """Clip negative eigenvalues and renormalize to unit trace."""
    w, v = np.linalg.eigh((mat + mat.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        return np.eye(mat.shape[0], dtype=complex) / mat.shape[0]
    w = w / w.sum()
    rho = (v * w) @ v.conj().T
    return (rho + rho.conj().T) / 2


def linear_inversion(data: TomographyData) -> np.ndarray:
    n = data.n
    rho = np.zeros((2**n, 2**n), dtype=complex)
    for label, value in pauli_expectations(data).items():
        rho += value * qcore.pauli_string(label)
    return rho / 2**n


def reconstruct(data: TomographyData) -> np.ndarray:
    if data.shots is not None and data.shots <= 0:
        raise ValueError("zero shots")
    return project_psd(linear_inversion(data))


def parity_even_fraction(counts: Counts) -> float:
    if counts.shots <= 0:
        raise ValueError("zero shots")
    even = sum(c for b, c in counts.histogram.items() if b.count("1") % 2 == 0)
    return even / counts.shots


# -- beta sweep -------------------------------------------------------------------

@dataclass
class BetaSweepResult:
    beta_true: float
    grid: np.ndarray
    fidelities: np.ndarray

    @property
    def beta_star(self) -> float:
        best = self.fidelities.max()
        idx = int(np.flatnonzero(self.fidelities >= best - TIE_ATOL)[0])
        return float(self.grid[idx])

    @property
    def delta_beta(self) -> float:
        return self.beta_true - self.beta_star

    def to_csv(self) -> str:
        rows = ["beta,fidelity"]
        rows += [f"{b:.17g},{f:.17g}" for b, f in zip(self.grid, self.fidelities)]
        rows.append(
            f"# beta_true={self.beta_true:.17g} beta_star={self.beta_star:.17g} "
            f"delta_beta={self.delta_beta:.17g}"
        )
        return "\n".join(rows) + "\n"


def beta_sweep(
    rho_exp: np.ndarray, params: TFIMParams, beta_true: float, grid: Sequence[float] | None = None
) -> BetaSweepResult:
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty grid")
    if np.any(np.diff(grid) <= 0) or grid[0] < 0:
        raise ValueError("grid must be strictly increasing and nonnegative")
    base = GibbsTarget(params, float(grid[0]))
    fids = np.array(
        [qcore.uhlmann_fidelity(rho_exp, thermo.exact_gibbs(base.with_beta(float(b)))) for b in grid]
    )
    return BetaSweepResult(float(beta_true), grid, fids)


# -- end-to-end validation ----------------------------------------------------------

@dataclass
class Validation:
    rho_hat: np.ndarray
    fidelity: float
    even_parity_fraction: float
    sweep: BetaSweepResult
    tomography: TomographyData


def validate_state(
    rho_s: np.ndarray,
    target: GibbsTarget,
    noise: NoiseProfile = NOISELESS,
    tomo_shots: int = 1024,
    rng=None,
    grid: Sequence[float] | None = None,
) -> Validation:
    """Tomograph a prepared system state and score it against the exact Gibbs state."""
    data = tomography_collect(rho_s, tomo_shots, rng, noise.p_spam)
    rho_hat = reconstruct(data)
    fid = qcore.uhlmann_fidelity(rho_hat, thermo.exact_gibbs(target))
    z_setting = "Z" * target.params.n
    if data.counts is not None:
        parity = parity_even_fraction(data.counts[z_setting])
    else:
        d = data.distributions[z_setting]
        parity = float(d @ (_parity_signs(target.params.n, range(target.params.n)) > 0))
    sweep = beta_sweep(rho_hat, target.params, target.beta, grid)
    return Validation(rho_hat, fid, parity, sweep, data)


@dataclass(frozen=True)
class TrainingBudget:
    restarts: int = 5
    max_iter: int = 100
    shots: object = "default"
    tomo_shots: int = 1024
    select: str = "fidelity"


def delta_beta_curve(
    profile: NoiseProfile,
    params: TFIMParams,
    betas: Sequence[float],
    budget: TrainingBudget = TrainingBudget(),
    seed: int = 0,
    grid: Sequence[float] | None = None,
) -> list[tuple[float, float]]:
    """Train under noise, prepare, tomograph and sweep for each beta."""
    from .vqa import ShotsPlan, prepare_system_state, train

    shots = ShotsPlan() if budget.shots == "default" else budget.shots
    out = []
    for k, beta in enumerate(betas):
        if not beta > 0:
            raise ValueError("beta values must be > 0")
        target = GibbsTarget(params, float(beta))
        train_seed, tomo_seed = np.random.SeedSequence([seed, k]).generate_state(2)
        res = train(
            target, profile, budget.restarts, int(train_seed),
            max_iter=budget.max_iter, shots=shots, select=budget.select,
        )
        rho_s = prepare_system_state(res.best_params, profile)
        v = validate_state(rho_s, target, profile, budget.tomo_shots, int(tomo_seed), grid)
        out.append((float(beta), v.sweep.delta_beta))
    return out
