"""Variational free-energy cost and its SPSA minimization."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import qcore, thermo
from .ansatz import ParamSet, build_gsp_circuit, param_init
from .sim import (
    NOISELESS,
    Counts,
    NoiseProfile,
    as_rng,
    reduced_ancilla_state,
    reduced_system_state,
    run_density,
    run_statevector,
    sample_counts,
)
from .thermo import GibbsTarget, TFIMParams

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ShotsPlan:
    """Shots per cost evaluation; the ancilla uses the pooled Z+X budget."""

    system_x: int = 8192
    system_z: int = 8192
    ancilla_z: int = 16384


@dataclass(frozen=True)
class CostBreakdown:
    energy: float
    entropy: float
    beta: float

    @property
    def cost(self) -> float:
        return self.energy - self.entropy / self.beta


@dataclass
class OptResult:
    best_params: object
    best_cost: float
    cost_trace: np.ndarray
    iterations: int
    seed: int | None = None
    restart: int = 0
    fidelity: float | None = None
    a: float = float("nan")

    def trace_csv(self) -> str:
        rows = ["iteration,cost"]
        rows += [f"{i},{c:.17g}" for i, c in enumerate(self.cost_trace)]
        return "\n".join(rows) + "\n"


class OptimizationError(RuntimeError):
    pass


# -- estimators ----------------------------------------------------------------

def _bit_signs(counts: Counts) -> tuple[np.ndarray, np.ndarray]:
    """(+1/-1 matrix shots-weighted per distinct bitstring, weights)."""
    keys = sorted(counts.histogram)
    bits = np.array([[int(ch) for ch in k] for k in keys])
    weights = np.array([counts.histogram[k] for k in keys], dtype=float) / counts.shots
    return 1 - 2 * bits, weights


def estimate_energy(counts_x: Counts, counts_z: Counts, p: TFIMParams) -> float:
    """Shot estimate of the TFIM energy from X- and Z-basis system counts."""
    if counts_x.basis != "X" or counts_z.basis != "Z":
        raise ValueError("need X-basis and Z-basis counts")
    if counts_x.width != p.n or counts_z.width != p.n:
        raise ValueError(f"counts width must equal n={p.n}")
    sx, wx = _bit_signs(counts_x)
    sz, wz = _bit_signs(counts_z)
    xx = sum(float(wx @ (sx[:, i] * sx[:, j])) for i, j in p.bonds())
    z = float(np.sum(wz @ sz))
    return -0.5 * xx - p.h * z


def estimate_entropy(counts: Counts) -> float:
    """Plug-in Shannon entropy (nats) of the observed bitstring frequencies."""
    if counts.shots <= 0:
        raise ValueError("zero shots")
    return qcore.shannon_entropy(counts.frequencies())


# -- cost ------------------------------------------------------------------------

def prepare_full_state(params: ParamSet, noise: NoiseProfile = NOISELESS, rp: str = "xy") -> np.ndarray:
    """Statevector when noiseless (gate noise is zero), density matrix otherwise."""
    c = build_gsp_circuit(params, rp)
    if noise.p1 == 0 and noise.p2 == 0:
        return run_statevector(c)
    return run_density(c, noise)


def prepare_system_state(params: ParamSet, noise: NoiseProfile = NOISELESS, rp: str = "xy") -> np.ndarray:
    return reduced_system_state(prepare_full_state(params, noise, rp), params.n)


def _ancilla_diagonal(full: np.ndarray, n: int) -> np.ndarray:
    return np.clip(np.real(np.diag(reduced_ancilla_state(full, n))), 0.0, None)


def evaluate_cost(
    params: ParamSet,
    target: GibbsTarget,
    noise: NoiseProfile = NOISELESS,
    shots: ShotsPlan | None = ShotsPlan(),
    rng=None,
    rp: str = "xy",
) -> CostBreakdown:
    """Free-energy cost of the prepared state.

    With ``shots=None`` the energy is ``tr(H rho_S)`` and the entropy is the
    Shannon entropy of the ancilla's computational-basis diagonal (the
    infinite-shot limit of the sampled estimators).
    """
    if not target.beta > 0:
        raise ValueError("cost requires beta > 0")
    n = params.n
    full = prepare_full_state(params, noise, rp)
    if shots is None:
        rho_s = reduced_system_state(full, n)
        e = thermo.energy(rho_s, target.hamiltonian)
        s = qcore.shannon_entropy(_ancilla_diagonal(full, n))
        return CostBreakdown(e, s, target.beta)
    rng = as_rng(rng)
    cx = sample_counts(full, "X", "S", shots.system_x, rng, noise.p_spam)
    cz = sample_counts(full, "Z", "S", shots.system_z, rng, noise.p_spam)
    ca = sample_counts(full, "Z", "A", shots.ancilla_z, rng, noise.p_spam)
    return CostBreakdown(estimate_energy(cx, cz, target.params), estimate_entropy(ca), target.beta)


# -- SPSA --------------------------------------------------------------------------

@dataclass(frozen=True)
class SPSAGains:
    """``a_k = a / (k + 1 + A)**alpha`` and ``c_k = c / (k + 1)**gamma``.

    When ``a`` is None it is calibrated so that the first update has an
    infinity norm of about ``target_step`` radians.
    """

    a: float | None = None
    c: float = 0.2
    alpha: float = 0.602
    gamma: float = 0.101
    A: float = 10.0
    target_step: float = 0.2
    calibration_probes: int = 10


def _checked(f: Callable[[np.ndarray], float], x: np.ndarray) -> float:
    val = float(f(x))
    if not np.isfinite(val):
        raise OptimizationError(f"objective returned {val} at x={np.array2string(x, precision=4)}")
    return val


def calibrate_a(objective, x0: np.ndarray, gains: SPSAGains, rng: np.random.Generator) -> float:
    mags = []
    for _ in range(gains.calibration_probes):
        delta = rng.choice([-1.0, 1.0], size=x0.size)
        diff = _checked(objective, x0 + gains.c * delta) - _checked(objective, x0 - gains.c * delta)
        mags.append(abs(diff) / (2 * gains.c))
    mean = float(np.mean(mags))
    if mean == 0.0:
        return gains.target_step * (1 + gains.A) ** gains.alpha
    return gains.target_step * (1 + gains.A) ** gains.alpha / mean


def spsa_minimize(
    objective: Callable[[np.ndarray], float],
    init,
    max_iter: int = 100,
    gains: SPSAGains = SPSAGains(),
    rng=None,
) -> OptResult:
    """Minimize ``objective`` over real vectors with SPSA.

    ``init`` is a vector or a :class:`ParamSet`; the best iterate is returned
    in the same form. ``cost_trace[0]`` is the initial cost and
    ``cost_trace[k]`` the cost after update ``k``.
    """
    rng = as_rng(rng)
    is_params = isinstance(init, ParamSet)
    x = np.array(init.vector if is_params else init, dtype=float)
    a = gains.a if gains.a is not None else calibrate_a(objective, x, gains, rng)

    trace = [_checked(objective, x)]
    best_x, best = x.copy(), trace[0]
    for k in range(max_iter):
        ak = a / (k + 1 + gains.A) ** gains.alpha
        ck = gains.c / (k + 1) ** gains.gamma
        delta = rng.choice([-1.0, 1.0], size=x.size)
        f_plus = _checked(objective, x + ck * delta)
        f_minus = _checked(objective, x - ck * delta)
        grad = (f_plus - f_minus) / (2 * ck) * delta
        x = x - ak * grad
        val = _checked(objective, x)
        trace.append(val)
        if val < best:
            best, best_x = val, x.copy()
    best_params = init.with_vector(best_x) if is_params else best_x
    return OptResult(best_params, best, np.array(trace), max_iter, a=a)


def train(
    target: GibbsTarget,
    noise: NoiseProfile = NOISELESS,
    restarts: int = 1,
    seed: int = 0,
    *,
    max_iter: int = 100,
    shots: ShotsPlan | None = ShotsPlan(),
    select: str = "cost",
    ancilla_layers: int = 1,
    system_layers: int = 1,
    gains: SPSAGains = SPSAGains(),
    rp: str = "xy",
) -> OptResult:
    """Best-of-``restarts`` SPSA training from independent random initializations.

    ``select="fidelity"`` keeps the restart whose final state (prepared under
    ``noise``) has the highest fidelity with the exact Gibbs state;
    ``select="cost"`` keeps the lowest best cost.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if select not in ("cost", "fidelity"):
        raise ValueError("select must be 'cost' or 'fidelity'")
    gibbs = thermo.exact_gibbs(target) if select == "fidelity" else None
    n = target.params.n
    best = None
    for r, stream in enumerate(np.random.SeedSequence(seed).spawn(restarts)):
        init_seq, opt_seq, shot_seq = stream.spawn(3)
        init = param_init(n, ancilla_layers, system_layers, np.random.default_rng(init_seq))
        shot_rng = np.random.default_rng(shot_seq)

        def objective(x, _init=init):
            return evaluate_cost(_init.with_vector(x), target, noise, shots, shot_rng, rp).cost

        res = spsa_minimize(objective, init, max_iter, gains, np.random.default_rng(opt_seq))
        res.seed, res.restart = seed, r
        if gibbs is not None:
            rho_s = prepare_system_state(res.best_params, noise, rp)
            res.fidelity = qcore.uhlmann_fidelity(rho_s, gibbs)
            better = best is None or res.fidelity > best.fidelity
        else:
            better = best is None or res.best_cost < best.best_cost
        log.debug("restart %d: best_cost=%.6g fidelity=%s", r, res.best_cost, res.fidelity)
        if better:
            best = res
    return best
