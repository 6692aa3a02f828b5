"""Variational Gibbs state preparation for the transverse-field Ising model."""

from .ansatz import Circuit, GateOp, ParamSet, build_gsp_circuit, param_init
from .sim import NoiseProfile, builtin_profiles, get_profile
from .thermo import GibbsTarget, TFIMParams, exact_gibbs, tfim_hamiltonian
from .vqa import ShotsPlan, evaluate_cost, spsa_minimize, train

__all__ = [
    "Circuit", "GateOp", "GibbsTarget", "NoiseProfile", "ParamSet", "ShotsPlan",
    "TFIMParams", "build_gsp_circuit", "builtin_profiles", "evaluate_cost",
    "exact_gibbs", "get_profile", "param_init", "spsa_minimize", "tfim_hamiltonian", "train",
]
