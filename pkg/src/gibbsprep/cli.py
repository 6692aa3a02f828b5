"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 invalid input or config,
4 file-system error, 5 optimizer failure, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import ansatz, qcore, runner, sim, thermo, transpile, verify, vqa
from .thermo import GibbsTarget, TFIMParams

EXIT_INPUT, EXIT_IO, EXIT_OPT = 3, 4, 5


def _target(args) -> GibbsTarget:
    return GibbsTarget(TFIMParams(args.n, args.h), args.beta)


def _out(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_trained(path) -> tuple[dict, ansatz.ParamSet]:
    doc = json.loads(Path(path).read_text())
    return doc, ansatz.ParamSet.from_dict(doc["params"])


def cmd_exact_gibbs(args) -> None:
    t = _target(args)
    print("eigenvalues:", " ".join(format(e, ".17g") for e in t.spectrum.eigenvalues))
    print("Z:", format(thermo.partition_function(t), ".17g"))
    diag = np.real(np.diag(thermo.exact_gibbs(t)))
    print("gibbs_diagonal:", " ".join(format(d, ".17g") for d in diag))


def cmd_train(args) -> None:
    t = _target(args)
    profile = sim.get_profile(args.profile)
    shots = None if args.exact else vqa.ShotsPlan()
    res = vqa.train(
        t, profile, args.restarts, args.seed, max_iter=args.iterations, shots=shots,
        select="fidelity" if args.select_fidelity else "cost",
    )
    rho_s = vqa.prepare_system_state(res.best_params, profile)
    fid = qcore.uhlmann_fidelity(rho_s, thermo.exact_gibbs(t))
    out = _out(args)
    doc = {
        "profile": profile.name, "n": args.n, "h": args.h, "beta": args.beta,
        "seed": args.seed, "restart": res.restart, "best_cost": res.best_cost,
        "params": res.best_params.to_dict(),
    }
    (out / "params.json").write_text(json.dumps(doc, indent=1))
    (out / "cost_trace.csv").write_text(res.trace_csv())
    print(f"best_cost={res.best_cost:.10g} fidelity={fid:.10g} -> {out / 'params.json'}")


def cmd_prepare(args) -> None:
    doc, params = _load_trained(args.params)
    profile = sim.get_profile(args.profile or doc["profile"])
    t = GibbsTarget(TFIMParams(doc["n"], doc["h"]), doc["beta"])
    out = _out(args)
    (out / "circuit.txt").write_text(ansatz.dumps(ansatz.build_gsp_circuit(params)))
    rho_s = vqa.prepare_system_state(params, profile)
    np.save(out / "rho_S.npy", rho_s)
    print(f"fidelity={qcore.uhlmann_fidelity(rho_s, thermo.exact_gibbs(t)):.10g} -> {out / 'rho_S.npy'}")


def cmd_tomo(args) -> None:
    doc, params = _load_trained(args.params)
    profile = sim.get_profile(args.profile or doc["profile"])
    t = GibbsTarget(TFIMParams(doc["n"], doc["h"]), doc["beta"])
    rho_s = vqa.prepare_system_state(params, profile)
    data = verify.tomography_collect(rho_s, args.shots, args.seed, profile.p_spam)
    out = _out(args)
    data.save(out)
    rho_hat = verify.reconstruct(data)
    np.save(out / "rho_hat.npy", rho_hat)
    print(f"settings={len(data.distributions)} fidelity={qcore.uhlmann_fidelity(rho_hat, thermo.exact_gibbs(t)):.10g}")


def cmd_beta_sweep(args) -> None:
    data = verify.TomographyData.load(args.tomo_dir)
    rho_hat = verify.reconstruct(data)
    res = verify.beta_sweep(rho_hat, TFIMParams(data.n, args.h), args.beta)
    out = _out(args)
    path = out / f"sweep_{data.n}_{args.h:g}_{args.beta:g}.csv"
    path.write_text(res.to_csv())
    print(f"beta_star={res.beta_star:.10g} delta_beta={res.delta_beta:.10g} -> {path}")


def cmd_gate_count(args) -> None:
    if args.circuit:
        c = ansatz.loads(Path(args.circuit).read_text())
    else:
        c = ansatz.build_gsp_circuit(ansatz.param_init(args.n, seed=args.seed))
    gs = transpile.gate_set_for(args.gateset or args.profile or "aria")
    nc = transpile.lower(c, gs)
    text = transpile.counts_csv(transpile.gate_counts(nc))
    if args.out:
        out = _out(args)
        (out / "gate_counts.csv").write_text(text)
        (out / "native_circuit.txt").write_text(nc.dumps())
    sys.stdout.write(text)


def _config(args) -> runner.ExperimentConfig:
    if not args.config:
        raise runner.ConfigError("--config is required")
    cfg = runner.ExperimentConfig.load(args.config)
    if args.seed_given:
        cfg.master_seed = args.seed
    if args.profile:
        cfg.device_profile = args.profile
    if args.out:
        cfg.output_directory = args.out
    cfg.__post_init__()
    return cfg


def cmd_run(args) -> None:
    cfg = _config(args)
    records = runner.run_grid(cfg, workers=args.workers)
    paths = runner.report(records, cfg.output_directory)
    failed = sum(r.error is not None for r in records)
    print(f"{len(records)} records ({failed} failed); wrote {', '.join(p.name for p in paths[:1] + paths[-1:])}")


def cmd_report(args) -> None:
    out = Path(args.out or (runner.ExperimentConfig.load(args.config).output_directory if args.config else "."))
    records = runner.load_records(out)
    paths = runner.report(records, out)
    print(f"{len(records)} records -> {len(paths)} files in {out}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (JSON)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", help="output directory")
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--profile", default=None, help="device noise profile")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="gibbsprep", parents=[common],
                                description="Variational Gibbs state preparation for the TFIM")
    sub = p.add_subparsers(dest="command", required=True)

    def model(sp, beta=True):
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--h", type=float, required=True)
        if beta:
            sp.add_argument("--beta", type=float, required=True)

    sp = sub.add_parser("exact-gibbs", parents=[common], help="spectrum, Z and Gibbs diagonal")
    model(sp)
    sp.set_defaults(func=cmd_exact_gibbs)

    sp = sub.add_parser("train", parents=[common], help="SPSA training")
    model(sp)
    sp.add_argument("--restarts", type=int, default=1)
    sp.add_argument("--iterations", type=int, default=100)
    sp.add_argument("--exact", action="store_true", help="infinite-shot cost")
    sp.add_argument("--select-fidelity", action="store_true",
                    help="keep the restart with the best fidelity to the exact Gibbs state")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("prepare", parents=[common], help="prepare the trained state")
    sp.add_argument("--params", required=True)
    sp.set_defaults(func=cmd_prepare)

    sp = sub.add_parser("tomo", parents=[common], help="state tomography of the trained state")
    sp.add_argument("--params", required=True)
    sp.add_argument("--shots", type=int, default=1024)
    sp.set_defaults(func=cmd_tomo)

    sp = sub.add_parser("beta-sweep", parents=[common], help="fidelity vs Gibbs beta")
    sp.add_argument("--tomo-dir", required=True)
    sp.add_argument("--h", type=float, required=True)
    sp.add_argument("--beta", type=float, required=True)
    sp.set_defaults(func=cmd_beta_sweep)

    sp = sub.add_parser("gate-count", parents=[common], help="native gate counts")
    sp.add_argument("--circuit", help="circuit text file")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--gateset", choices=["ms", "zz", "aria", "forte"])
    sp.set_defaults(func=cmd_gate_count)

    sp = sub.add_parser("run", parents=[common], help="run the full experiment grid")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("report", parents=[common], help="regenerate CSV reports")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = 0
    if args.profile is None and args.command in ("train",):
        args.profile = "noiseless"
    try:
        args.func(args)
    except (runner.ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except vqa.OptimizationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OPT
    return 0


if __name__ == "__main__":
    sys.exit(main())
