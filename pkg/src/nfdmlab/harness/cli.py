"""Command line front end.

Subcommands:

- ``run``       one sweep point, report printed (optionally emitted to files)
- ``sweep``     one axis sweep; writes CSV, JSON mirror, and a PNG per curve
- ``validate``  quick invariant/oracle suite with one pass/fail line each
- ``oracle``    regenerate fine-step ODE scattering references
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from nfdmlab import __version__
from nfdmlab.harness.config import SWEEP_AXES, ExperimentConfig, load_config, preset
from nfdmlab.harness.reporting import emit_curve
from nfdmlab.harness.runner import find_peak, run_point, run_sweep


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--preset", choices=("paper", "fast"), default="paper")
    p.add_argument("--config", type=Path, help="JSON or key=value config file")
    p.add_argument("--system", choices=("nfdm", "edc", "dbp", "nfdm_awgn"))
    p.add_argument("--n-burst", type=int, dest="n_burst")
    p.add_argument("--n-guard", type=int, dest="n_guard")
    p.add_argument("--oversampling", type=int)
    p.add_argument("--power", type=float, dest="launch_power_dbm",
                   help="launch power (dBm)")
    p.add_argument("--precompensation", action="store_true", default=None)
    p.add_argument("--window", type=float, dest="window_fraction",
                   help="windowed FNFT width as a fraction of the frame")
    p.add_argument("--no-noise", action="store_true")
    p.add_argument("--bursts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--fiber-length-km", type=float, dest="fiber_length_km")


def _build_config(args) -> ExperimentConfig:
    cfg = preset(args.preset)
    if args.config:
        cfg = load_config(args.config, base=cfg)
    updates = {}
    for name in ("system", "n_burst", "n_guard", "oversampling",
                 "launch_power_dbm", "window_fraction", "bursts", "seed"):
        val = getattr(args, name, None)
        if val is not None:
            updates[name] = val
    if args.precompensation:
        updates["precompensation"] = True
    if args.no_noise:
        updates["noise"] = False
    if args.fiber_length_km is not None:
        updates["fiber_length"] = args.fiber_length_km * 1e3
    return cfg.replace(**updates) if updates else cfg


def _cmd_run(args) -> int:
    cfg = _build_config(args)
    report = run_point(cfg, workers=args.workers)
    print(f"system={cfg.system} N_b={cfg.n_burst} N_z={cfg.n_guard} "
          f"P={cfg.launch_power_dbm:+.2f} dBm bursts={cfg.bursts} "
          f"[{cfg.config_hash()}]")
    print(f"  Q(EVM)  = {report.q_db_evm:8.3f} dB")
    ber_q = "n/a (no errors)" if report.q_lower_bounded else f"{report.q_db:8.3f} dB"
    print(f"  Q(BER)  = {ber_q}")
    print(f"  BER     = {report.ber:.3e}  "
          f"({report.errors_counted}/{2 * report.symbols_counted} bits)")
    print(f"  repaired spectral points: {report.repaired_spectrum_points}")
    if args.out:
        emit_curve(args.out, args.stem or f"point_{cfg.config_hash()}",
                   "power", [(cfg.launch_power_dbm, report)], cfg)
    return 0


def _parse_values(text: str) -> list[float]:
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        n = int(round((stop - start) / step)) + 1
        return [start + i * step for i in range(n)]
    return [float(x) for x in text.split(",")]


def _cmd_sweep(args) -> int:
    cfg = _build_config(args)
    values = _parse_values(args.values)
    rows = run_sweep(cfg, args.axis, values, workers=args.workers)
    stem = args.stem or f"sweep_{args.axis}_{cfg.system}_{cfg.config_hash()}"
    paths = emit_curve(args.out, stem, args.axis, rows, cfg)
    for value, report in rows:
        print(f"{args.axis}={value:<10.4g} Q(EVM)={report.q_db_evm:8.3f} dB "
              f"BER={report.ber:.3e} repaired={report.repaired_spectrum_points}")
    v_opt, q_opt = find_peak([v for v, _ in rows],
                             [r.q_db_evm for _, r in rows])
    print(f"optimum: {args.axis}={v_opt:.4g} -> Q={q_opt:.3f} dB")
    print("wrote", ", ".join(str(p) for p in paths.values()))
    return 0


def _cmd_validate(args) -> int:
    from nfdmlab.harness.validation import run_validation

    results = run_validation(verbose=True)
    return 0 if all(ok for _, ok, _ in results) else 1


def _cmd_oracle(args) -> int:
    from nfdmlab.nft.oracle import zs_scatter_ode
    import nfdmlab.modem as md
    from nfdmlab.core import RandomStream

    out = Path(args.out_file)
    cases = []
    for n_burst, seed, power_dbm in ((8, 1, -10.0), (16, 1, -10.0), (32, 2, -8.0)):
        rng = RandomStream(seed, 0).generator()
        frame = md.random_frame(n_burst, 64, power_dbm, rng)
        w = md.shape_burst(frame, oversampling=4)
        # moderate normalized amplitude for a solitonless reference
        p_norm = 10 ** (power_dbm / 10.0) * 1e-3 / 0.041782786885245914
        w = w.with_samples(w.samples * np.sqrt(p_norm * n_burst / w.energy()))
        lam = np.linspace(-0.6 * np.pi, 0.6 * np.pi, 129)
        a, b = zs_scatter_ode(w, lam, resolution=args.resolution)
        cases.append({
            "n_burst": n_burst, "seed": seed, "power_dbm": power_dbm,
            "lambda": lam.tolist(),
            "a_re": a.real.tolist(), "a_im": a.imag.tolist(),
            "b_re": b.real.tolist(), "b_im": b.imag.tolist(),
        })
        print(f"oracle case N_b={n_burst} seed={seed}: done")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({"version": __version__,
                               "resolution": args.resolution,
                               "cases": cases}, indent=1))
    print("wrote", out)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nfdmlab",
        description="Burst-mode NFDM/NIS fiber transmission laboratory")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a single sweep point")
    _add_config_flags(p_run)
    p_run.add_argument("--out", type=Path, help="directory for CSV/JSON/PNG")
    p_run.add_argument("--stem", help="output file stem")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep one axis")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--axis", choices=sorted(SWEEP_AXES), required=True)
    p_sweep.add_argument("--values", required=True,
                         help="comma list 'a,b,c' or range 'start:stop:step'")
    p_sweep.add_argument("--out", type=Path, default=Path("results"))
    p_sweep.add_argument("--stem")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_val = sub.add_parser("validate", help="invariant and oracle spot checks")
    p_val.set_defaults(func=_cmd_validate)

    p_or = sub.add_parser("oracle", help="regenerate ODE scattering references")
    p_or.add_argument("--out-file", default="oracle_references.json")
    p_or.add_argument("--resolution", type=int, default=64)
    p_or.set_defaults(func=_cmd_oracle)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
