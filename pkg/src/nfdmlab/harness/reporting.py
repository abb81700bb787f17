"""Result emission: delimited rows, a JSON mirror, and a rendered figure.

Every row carries the config hash and seed; the CSV layout is fixed so
reruns with the same seed produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from nfdmlab import __version__  # noqa: E402
from nfdmlab.harness.config import ExperimentConfig  # noqa: E402
from nfdmlab.metrics import PerformanceReport  # noqa: E402

CSV_HEADER = ["axis", "value", "q_db_evm", "q_db_ber", "ber", "evm_snr_db",
              "bursts", "repaired_points", "config_hash", "seed"]


def _format_row(axis: str, value, report: PerformanceReport,
                cfg: ExperimentConfig) -> list[str]:
    return [
        axis,
        f"{value:.10g}",
        f"{report.q_db_evm:.6f}",
        f"{report.q_db:.6f}",
        f"{report.ber:.8e}",
        f"{report.evm_snr_db:.6f}",
        str(cfg.bursts),
        str(report.repaired_spectrum_points),
        cfg.config_hash(),
        str(cfg.seed),
    ]


def write_csv(path: str | Path, axis: str, rows, cfg: ExperimentConfig) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for value, report in rows:
            writer.writerow(_format_row(axis, value, report, cfg))
    return path


def write_json(path: str | Path, axis: str, rows, cfg: ExperimentConfig) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "version": __version__,
        "config": cfg.flat_dict(),
        "config_hash": cfg.config_hash(),
        "axis": axis,
        "rows": [
            {
                "value": value,
                "q_db_evm": report.q_db_evm,
                "q_db_ber": report.q_db,
                "ber": report.ber,
                "evm_snr_db": report.evm_snr_db,
                "symbols": report.symbols_counted,
                "errors": report.errors_counted,
                "repaired_points": report.repaired_spectrum_points,
                "q_lower_bounded": report.q_lower_bounded,
            }
            for value, report in rows
        ],
    }
    path.write_text(json.dumps(payload, indent=2, default=str) + "\n")
    return path


_AXIS_LABELS = {
    "power": "launch power (dBm)",
    "n_burst": "burst length $N_b$ (symbols)",
    "n_guard": "guard interval $N_z$ (symbols)",
    "window": "window width $T_w/T$",
}


def render_figure(path: str | Path, axis: str, rows, cfg: ExperimentConfig) -> Path:
    """One plot per curve: Q (EVM-based, plus counted-BER Q where finite)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = [v for v, _ in rows]
    q_evm = [r.q_db_evm for _, r in rows]
    q_ber = [(r.q_db if not r.q_lower_bounded else float("nan")) for _, r in rows]
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    ax.plot(values, q_evm, "o-", label="Q (EVM-SNR)")
    if any(q == q for q in q_ber):  # any finite
        ax.plot(values, q_ber, "s--", label="Q (counted BER)")
    ax.set_xlabel(_AXIS_LABELS.get(axis, axis))
    ax.set_ylabel("Q-factor (dB)")
    ax.set_title(f"{cfg.system}, $N_b$={cfg.n_burst}, $N_z$={cfg.n_guard}, "
                 f"L={cfg.fiber.length / 1e3:.0f} km")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def emit_curve(out_dir: str | Path, stem: str, axis: str, rows,
               cfg: ExperimentConfig) -> dict[str, Path]:
    """CSV + JSON mirror + PNG for one curve, named by a common stem."""
    out_dir = Path(out_dir)
    return {
        "csv": write_csv(out_dir / f"{stem}.csv", axis, rows, cfg),
        "json": write_json(out_dir / f"{stem}.json", axis, rows, cfg),
        "png": render_figure(out_dir / f"{stem}.png", axis, rows, cfg),
    }
