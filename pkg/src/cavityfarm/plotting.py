"""Static figures for experiment CSVs.

Renders to vector files (SVG by default) with hashed element ids and no
embedded timestamps, so regenerating a figure from the same CSV is
byte-stable.  The CSV is the authority; nothing here recomputes physics.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "cavityfarm"

import matplotlib.pyplot as plt

from cavityfarm.experiments import read_csv

_SCHEMAS = {
    "valley": ["f", "e_n_steady", "corr_q1p2_steady", "cycles_to_converge"],
    "vibration": ["cycle", "t", "e_n", "corr_q1p2"],
    "freq": ["gamma", "max_abs_corr_q1p2"],
    "gw": ["cycle", "t", "e_n", "corr_q1p2", "length", "displacement"],
}


def _load(csv_path, kind: str):
    if kind not in _SCHEMAS:
        raise ValueError(f"unknown plot kind {kind!r}, expected one of {sorted(_SCHEMAS)}")
    header, data = read_csv(csv_path)
    expected = _SCHEMAS[kind]
    if header[: len(expected)] != expected:
        raise ValueError(
            f"{csv_path} does not look like a {kind} CSV: header {header}, expected {expected}"
        )
    if data.size == 0:
        raise ValueError(f"{csv_path} has no data rows")
    return {name: data[:, i] for i, name in enumerate(header)}


def _save(fig, out_path) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fmt = out_path.suffix.lstrip(".") or "svg"
    fig.savefig(out_path, format=fmt, metadata={"Date": None} if fmt == "svg" else None)
    plt.close(fig)
    return out_path


def render(csv_path, kind: str, out_path) -> Path:
    """Render one CSV to a figure file; the kind picks layout and axes."""
    cols = _load(csv_path, kind)
    if kind == "valley":
        fig, ax = plt.subplots(figsize=(7.0, 4.2), constrained_layout=True)
        ax.plot(cols["f"], cols["e_n_steady"], lw=1.0, color="tab:blue", marker=".", ms=3)
        ax.set_xlabel("flight factor f = (T + delay) / L")
        ax.set_ylabel("steady-state E_N")
        ax.grid(alpha=0.3)
    elif kind == "vibration":
        fig, (ax1, ax2) = plt.subplots(
            2, 1, figsize=(7.0, 5.6), sharex=True, constrained_layout=True
        )
        ax1.plot(cols["t"], cols["e_n"], lw=0.9, color="tab:blue")
        ax1.set_ylabel("E_N per exiting pair")
        ax1.grid(alpha=0.3)
        ax2.plot(cols["t"], cols["corr_q1p2"], lw=0.9, color="tab:red")
        ax2.set_ylabel("2<q1 p2>")
        ax2.set_xlabel("time")
        ax2.grid(alpha=0.3)
    elif kind == "freq":
        fig, ax = plt.subplots(figsize=(7.0, 4.2), constrained_layout=True)
        ax.loglog(cols["gamma"], cols["max_abs_corr_q1p2"], marker="o", ms=4, lw=1.0)
        ax.set_xlabel("vibration frequency gamma")
        ax.set_ylabel("max |2<q1 p2>|")
        ax.grid(alpha=0.3, which="both")
    else:
        fig, (ax1, ax2) = plt.subplots(
            2, 1, figsize=(7.0, 5.6), sharex=True, constrained_layout=True
        )
        ax1.plot(cols["t"], cols["corr_q1p2"], lw=0.9, color="tab:red", label="2<q1 p2>")
        ax1.plot(cols["t"], cols["e_n"], lw=0.9, color="tab:blue", label="E_N")
        ax1.legend(loc="best")
        ax1.grid(alpha=0.3)
        ax2.plot(cols["t"], cols["length"], lw=0.9, color="tab:green")
        ax2.set_ylabel("cavity length")
        ax2.set_xlabel("time")
        ax2.grid(alpha=0.3)
    return _save(fig, out_path)
