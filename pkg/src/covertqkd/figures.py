"""Figure rendering for the command-line report path.

Pure CSV-to-image transforms: nothing here recomputes physics.  Rows whose
``error`` column is nonempty are skipped and counted; missing columns or an
empty data set raise ValueError so callers fail loudly on schema mismatch.
"""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def _read_rows(csv_path: str, required: tuple[str, ...]) -> tuple[list[dict], int]:
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise ValueError(f"{csv_path}: missing required columns {missing}")
        rows = list(reader)
    skipped = 0
    kept = []
    for row in rows:
        if row.get("error", ""):
            skipped += 1
            continue
        kept.append(row)
    if not kept:
        raise ValueError(f"{csv_path}: no usable data rows (skipped {skipped})")
    return kept, skipped


def render_rate_figure(csv_path: str, out_path: str, y_column: str = "rate_per_symbol") -> int:
    """Line plot of the per-symbol key rate against the sweep variable.

    Returns the number of error rows skipped.
    """
    rows, skipped = _read_rows(csv_path, ("sweep_var", y_column))
    x = [float(r["sweep_var"]) for r in rows]
    y = [float(r[y_column]) for r in rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(x, y, marker="o", ms=3.5, lw=1.2)
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.set_xlabel("sweep variable")
    ax.set_ylabel("key bits per PPM symbol")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return skipped


def render_covertness_figure(csv_path: str, out_path: str) -> int:
    """Covertness budget components against the sub-block count.

    Plots lambda1 and the required coordination bits on split log-scale axes.
    Returns the number of error rows skipped.
    """
    rows, skipped = _read_rows(csv_path, ("ell", "lambda1", "log_h_bits"))
    ell = [float(r["ell"]) for r in rows]
    lam = [float(r["lambda1"]) for r in rows]
    logh = [float(r["log_h_bits"]) for r in rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.loglog(ell, lam, marker="o", ms=3.5, lw=1.2, color="tab:blue", label="lambda1")
    ax.set_xlabel("sub-blocks")
    ax.set_ylabel("lambda1", color="tab:blue")
    ax2 = ax.twinx()
    ax2.loglog(ell, logh, marker="s", ms=3.5, lw=1.2, color="tab:red", label="log h (bits)")
    ax2.set_ylabel("required coordination bits", color="tab:red")
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return skipped
