"""Sample CSV I/O, report JSON, and figure rendering.

The CSV starts with one comment line carrying JSON metadata (system, grid,
exponents, dyadic block indices, and the full config echo), so the report
command can rebuild the exact JSON report from the CSV alone.  All floats
are written with ``repr`` and therefore round-trip bitwise.
"""

import json
from pathlib import Path

import numpy as np

from .monitor import SCALAR_COLUMNS, CriterionSample, assemble_report

CSV_MAGIC = "# lpflow-samples 1 "


def csv_columns(qs) -> list:
    cols = ["t", *SCALAR_COLUMNS]
    cols += [f"dq_tau_{q}" for q in qs]
    cols += [f"dq_v_{q}" for q in qs]
    return cols


def write_samples_csv(path, history, metadata: dict) -> Path:
    """Write the sampled history with a JSON metadata comment line."""
    qs = metadata["qs"]
    lines = [CSV_MAGIC + json.dumps(metadata)]
    lines.append(",".join(csv_columns(qs)))
    for s in history:
        row = [repr(float(s.t))]
        row += [repr(float(v)) for v in s.scalars()]
        row += [repr(float(v)) for v in s.dq_tau]
        row += [repr(float(v)) for v in s.dq_v]
        lines.append(",".join(row))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_samples_csv(path) -> tuple[dict, list]:
    """Parse a samples CSV back into (metadata, history)."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln]
    if not lines or not lines[0].startswith(CSV_MAGIC):
        raise ValueError(f"{path}: not a samples CSV (missing metadata line)")
    metadata = json.loads(lines[0][len(CSV_MAGIC) :])
    qs = list(metadata["qs"])
    expected = csv_columns(qs)
    header = lines[1].split(",")
    if header != expected:
        raise ValueError(f"{path}: column mismatch: {header} != {expected}")
    n_scalar = 1 + len(SCALAR_COLUMNS)
    history = []
    for ln in lines[2:]:
        cells = [float(c) for c in ln.split(",")]
        if len(cells) != len(expected):
            raise ValueError(f"{path}: row has {len(cells)} cells, expected {len(expected)}")
        scalars = cells[1:n_scalar]
        nq = len(qs)
        history.append(
            CriterionSample(
                t=cells[0],
                **dict(zip(SCALAR_COLUMNS, scalars)),
                dq_tau=tuple(cells[n_scalar : n_scalar + nq]),
                dq_v=tuple(cells[n_scalar + nq :]),
            )
        )
    return metadata, history


def build_report(history, metadata: dict) -> dict:
    """Assemble the run report from a history plus CSV metadata."""
    from .oldroyd import OldroydParams

    params = None
    cfg = metadata.get("config", {})
    if metadata["system"] in ("oldroyd", "ns-forced"):
        params = OldroydParams(
            nu=metadata["nu"],
            a=cfg.get("a", 0.0),
            mu1=cfg.get("mu1", 1.0),
            mu2=cfg.get("mu2", 1.0),
            b=metadata["b"],
        )
    return assemble_report(
        history,
        system=metadata["system"],
        alpha=metadata["alpha"],
        b=metadata["b"],
        nu=metadata["nu"],
        planchon_deltas=metadata.get("planchon_deltas", ()),
        params=params,
        config_echo=cfg,
    )


def write_report_json(path, report: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    return path


def render_figures(history, metadata: dict, out_dir) -> list:
    """Render the standard figures next to the delimited output.

    Three PNGs: criterion norms over time (log scale), the energy budget,
    and the dyadic block activity of stress and velocity as heatmaps.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    qs = list(metadata["qs"])
    ts = np.array([s.t for s in history])
    paths = []

    fig, ax = plt.subplots(figsize=(7, 4.5))
    floor = 1e-18
    for name, label in (
        ("tau_linf", r"$\|\tau\|_\infty$"),
        ("tau_bmo", r"$\|\tau\|_{BMO}$"),
        ("tau_besov", r"$\sup_q\|\Delta_q\tau\|_\infty$"),
        ("grad_v_inf", r"$\|\nabla v\|_\infty$"),
        ("v_holder", r"$\|v\|_{\dot C^{1+\alpha}}$"),
    ):
        ys = np.array([getattr(s, name) for s in history])
        ax.semilogy(ts, np.maximum(ys, floor), label=label)
    ax.set_xlabel("t")
    ax.set_title(f"criterion norms ({metadata['system']}, n={metadata['n']})")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    p = out_dir / "norms.png"
    fig.savefig(p, dpi=120)
    plt.close(fig)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    energy = np.array([s.energy for s in history])
    dissipation = np.array([s.dissipation for s in history])
    ax.plot(ts, energy, label="energy")
    ax.plot(ts, dissipation, label="dissipation", linestyle="--")
    ax2 = ax.twinx()
    ax2.plot(ts, [s.conf_min_det for s in history], color="tab:green", label="min det A")
    ax2.set_ylabel("min det A", color="tab:green")
    ax.set_xlabel("t")
    ax.set_title("energy budget and conformation floor")
    ax.legend(loc="upper right", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    p = out_dir / "energy.png"
    fig.savefig(p, dpi=120)
    plt.close(fig)
    paths.append(p)

    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, attr, title in (
        (axes[0], "dq_tau", r"$\|\Delta_q\tau\|_\infty$"),
        (axes[1], "dq_v", r"$2^q\|\Delta_q v\|_\infty$"),
    ):
        blocks = np.array([getattr(s, attr) for s in history]).T  # (q, t)
        shaded = np.log10(np.maximum(blocks, floor))
        mesh = ax.pcolormesh(ts, qs, shaded, shading="nearest", cmap="viridis")
        ax.set_xlabel("t")
        ax.set_title(title + "  (log10)")
        fig.colorbar(mesh, ax=ax)
    axes[0].set_ylabel("dyadic block q")
    fig.tight_layout()
    p = out_dir / "blocks.png"
    fig.savefig(p, dpi=120)
    plt.close(fig)
    paths.append(p)

    return paths
