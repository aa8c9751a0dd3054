"""Figure rendering for the report path.

Each pipeline gets a small set of diagnostic plots written next to the
delimited output.  Figures are a convenience view of the certified data;
the CSV and certificate files remain the canonical artifacts.
"""

from __future__ import annotations

import math

__all__ = ["render_report_figures"]


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _plot_lengths(cert, path):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    idx = [e.index for e in cert.entries]
    lengths = [len(e.word) for e in cert.entries]
    ax.plot(idx, lengths, "o-", lw=1)
    ax.set_xlabel("entry index")
    ax.set_ylabel("word length")
    ax.set_title("certificate word lengths")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def _plot_exponents(cert, path):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    lengths = [len(e.word) for e in cert.entries]
    exps = [math.log10(max(e.exponent, 1)) for e in cert.entries]
    ax.plot(lengths, exps, "s-", lw=1, color="tab:red")
    ax.set_xlabel("word length budget n")
    ax.set_ylabel("log10 certified exponent")
    ax.set_title("distortion lower bound")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def _plot_schedule(schedule, path):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    idx = [e.index for e in schedule.entries]
    mags = [abs(e.angle) if e.angle != 0.0 else float("nan") for e in schedule.entries]
    ax.semilogy(idx, mags, "d-", lw=1, color="tab:green")
    ax.set_xlabel("entry index")
    ax.set_ylabel("|residue angle|")
    ax.set_title("residue decay")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def _plot_errors(entries, path):
    plt = _plt()
    vals = [e.get("sup_error", e.get("assembled_error")) for e in entries]
    vals = [v for v in vals if isinstance(v, (int, float)) and v == v]
    if not vals:
        return None
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.semilogy(range(len(vals)), [max(v, 1e-18) for v in vals], "o-", lw=1,
                color="tab:purple")
    ax.set_xlabel("entry")
    ax.set_ylabel("sup error")
    ax.set_title("verification errors")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def _plot_pixton(table, path):
    plt = _plt()
    rows = table["rows"]
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.semilogy([r["k"] for r in rows], [max(r["dY_err"], 1e-18) for r in rows],
                "o-", lw=1, label="|dY - 1|")
    ax.semilogy([r["k"] for r in rows], [max(r["dPhi_err"], 1e-18) for r in rows],
                "s-", lw=1, label="|dPhi - 1|")
    ax.set_xlabel("dyadic depth")
    ax.legend()
    ax.set_title("tangency diagnostics")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def render_report_figures(cfg, cert, entries, extras, stem) -> list[str]:
    out = []
    try:
        if cert is not None and cert.entries:
            out.append(_plot_lengths(cert, stem + "_lengths.png"))
            out.append(_plot_exponents(cert, stem + "_exponents.png"))
        if "schedule" in extras:
            out.append(_plot_schedule(extras["schedule"], stem + "_decay.png"))
        if entries:
            p = _plot_errors(entries, stem + "_errors.png")
            if p:
                out.append(p)
        if "pixton" in extras:
            out.append(_plot_pixton(extras["pixton"], stem + "_pixton.png"))
    except Exception as exc:  # figures are best-effort; reports stay valid
        out.append(f"figure-error:{exc}")
    return [p for p in out if p]
