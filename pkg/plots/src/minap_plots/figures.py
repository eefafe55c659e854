"""Builds the experiment figure set from harness CSV files.

Every simulated number is read from the CSV; the only values computed here
are the closed-form overlays (ideal QPSK BEP over Rayleigh fading, the
correlated-equalizer BEP, and the min-phase correlation map), drawn as solid
lines against the Monte-Carlo markers.
"""

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

matplotlib.rcParams.update({
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 9.0,
    "axes.grid": True,
    "grid.alpha": 0.4,
    "legend.framealpha": 0.9,
    # fixed salt so SVG element ids depend only on the figure content
    "svg.hashsalt": "minap-plots",
    "svg.fonttype": "path",
})

COLUMNS = ("scheme", "snr_db", "rho", "metric", "value", "trials", "seed")
_NUMERIC = ("snr_db", "rho", "value", "trials", "seed")

FIGURE_IDS = ("ber", "ber-correlated", "papr", "nmse", "correlation")

OVERLAY_LABEL = r"$\rho/(1+\sqrt{1-\rho^2})$"


class SchemaError(ValueError):
    """The CSV does not match the experiment schema."""


def read_rows(paths):
    """Load and pool rows from one or more experiment CSV files."""
    rows = []
    for path in paths:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            for col in COLUMNS:
                if col not in header:
                    raise SchemaError(f"{path}: missing column '{col}'")
            extra = [c for c in header if c not in COLUMNS]
            if extra:
                raise SchemaError(f"{path}: unexpected column '{extra[0]}'")
            for rec in reader:
                row = {"scheme": rec["scheme"], "metric": rec["metric"]}
                for col in _NUMERIC:
                    try:
                        row[col] = float(rec[col])
                    except (TypeError, ValueError):
                        raise SchemaError(
                            f"{path}: non-numeric entry in column '{col}'"
                        ) from None
                rows.append(row)
    if not rows:
        raise SchemaError("no data rows in " + ", ".join(str(p) for p in paths))
    return rows


# closed forms for the overlays

def bep_perfect(gamma_bar):
    g = np.asarray(gamma_bar, dtype=float)
    return 0.5 * (1.0 - np.sqrt(g / (1.0 + g)))


def bep_correlated(gamma_bar, rho):
    g = np.asarray(gamma_bar, dtype=float)
    return 0.5 * (1.0 - rho / np.sqrt(1.0 + 1.0 / g))


def rho_min_map(rho):
    r = np.asarray(rho, dtype=float)
    return r / (1.0 + np.sqrt(np.maximum(1.0 - r * r, 0.0)))


def _pick(rows, figure_id, metrics):
    hit = [r for r in rows if r["metric"] in metrics]
    if not hit:
        raise SchemaError(
            f"figure '{figure_id}': column 'metric' has no "
            + "/".join(metrics) + " rows")
    return hit


def _series(rows, keys):
    """Group rows by the named columns, each group sorted by SNR."""
    groups = {}
    for r in rows:
        groups.setdefault(tuple(r[k] for k in keys), []).append(r)
    out = {}
    for key, grp in sorted(groups.items(), key=lambda kv: str(kv[0])):
        grp = sorted(grp, key=lambda r: r["snr_db"])
        out[key] = (np.array([g["snr_db"] for g in grp]),
                    np.array([g["value"] for g in grp]))
    return out


def _fig_ber(rows):
    rows = _pick(rows, "ber", ("ber_bob", "ber_eve"))
    fig, ax = plt.subplots()
    snr_all = []
    for (metric, scheme, rho), (snr, ber) in _series(
            rows, ("metric", "scheme", "rho")).items():
        who = "Bob" if metric == "ber_bob" else "Eve"
        label = f"{who} {scheme} (sim)"
        if rho:
            label += f", rho={rho:g}"
        ax.plot(snr, ber, "o" if who == "Bob" else "s", label=label)
        snr_all.append(snr)
    lo = min(s.min() for s in snr_all)
    hi = max(s.max() for s in snr_all)
    dense = np.linspace(lo, hi, 201)
    ax.plot(dense, bep_perfect(10.0 ** (dense / 10.0)), "-", color="black",
            label="ideal QPSK (model)")
    ax.set_yscale("log")
    ax.set_xlabel("average SNR per bit (dB)")
    ax.set_ylabel("bit error rate")
    ax.legend()
    return fig


def _fig_ber_correlated(rows):
    rows = _pick(rows, "ber-correlated", ("ber_eve",))
    fig, ax = plt.subplots()
    lo = min(r["snr_db"] for r in rows)
    hi = max(r["snr_db"] for r in rows)
    dense = np.linspace(lo, hi, 201)
    for (rho,), (snr, ber) in _series(rows, ("rho",)).items():
        line, = ax.plot(snr, ber, "s", label=f"Eve rho={rho:g} (sim)")
        model = bep_correlated(10.0 ** (dense / 10.0), float(rho_min_map(rho)))
        ax.plot(dense, model, "-", color=line.get_color(),
                label=f"rho={rho:g} (model)")
    ax.set_yscale("log")
    ax.set_xlabel("average SNR per bit (dB)")
    ax.set_ylabel("eavesdropper bit error rate")
    ax.legend()
    return fig


def _fig_papr(rows):
    rows = _pick(rows, "papr", ("papr_db_sample",))
    fig, ax = plt.subplots()
    for (scheme,), grp in _series(rows, ("scheme",)).items():
        samples = np.sort(grp[1])
        exceed = 1.0 - np.arange(1, samples.size + 1) / samples.size
        ax.plot(samples, exceed, "-", drawstyle="steps-post",
                label=f"{scheme} ({samples.size} symbols)")
    ax.set_yscale("log")
    ax.set_xlabel("PAPR threshold (dB)")
    ax.set_ylabel("P(PAPR > threshold)")
    ax.legend()
    return fig


def _fig_nmse(rows):
    rows = _pick(rows, "nmse", ("nmse_bob_db", "nmse_eve_db"))
    fig, ax = plt.subplots()
    for (metric, scheme), (snr, val) in _series(
            rows, ("metric", "scheme")).items():
        who = "Bob" if metric == "nmse_bob_db" else "Eve"
        ax.plot(snr, val, "o--", label=f"{who} {scheme} (sim)")
    ax.set_xlabel("average SNR per bit (dB)")
    ax.set_ylabel("channel estimate NMSE (dB)")
    ax.legend()
    return fig


def _fig_correlation(rows):
    picked = _pick(rows, "correlation", ("corr_min_empirical",
                                         "corr_min_model"))
    fig, ax = plt.subplots()
    emp = [r for r in picked if r["metric"] == "corr_min_empirical"]
    if emp:
        emp = sorted(emp, key=lambda r: r["rho"])
        ax.plot([r["rho"] for r in emp], [r["value"] for r in emp], "o",
                label="min-phase correlation (sim)")
    tab = [r for r in picked if r["metric"] == "corr_min_model"]
    if tab:
        tab = sorted(tab, key=lambda r: r["rho"])
        ax.plot([r["rho"] for r in tab], [r["value"] for r in tab], "x",
                label="map (csv)")
    dense = np.linspace(0.0, 1.0, 201)
    ax.plot(dense, rho_min_map(dense), "-", color="black",
            label=OVERLAY_LABEL)
    ax.set_xlabel("channel correlation rho")
    ax.set_ylabel("correlation after min-phase extraction")
    ax.legend()
    return fig


_BUILDERS = {
    "ber": _fig_ber,
    "ber-correlated": _fig_ber_correlated,
    "papr": _fig_papr,
    "nmse": _fig_nmse,
    "correlation": _fig_correlation,
}


def build_figure(rows, figure_id):
    """Build the named figure from pooled CSV rows."""
    try:
        builder = _BUILDERS[figure_id]
    except KeyError:
        raise ValueError(f"unknown figure id '{figure_id}'") from None
    return builder(rows)


def render(csv_paths, figure_id, out_path):
    """Read the CSVs, build one figure, write the image atomically."""
    rows = read_rows(csv_paths)
    fig = build_figure(rows, figure_id)
    out_path = os.fspath(out_path)
    fmt = os.path.splitext(out_path)[1].lstrip(".").lower() or "png"
    kwargs = {"metadata": {"Date": None}} if fmt == "svg" else {}
    tmp = out_path + ".tmp"
    try:
        fig.savefig(tmp, format=fmt, **kwargs)
        os.replace(tmp, out_path)
    finally:
        plt.close(fig)
        if os.path.exists(tmp):
            os.unlink(tmp)
