"""Command line front end.

Subcommands map one-to-one onto harness experiments plus an inspection tool:

  ber          bit error rate sweep for Bob and Eve
  nmse         channel estimation error sweep
  papr         per-symbol peak-to-average samples (baseline and precoded)
  correlation  min-phase correlation vs the rho/(1+sqrt(1-rho^2)) model
  decompose    dump taps, zero classification, and both factors for one channel

A JSON config file supplies defaults; explicit flags override it. All output
is CSV written atomically (temp file, then rename), so a failed run never
leaves a partial file behind.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from .channel import cfr_of, draw_channel, exp_pdp
from .decomposition import decompose_fir
from .harness import EXPERIMENTS, config_from_dict, run, write_csv
from .numerics import poly_roots

_SCHEMES = ("baseline", "data", "pilot", "joint")

DECOMPOSE_HEADER = ("field", "index", "value_re", "value_im", "label")


def _parse_float_list(text: str) -> tuple:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated numbers, got %r" % text)


def _parse_taps(text: str) -> np.ndarray:
    parts = [p.strip() for p in text.split(",") if p.strip() != ""]
    if not parts:
        raise argparse.ArgumentTypeError("no taps given")
    try:
        values = [complex(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError("malformed tap list %r" % text)
    return np.asarray(values, dtype=complex)


def _add_sweep_flags(sub: argparse.ArgumentParser, default_out: str) -> None:
    sub.add_argument("--config", help="JSON file of config keys")
    sub.add_argument("--scheme", choices=_SCHEMES)
    sub.add_argument("--snr", type=_parse_float_list,
                     help="comma-separated SNR grid in dB")
    sub.add_argument("--rho", type=_parse_float_list,
                     help="comma-separated channel correlations")
    sub.add_argument("--trials", type=int)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--csi", choices=("perfect", "estimated"))
    sub.add_argument("--estimator", choices=("ls", "mmse"))
    sub.add_argument("--eve-equalizer", choices=("min", "full"))
    sub.add_argument("--eve-knows-channel", action=argparse.BooleanOptionalAction,
                     default=None)
    sub.add_argument("--workers", type=int)
    sub.add_argument("--out", default=default_out, help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minap",
        description="OFDM channel-decomposition security experiments")
    subs = parser.add_subparsers(dest="command", required=True)

    for name, default_out in (("ber", "ber.csv"), ("nmse", "nmse.csv"),
                              ("papr", "papr.csv"),
                              ("correlation", "correlation.csv")):
        sub = subs.add_parser(name, help="run the %s experiment" % name)
        _add_sweep_flags(sub, default_out)

    dec = subs.add_parser("decompose",
                          help="factor one channel into min-phase and all-pass")
    dec.add_argument("--taps", type=_parse_taps,
                     help="comma-separated tap values (complex accepted)")
    dec.add_argument("--seed", type=int, default=0,
                     help="draw a random channel instead of --taps")
    dec.add_argument("--n-taps", type=int, default=11)
    dec.add_argument("--n", type=int, default=256, help="transform length")
    dec.add_argument("--out", default="decompose.csv")
    return parser


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return data


_FLAG_TO_KEY = {
    "scheme": "scheme",
    "snr": "snr_grid_db",
    "rho": "rho_grid",
    "trials": "trials",
    "seed": "master_seed",
    "csi": "csi_mode",
    "estimator": "estimator",
    "eve_equalizer": "eve_equalizer",
    "eve_knows_channel": "eve_knows_channel",
    "workers": "workers",
}

_EXPERIMENT_DEFAULTS = {
    "ber": {"scheme": "data"},
    "nmse": {"scheme": "pilot"},
    "papr": {"scheme": "data", "trials": 100000},
    "correlation": {"scheme": "baseline",
                    "rho_grid": (0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                 0.6, 0.7, 0.8, 0.9, 1.0)},
}


def _merged_config(args: argparse.Namespace, experiment: str) -> dict:
    merged = dict(_EXPERIMENT_DEFAULTS[experiment])
    merged.update(_load_config_file(args.config))
    for flag, key in _FLAG_TO_KEY.items():
        value = getattr(args, flag, None)
        if value is not None:
            merged[key] = value
    merged["experiment"] = experiment
    return merged


def _run_sweep(args: argparse.Namespace, experiment: str) -> int:
    merged = _merged_config(args, experiment)
    if experiment == "papr":
        # The point of the PAPR experiment is the comparison against plain
        # OFDM, so the precoded scheme is always run next to baseline.
        schemes = []
        for scheme in ("baseline", merged.get("scheme", "data")):
            if scheme not in schemes:
                schemes.append(scheme)
        records = []
        for scheme in schemes:
            records.extend(run(config_from_dict({**merged, "scheme": scheme})))
    else:
        records = run(config_from_dict(merged))
    write_csv(records, args.out)
    return 0


def _decompose_rows(taps: np.ndarray, n: int):
    dc = decompose_fir(taps, n)
    truth = cfr_of(taps, n)
    recon_err = float(np.max(np.abs(dc.min_phase * dc.all_pass - truth)))
    rows = []
    for i, tap in enumerate(taps):
        rows.append(("tap", i, tap.real, tap.imag, ""))
    # Leading exact-zero taps are a pure delay with no finite zeros; the
    # factorization puts them in the all-pass.
    trimmed = np.trim_zeros(np.asarray(taps, dtype=complex), "f")
    if trimmed.size > 1:
        zeros = poly_roots(trimmed).roots
        for i, z in enumerate(zeros):
            label = "outside" if abs(z) > 1.0 + 1e-6 else "inside"
            rows.append(("zero", i, z.real, z.imag, label))
    for i, v in enumerate(dc.min_phase):
        rows.append(("min_phase_cfr", i, v.real, v.imag, ""))
    for i, v in enumerate(dc.all_pass):
        rows.append(("all_pass_cfr", i, v.real, v.imag, ""))
    rows.append(("reconstruction_error", 0, recon_err, 0.0, ""))
    return rows


def _write_rows_atomic(rows, header, path: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".csv.part")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(",".join(header) + "\n")
            for field, index, re_v, im_v, label in rows:
                handle.write("%s,%d,%.12g,%.12g,%s\n"
                             % (field, index, re_v, im_v, label))
        os.replace(tmp_path, path)
    except BaseException:
        try:
            os.unlink(tmp_path)
        except OSError:
            pass
        raise


def _run_decompose(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.taps is not None:
        taps = args.taps
        if np.all(taps == 0):
            parser.error("taps are all zero")
    else:
        rng = np.random.default_rng(args.seed)
        taps = draw_channel(exp_pdp(n_taps=args.n_taps), rng)
    if taps.size > args.n:
        parser.error("more taps than transform bins")
    rows = _decompose_rows(taps, args.n)
    _write_rows_atomic(rows, DECOMPOSE_HEADER, args.out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command in EXPERIMENTS:
            return _run_sweep(args, args.command)
        if args.command == "decompose":
            try:
                return _run_decompose(args, parser)
            except SystemExit as exc:
                return int(exc.code or 0)
        raise AssertionError(args.command)  # pragma: no cover
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
