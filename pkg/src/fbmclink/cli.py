"""Command-line entry points.

Subcommands: ber, exit, psd, complexity, validate-config.  Each report
writes CSV output plus a rendered PNG figure into the output directory.
Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from . import complexity as cx
from .campaign import (
    CampaignConfig,
    config_header,
    psd_estimate,
    reference_signals,
    run_ber,
    run_exit,
    write_ber_csv,
    write_psd_csv,
)
from .plotting import ber_figure, exit_figure, psd_figure, save_figure

CONFIG_ERROR, RUNTIME_ERROR = 2, 3


def _parse_value(text: str):
    return yaml.safe_load(text)


def _load_config(args) -> CampaignConfig:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = yaml.safe_load(fh) or {}
    for item in args.set or []:
        if "=" not in item:
            raise ValueError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        data[key.strip()] = _parse_value(value)
    if getattr(args, "snr", None):
        data["snr_db"] = [float(s) for s in args.snr.split(",")]
    for key in ("frames", "workers"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    if getattr(args, "seed", None) is not None:
        data["master_seed"] = args.seed
    if getattr(args, "output", None):
        data["out_dir"] = args.output
    cfg = CampaignConfig.from_dict(data)
    errs = cfg.validate()
    if errs:
        raise ValueError("invalid configuration:\n  " + "\n  ".join(errs))
    return cfg


def _out_dir(cfg: CampaignConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_validate(args) -> int:
    try:
        cfg = _load_config(args)
    except (ValueError, OSError) as err:
        print(err, file=sys.stderr)
        return CONFIG_ERROR
    print(yaml.safe_dump(cfg.resolved(), sort_keys=True).rstrip())
    print("configuration ok")
    return 0


def cmd_ber(args, cfg: CampaignConfig) -> int:
    out = _out_dir(cfg)
    points = run_ber(cfg)
    csv_path = out / "ber.csv"
    write_ber_csv(points, cfg, csv_path)
    label = f"{cfg.waveform} i_dec={cfg.i_dec} i_iic={cfg.i_iic}"
    save_figure(ber_figure({label: points}), out / "ber.png")
    for p in points:
        print(f"snr={p.snr_db:6.2f} dB  ber={p.ber:.3e}  "
              f"({p.bit_errors}/{p.bits_sent} bits, {p.frames} frames)")
    print(f"wrote {csv_path} and {out / 'ber.png'}")
    return 0


def cmd_exit(args, cfg: CampaignConfig) -> int:
    out = _out_dir(cfg)
    header = config_header(cfg)
    i_dec_list = [int(s) for s in args.i_dec.split(",")] if args.i_dec else [cfg.i_dec]
    results = run_exit(cfg, snr_list=cfg.snr_db, i_dec_list=i_dec_list,
                       percentile_mode=args.percentiles is not None,
                       n_realizations=args.realizations,
                       percentiles=[float(s) for s in
                                    (args.percentiles or "90").split(",")])
    written = []
    if results["percentile"] is not None:
        for p, curve in results["percentile"].items():
            path = out / f"exit_percentile_{p:g}.csv"
            curve.to_csv(path, header_lines=header)
            written.append(path)
        fig = exit_figure(percentile_curves=list(results["percentile"].values()),
                          individual=results["individual"])
    else:
        for curve in results["inner"]:
            path = out / f"exit_inner_snr{curve.meta['snr_db']:g}.csv"
            curve.to_csv(path, header_lines=header)
            written.append(path)
        for curve in results["outer"]:
            path = out / f"exit_outer_idec{curve.meta['i_dec']}.csv"
            curve.to_csv(path, header_lines=header)
            written.append(path)
        for im, om, tr in results["trajectories"]:
            path = out / (f"exit_trajectory_snr{im['snr_db']:g}"
                          f"_idec{om['i_dec']}.csv")
            tr.to_csv(path, {"snr_db": im["snr_db"], "i_dec": om["i_dec"]},
                      header_lines=header)
            written.append(path)
            print(f"snr={im['snr_db']} dB, i_dec={om['i_dec']}: "
                  f"{'open tunnel' if tr.converged else 'blocked'}")
        fig = exit_figure(inner_curves=results["inner"],
                          outer_curves=results["outer"],
                          trajectories=[t for _, _, t in results["trajectories"]])
    save_figure(fig, out / "exit_chart.png")
    print(f"wrote {len(written)} CSV files and {out / 'exit_chart.png'}")
    return 0


def cmd_psd(args, cfg: CampaignConfig) -> int:
    out = _out_dir(cfg)
    signals = reference_signals(cfg, n_symbols=args.symbols)
    curves = {}
    freq = None
    for name, sig in signals.items():
        freq, psd_db = psd_estimate(sig, nfft=args.nfft)
        curves[name] = psd_db
    csv_path = out / "psd.csv"
    write_psd_csv(freq, curves, cfg, csv_path)
    spacing = cfg.sample_rate / cfg.m
    save_figure(psd_figure(freq, curves, subcarrier_spacing=spacing),
                out / "psd.png")
    print(f"wrote {csv_path} and {out / 'psd.png'}")
    return 0


def cmd_complexity(args, cfg: CampaignConfig) -> int:
    out = _out_dir(cfg)
    rows = cx.comparison_table(m=cfg.m, k=cfg.k,
                               i_iic_range=range(args.max_iic + 1),
                               include_all_hybrid=args.all_hybrid)
    csv_text = cx.render_table_csv(rows, header_lines=config_header(cfg))
    (out / "complexity.csv").write_text(csv_text)
    (out / "complexity.md").write_text(cx.render_table_markdown(rows))
    print(cx.render_table_markdown(rows))
    print(f"wrote {out / 'complexity.csv'} and {out / 'complexity.md'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fbmclink",
        description="FBMC-QAM link simulator with an iterative "
                    "interference-cancelling BICM-ID receiver")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("-c", "--config", help="YAML config file")
        p.add_argument("-o", "--output", help="output directory")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--frames", type=int, help="frame cap per SNR point")
        p.add_argument("--workers", type=int, help="parallel workers")

    p_ber = sub.add_parser("ber", help="Monte-Carlo BER sweep")
    common(p_ber)
    p_ber.add_argument("--snr", help="comma-separated SNR list in dB")
    p_ber.set_defaults(func=cmd_ber)

    p_exit = sub.add_parser("exit", help="EXIT curves and trajectories")
    common(p_exit)
    p_exit.add_argument("--snr", help="comma-separated SNR list in dB")
    p_exit.add_argument("--i-dec", help="comma-separated outer iteration list")
    p_exit.add_argument("--percentiles",
                        help="coverage percentiles; enables percentile mode")
    p_exit.add_argument("--realizations", type=int, default=50)
    p_exit.set_defaults(func=cmd_exit)

    p_psd = sub.add_parser("psd", help="PSD / out-of-band comparison")
    common(p_psd)
    p_psd.add_argument("--nfft", type=int, default=1024)
    p_psd.add_argument("--symbols", type=int, default=600)
    p_psd.set_defaults(func=cmd_psd)

    p_cx = sub.add_parser("complexity", help="receiver complexity table")
    common(p_cx)
    p_cx.add_argument("--max-iic", type=int, default=3)
    p_cx.add_argument("--all-hybrid", action="store_true",
                      help="also fill the extrapolated hybrid rows")
    p_cx.set_defaults(func=cmd_complexity)

    p_val = sub.add_parser("validate-config", help="check and echo the config")
    common(p_val)
    p_val.set_defaults(func=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "validate-config":
        return cmd_validate(args)
    try:
        cfg = _load_config(args)
    except (ValueError, OSError) as err:
        print(err, file=sys.stderr)
        return CONFIG_ERROR
    try:
        return args.func(args, cfg)
    except Exception as err:  # pragma: no cover - defensive
        print(f"runtime failure: {err}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
