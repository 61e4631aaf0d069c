"""Command-line front end.

Every subcommand wraps one library operation and writes plain data (CSV,
JSON, Touchstone or short text reports).  Exit status is 0 on success, 1 for
domain errors and unreadable inputs, 2 for bad command lines.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import analysis, catalog, composition, io as pio, synthesis
from .errors import ParamNetError
from .network import (
    DampingMatrix,
    ModeNetwork,
    ScatteringMatrix,
    network_from_coupling_matrix,
    scattering,
    synthesize_couplings,
)

PRESETS = ("t-amp", "c-amp", "squeezer", "converter", "circulator3", "2pa")
TWO_PI = 2.0 * math.pi
TOUCHSTONE_CAVEAT = (
    "frequency column is the signal detuning offset from each port's carrier; "
    "a pumped parametric network has no single frequency axis"
)


def _db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def _parse_termination(text: str) -> composition.PortTermination:
    try:
        port, value = text.split("=", 1)
        parts = [float(v) for v in value.split(",")]
        if len(parts) == 1:
            parts.append(0.0)
        re_, im_ = parts
        return composition.PortTermination(int(port), complex(re_, im_))
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"expected PORT=R_RE,R_IM, got {text!r}") from exc


def _add_network_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=PRESETS, default=None)
    src.add_argument("--spec", help="network spec JSON file")
    p.add_argument(
        "--gain-db",
        type=float,
        default=None,
        help="per-coupling gain: standalone reflection gain of each squeezing coupling "
        "(t-amp, c-amp, squeezer) or transmission gain (2pa)",
    )
    p.add_argument(
        "--forward-gain-db",
        type=float,
        default=None,
        help="target |S21|^2 for t-amp/c-amp; the per-coupling gain is solved for",
    )
    p.add_argument("--conversion", type=float, default=1.0, help="per-coupling conversion efficiency C")
    p.add_argument("--kappa-mhz", type=float, default=100.0, help="linewidth/2pi of every preset mode")
    p.add_argument(
        "--omega-ghz",
        type=float,
        nargs="+",
        default=[4.0, 6.0, 8.0, 10.0],
        help="preset mode frequencies/2pi (first N are used)",
    )


def _add_output_args(p: argparse.ArgumentParser, formats=("csv", "json", "touchstone")) -> None:
    p.add_argument("--format", choices=formats, default=formats[0])
    p.add_argument("--out", help="output file (default stdout)")


def _add_grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta-min", type=float, default=-2.0)
    p.add_argument("--delta-max", type=float, default=2.0)
    p.add_argument("--points", type=int, default=801)


def _network(args) -> ModeNetwork:
    if args.spec:
        with open(args.spec) as fh:
            return pio.load_network(fh.read())
    preset = args.preset or "t-amp"
    kappa = TWO_PI * args.kappa_mhz * 1e6
    omegas = [TWO_PI * w * 1e9 for w in args.omega_ghz]
    if preset in ("t-amp", "c-amp"):
        if len(omegas) < 4:
            raise ParamNetError("amplifier presets need four mode frequencies")
        family = preset[0].upper()
        kappas = (kappa,) * 4
        if args.gain_db is not None and args.forward_gain_db is not None:
            raise ParamNetError("give either --gain-db or --forward-gain-db, not both")
        if args.gain_db is not None:
            g = _db_to_linear(args.gain_db)
        else:
            fwd = _db_to_linear(20.0 if args.forward_gain_db is None else args.forward_gain_db)
            g = catalog.per_coupling_gain_for(family, fwd, args.conversion, kappas)
        params = catalog.AmpParams(g, args.conversion, kappas, tuple(omegas[:4]))
        return catalog.build_amp(family, params)
    gain = _db_to_linear(20.0 if args.gain_db is None else args.gain_db)
    if preset == "squeezer":
        return catalog.build_squeezer(gain, (kappa, kappa), omegas[:2])
    if preset == "2pa":
        return catalog.build_2pa(gain, (kappa, kappa), omegas[:2])
    if preset == "converter":
        return catalog.build_converter(args.conversion, (kappa, kappa), omegas[:2])
    return catalog.build_circulator3((kappa,) * 3, omegas[:3])


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _matrix_json(S: ScatteringMatrix) -> dict:
    return {
        "signature": list(S.signature),
        "delta": S.delta,
        "re": S.entries.real.tolist(),
        "im": S.entries.imag.tolist(),
    }


def _carrier_comments(net: ModeNetwork) -> list[str]:
    lines = [TOUCHSTONE_CAVEAT]
    kb = net.kappa_bar
    lines.append(f"detuning unit kappa_bar/2pi = {pio.fmt(kb / TWO_PI / 1e9)} GHz")
    for k, m in enumerate(net.modes, start=1):
        conj = " (conjugated)" if m.conjugated else ""
        lines.append(f"port {k}: carrier {pio.fmt(m.omega / TWO_PI / 1e9)} GHz{conj}")
    for pl in catalog.pump_schedule(net):
        lines.append(
            f"pump {pl.pair[0]}-{pl.pair[1]} {pl.kind}: {pio.fmt(pl.pump_frequency / TWO_PI / 1e9)} GHz, "
            f"phase {pio.fmt(pl.phase)} rad"
        )
    return lines


def cmd_build(args) -> str:
    return pio.dump_network(_network(args)) + "\n"


def cmd_sweep(args) -> str:
    net = _network(args)
    res = analysis.sweep(net, args.delta_min, args.delta_max, args.points, workers=args.workers)
    if args.format == "csv":
        return pio.sweep_to_csv(res)
    if args.format == "json":
        return pio.sweep_to_json(res) + "\n"
    buf = io.StringIO()
    freqs = [d * net.kappa_bar / TWO_PI / 1e9 for d in res.grid]
    pio.write_touchstone(freqs, [m.entries for m in res.matrices], buf, _carrier_comments(net))
    return buf.getvalue()


def cmd_gainsweep(args) -> str:
    family = args.family.upper()
    grid = np.arange(args.gain_db_min, args.gain_db_max + 0.5 * args.gain_db_step, args.gain_db_step)
    kappas = (TWO_PI * args.kappa_mhz * 1e6,) * 4
    rows = analysis.gain_sweep(family, [_db_to_linear(g) for g in grid], args.conversion, kappas)
    if args.format == "json":
        return json.dumps([vars(r) for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    buf.write("gain_db,S11_db,S22_db,S12_db,S21_db,near_singular\n")
    for g_db, r in zip(grid, rows):
        vals = [analysis.to_db(v) for v in (r.s11, r.s22, r.s12, r.s21)]
        buf.write(",".join([pio.fmt(g_db)] + [pio.fmt(v) for v in vals] + [str(int(r.near_singular))]) + "\n")
    return buf.getvalue()


def cmd_bandwidth(args) -> str:
    net = _network(args)
    S0 = scattering(net, 0.0)
    g_fwd = S0.power(2, 1)
    conds = tuple(args.conditions) if args.conditions else analysis.CONDITIONS
    if net.n_modes == 2 and not args.conditions:
        conds = ("S21",)
    crit = analysis.BandwidthCriteria(g_fwd, match_max=args.match_max, conditions=conds)
    rep = analysis.bandwidth(net, crit, span=args.span, points=args.points)
    doc = {
        "G_fwd": rep.G_fwd,
        "per_condition": {k: list(v) for k, v in rep.per_condition.items()},
        "widths": {k: rep.condition_width(k) for k in rep.per_condition},
        "overall": list(rep.overall),
        "width": rep.width,
        "gbp": rep.gbp,
        "other_regions": {k: [list(r) for r in v] for k, v in rep.other_regions.items()},
        "truncated": list(rep.truncated),
    }
    return json.dumps(doc, indent=1) + "\n"


def cmd_noise(args) -> str:
    net = _network(args)
    rep = analysis.noise_report(net, args.delta)
    return f"delta {pio.fmt(rep.delta)}\nn_ba {pio.fmt(rep.n_ba)}\nn_add {pio.fmt(rep.n_add)}\n"


def cmd_synth(args) -> str:
    with open(args.s_matrix) as fh:
        spec = pio.SMatrixFile.model_validate_json(fh.read())
    S = spec.matrix()
    sigma = DampingMatrix(spec.kappas() / 2.0)
    M = synthesize_couplings(S, sigma)
    doc = {"coupling_re": M.entries.real.tolist(), "coupling_im": M.entries.imag.tolist()}
    try:
        net = network_from_coupling_matrix(M, sigma, S.signature)
        doc["network"] = json.loads(pio.dump_network(net))
    except ParamNetError as exc:
        doc["network"] = None
        doc["note"] = str(exc)
    return json.dumps(doc, indent=1) + "\n"


def cmd_terminate(args) -> str:
    net = _network(args)
    S = scattering(net, args.delta * net.kappa_bar)
    reduced = composition.terminate(S, args.terminate or [])
    doc = _matrix_json(reduced)
    if args.terminate:
        doc["stability_margin"] = composition.stability_margin(net, args.terminate)
    return json.dumps(doc, indent=1) + "\n"


def _load_smatrix(path: str) -> ScatteringMatrix:
    with open(path) as fh:
        return pio.SMatrixFile.model_validate_json(fh.read()).matrix()


def cmd_cascade(args) -> str:
    if args.circ_amp is not None:
        S = composition.circulator_amp_equivalent(args.circ_amp)
    else:
        if not (args.first and args.second):
            raise ParamNetError("cascade needs --circulator-amp G or both --first and --second")
        pairs = [tuple(int(v) for v in c.split("=")) for c in args.connect]
        S = composition.cascade(
            _load_smatrix(args.first),
            [p for p, _ in pairs],
            _load_smatrix(args.second),
            [q for _, q in pairs],
        )
    return json.dumps(_matrix_json(S), indent=1) + "\n"


def cmd_feasibility(args) -> str:
    lines = []
    for sig in synthesis.CANDIDATE_BASES:
        v = synthesis.basis_feasibility(sig)
        label = "(" + ",".join("+" if s > 0 else "-" for s in sig) + ")"
        lines.append(f"{label} {v.status.value} {v.witness}")
    return "\n".join(lines) + "\n"


def cmd_pumps(args) -> str:
    net = _network(args)
    buf = io.StringIO()
    buf.write("pair,kind,magnitude_mhz,phase_rad,pump_ghz\n")
    for pl in catalog.pump_schedule(net):
        buf.write(
            ",".join(
                [
                    f"{pl.pair[0]}-{pl.pair[1]}",
                    pl.kind,
                    pio.fmt(pl.magnitude / TWO_PI / 1e6),
                    pio.fmt(pl.phase),
                    pio.fmt(pl.pump_frequency / TWO_PI / 1e9),
                ]
            )
            + "\n"
        )
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="paramnet", description="Parametric mode-network scattering tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="emit a network spec JSON")
    _add_network_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("sweep", help="S matrix versus normalized detuning")
    _add_network_args(p)
    _add_grid_args(p)
    _add_output_args(p)
    p.add_argument("--workers", type=int, default=None, help="threads for the sweep")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gainsweep", help="resonant response versus per-coupling gain")
    p.add_argument("--family", choices=("t", "c", "T", "C"), default="t")
    p.add_argument("--gain-db-min", type=float, default=0.5)
    p.add_argument("--gain-db-max", type=float, default=40.0)
    p.add_argument("--gain-db-step", type=float, default=0.5)
    p.add_argument("--conversion", type=float, default=0.99)
    p.add_argument("--kappa-mhz", type=float, default=100.0)
    _add_output_args(p, ("csv", "json"))
    p.set_defaults(func=cmd_gainsweep)

    p = sub.add_parser("bandwidth", help="usable band around resonance")
    _add_network_args(p)
    p.add_argument("--match-max", type=float, default=0.01)
    p.add_argument("--conditions", nargs="+", choices=analysis.CONDITIONS)
    p.add_argument("--span", type=float, default=2.0)
    p.add_argument("--points", type=int, default=801)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bandwidth)

    p = sub.add_parser("noise", help="back-action and added noise")
    _add_network_args(p)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("synth", help="couplings that realize a target S matrix")
    p.add_argument("--s-matrix", required=True, help='JSON {"re": [[..]], "im": [[..]], "signature": [..]}')
    p.add_argument("--out")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("terminate", help="load ports and reduce")
    _add_network_args(p)
    p.add_argument("--terminate", action="append", type=_parse_termination, metavar="PORT=R_RE,R_IM")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_terminate)

    p = sub.add_parser("cascade", help="connect two S matrices")
    p.add_argument("--circulator-amp", dest="circ_amp", type=float, metavar="G", help="circulator + 2PA + circulator equivalent")
    p.add_argument("--first")
    p.add_argument("--second")
    p.add_argument("--connect", action="append", default=[], metavar="P=Q")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cascade)

    p = sub.add_parser("feasibility", help="screen the six 4-port conjugation bases")
    p.add_argument("--out")
    p.set_defaults(func=cmd_feasibility)

    p = sub.add_parser("pumps", help="pump frequencies and phases")
    _add_network_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pumps)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = args.func(args)
        _emit(text, getattr(args, "out", None))
    except (ValueError, OSError) as exc:
        # ParamNetError, pydantic's ValidationError and JSONDecodeError are all ValueErrors
        msg = " ".join(str(exc).split())
        print(f"paramnet: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
