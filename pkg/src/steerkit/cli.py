"""steerkit command line.

Results go to stdout as JSON (or to ``-o`` files). Failures print a JSON
object ``{"error", "message", "exit_code"}`` on stderr and exit with
2 (validation), 3 (insufficient data), 4 (out of regime) or 5 (internal).
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from pathlib import Path

from . import io
from .criteria import ensemble_points, n_povm, n_restricted_pvm
from .errors import SteerkitError, ValidationError
from .expsim import heralding_efficiency, steering_data, steering_subtable
from .pipeline import Scenario, preset_path, run_scenario, simulate_scenario
from .qstate import BlochForm, bloch_decompose, canonical_form, closest_werner, fidelity, werner_state
from .steering_game import platonic_settings, steering_bound, steering_parameter
from .svg import ensemble_svg
from .tomo import DEFAULT_SAMPLES, ESTIMATORS, mc_uncertainty, reconstruct


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def _bloch_dict(bf: BlochForm) -> dict:
    return {
        "a": bf.a.tolist(),
        "b": bf.b.tolist(),
        "T": bf.T.tolist(),
        "canonical": bf.canonical,
        "rot_a": bf.rot_a.tolist(),
        "rot_b": bf.rot_b.tolist(),
    }


def _emit(obj, out=None) -> None:
    text = io.dumps(obj)
    if out:
        io.atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _scenario(arg: str) -> Scenario:
    p = Path(arg)
    for name in (arg, f"{arg}.json"):
        if not p.exists() and preset_path(name).is_file():
            p = preset_path(name)
    if not p.exists():
        raise ValidationError(f"scenario file {arg} not found")
    return Scenario.load(p)


def cmd_werner(args):
    rho = werner_state(args.mu)
    if args.output:
        io.write_state(args.output, rho)
    else:
        _emit(io.state_to_dict(rho))


def cmd_decompose(args):
    _emit(_bloch_dict(bloch_decompose(io.read_state(args.state))))


def cmd_canonical(args):
    _emit(_bloch_dict(canonical_form(bloch_decompose(io.read_state(args.state)))))


def cmd_fidelity(args):
    _emit({"fidelity": fidelity(io.read_state(args.a), io.read_state(args.b))})


def cmd_closest_werner(args):
    mu, fid = closest_werner(io.read_state(args.state))
    _emit({"mu": mu, "fidelity": fid})


def cmd_check_nonsteer(args):
    bf = canonical_form(bloch_decompose(io.read_state(args.state)))
    fn = n_povm if args.variant == "povm" else n_restricted_pvm
    _emit(fn(bf, args.eps, args.party).to_dict(), args.output)


def cmd_bound(args):
    settings = platonic_settings(args.n)
    _emit({"n": args.n, "eps_a": args.eps_a, "bound": steering_bound(settings, args.eps_a), "settings": settings.to_list()})


def cmd_steer_test(args):
    header = io.sniff_header(args.counts)
    if header == io.STEERING_HEADER:
        data = io.read_steering(args.counts)
        eps_a = args.eps_a
        if eps_a is None:
            raise ValidationError("--eps-a is required for setting,a,b,count files")
    else:
        settings = platonic_settings(args.n)
        table = steering_subtable(io.read_counts(args.counts), settings)
        data = steering_data(table, settings)
        eps_a = args.eps_a if args.eps_a is not None else heralding_efficiency(table).eps_a
    S, dS = steering_parameter(data)
    bound = steering_bound(platonic_settings(data.n_settings), eps_a)
    _emit({
        "S": S, "delta_S": dS, "bound": bound, "eps_a": eps_a,
        "sd_margin": (S - bound) / dS if dS > 0 else None,
        "violation": S > bound, "correlators": data.correlators.tolist(),
    })


def cmd_simulate(args):
    sc = _scenario(args.scenario)
    tomo, steer = simulate_scenario(sc)
    table = {"tomo": tomo, "steer": steer, "both": None}[args.kind] or tomo.concat(steer)
    io.write_counts(args.output, table)
    _emit({"output": str(args.output), "pairs": len(table.pairs), "coincidences": int(table.coincidences().sum())})


def cmd_tomo(args):
    rho = reconstruct(io.read_counts(args.counts))
    if args.output:
        io.write_state(args.output, rho)
    else:
        _emit(io.state_to_dict(rho))


def cmd_mc(args):
    if args.estimator not in ESTIMATORS:
        raise ValidationError(f"unknown estimator {args.estimator!r}; choose from {sorted(ESTIMATORS)}")
    summary = mc_uncertainty(io.read_counts(args.counts), args.estimator, args.samples, args.seed)
    _emit(summary.to_dict(), args.output)


def cmd_verdict(args):
    verdict = run_scenario(_scenario(args.scenario), n_samples=args.samples)
    _emit(verdict.to_dict(), args.output)


FIG3_STEER_HEADER = ["scenario", "eps_a", "S", "delta_S", "bound"]
FIG3_NONSTEER_HEADER = ["scenario", "mu", "eps_b", "N", "delta_N", "conclusive"]


def cmd_figure3(args):
    d = Path(args.scenario_set)
    if not d.is_dir() and preset_path(args.scenario_set).is_dir():
        d = preset_path(args.scenario_set)
    files = sorted(d.glob("*.json"))
    if not files:
        raise ValidationError(f"no scenario files in {args.scenario_set}")
    steer_buf, ns_buf = _io.StringIO(), _io.StringIO()
    ws, wn = csv.writer(steer_buf, lineterminator="\n"), csv.writer(ns_buf, lineterminator="\n")
    ws.writerow(FIG3_STEER_HEADER)
    wn.writerow(FIG3_NONSTEER_HEADER)
    for f in files:
        sc = Scenario.load(f)
        v = run_scenario(sc, n_samples=args.samples)
        x = v.extras
        ws.writerow([sc.name, x["eps_a"], v.steer_ab.S, v.steer_ab.delta_S, v.steer_ab.bound])
        wn.writerow([sc.name, x["closest_werner_mu"], x["eps_b"], v.nonsteer_ba.n_value, v.delta_N, int(v.conclusive)])
    out = Path(args.output)
    io.atomic_write(out / "figure3_steering.csv", steer_buf.getvalue())
    io.atomic_write(out / "figure3_nonsteer.csv", ns_buf.getvalue())
    _emit({"steering": str(out / "figure3_steering.csv"), "nonsteer": str(out / "figure3_nonsteer.csv"), "scenarios": len(files)})


def cmd_figure_s2(args):
    bf = canonical_form(bloch_decompose(io.read_state(args.state)))
    ens = ensemble_points(bf, args.dirs, args.eps)
    prefix = Path(args.output)
    csv_path, svg_path = prefix.with_suffix(".csv"), prefix.with_suffix(".svg")
    io.atomic_write(csv_path, io.ensemble_to_csv(ens))
    io.atomic_write(svg_path, ensemble_svg(ens))
    _emit({"csv": str(csv_path), "svg": str(svg_path), "n_value": ens.n_value, "points": len(ens)})


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="steerkit", description="One-way EPR steering analysis for two-qubit states with loss.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("werner", help="write a Werner state")
    s.add_argument("--mu", type=float, required=True)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_werner)

    for name, fn, hlp in (("decompose", cmd_decompose, "Bloch vectors and correlation matrix"),
                          ("canonical", cmd_canonical, "canonical (diagonal-T) frame"),
                          ("closest-werner", cmd_closest_werner, "best-fidelity Werner state")):
        s = sub.add_parser(name, help=hlp)
        s.add_argument("state")
        s.set_defaults(func=fn)

    s = sub.add_parser("fidelity", help="Uhlmann fidelity of two states")
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_fidelity)

    s = sub.add_parser("check-nonsteer", help="sufficient nonsteerability criterion")
    s.add_argument("state")
    s.add_argument("--eps", type=float, required=True, help="heralding efficiency of the steering party")
    s.add_argument("--variant", choices=["povm", "pvm"], default="povm")
    s.add_argument("--party", choices=["alice", "bob"], default="bob", help="steering party")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_check_nonsteer)

    s = sub.add_parser("bound", help="optimal-cheating steering bound")
    s.add_argument("--n", type=int, default=6)
    s.add_argument("--eps-a", type=float, required=True)
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("steer-test", help="steering parameter against the bound")
    s.add_argument("counts")
    s.add_argument("--eps-a", type=float)
    s.add_argument("--n", type=int, default=6)
    s.set_defaults(func=cmd_steer_test)

    s = sub.add_parser("simulate", help="simulate counts for a scenario")
    s.add_argument("--scenario", required=True)
    s.add_argument("--kind", choices=["both", "tomo", "steer"], default="both")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("tomo", help="reconstruct a state from counts")
    s.add_argument("counts")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_tomo)

    s = sub.add_parser("mc", help="Poisson Monte Carlo uncertainty of an estimator")
    s.add_argument("counts")
    s.add_argument("--estimator", required=True)
    s.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_mc)

    s = sub.add_parser("verdict", help="full one-way steering pipeline for a scenario")
    s.add_argument("--scenario", required=True)
    s.add_argument("--samples", type=int)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_verdict)

    s = sub.add_parser("figure3", help="sweep panels over a directory of scenarios")
    s.add_argument("--scenario-set", required=True)
    s.add_argument("--samples", type=int)
    s.add_argument("-o", "--output", default=".")
    s.set_defaults(func=cmd_figure3)

    s = sub.add_parser("figure-s2", help="(b.x, ||Tx||) ensemble with the bound curve")
    s.add_argument("state")
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--dirs", type=int, default=625)
    s.add_argument("-o", "--output", default="ensemble")
    s.set_defaults(func=cmd_figure_s2)
    return p


def _fail(exc: BaseException, code: int) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(payload) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except SteerkitError as exc:
        return _fail(exc, exc.exit_code)
    except (ValueError, KeyError, OSError) as exc:
        return _fail(exc, 2)
    except Exception as exc:  # noqa: BLE001
        return _fail(exc, 5)
    return 0


if __name__ == "__main__":
    sys.exit(main())
