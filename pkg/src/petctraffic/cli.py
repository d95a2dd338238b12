"""Command-line entry point.

Subcommands cover the pipeline stage by stage — discretize, contraction,
abstract, analyze, verify — plus ``casestudy``, which runs everything
from the bundled two-dimensional example configuration.

Exit codes: 0 success; 2 configuration error; 3 solver transport error;
4 solver undecided/abort; 5 verification mismatch.
"""

from __future__ import annotations

import argparse
import importlib.resources
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import abstraction, analysis, contraction, satcheck, semantics, verify
from .satcheck import SolverTransportError, SolverUnknownError
from .sysmodel import (DiscretizedPetc, PetcSystem, PredictiveTriggerSpec,
                       build_predictive_Q, rationalize)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TRANSPORT = 3
EXIT_UNDECIDED = 4
EXIT_MISMATCH = 5


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration


def _parse_number(s: str) -> Fraction:
    return Fraction(s)


def load_config(path: str | Path | None) -> dict:
    """Read a JSON config; numeric literals become exact Fractions."""
    if path is None:
        ref = importlib.resources.files("petctraffic.data") / "casestudy.json"
        text = ref.read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(text, parse_float=_parse_number,
                         parse_int=_parse_number)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"bad JSON in config: {exc}") from exc
    _validate_config(cfg)
    return cfg


_REQUIRED = ("A", "B", "K", "P_lyap", "h", "k_bar", "r")


def _validate_config(cfg: dict) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    for key in _REQUIRED:
        if key not in cfg:
            raise ConfigError(f"missing config field {key!r}")
    direct = "Q_trig" in cfg
    predictive = any(k in cfg for k in ("Q_lyap", "rho"))
    if direct and predictive:
        raise ConfigError(
            "give either Q_trig or the predictive trigger data "
            "{Q_lyap, rho}, not both")
    if not direct:
        for key in ("Q_lyap", "rho"):
            if key not in cfg:
                raise ConfigError(f"predictive trigger needs {key!r}")
    solver = cfg.get("solver", {})
    if not isinstance(solver, dict):
        raise ConfigError("solver section must be an object")


def solver_command(cfg: dict) -> list[str] | None:
    solver = cfg.get("solver", {})
    path = solver.get("path")
    if path:
        return [str(path)] + [str(a) for a in solver.get("args", [])]
    return None  # satcheck's default (bundled or PETCTRAFFIC_SOLVER)


def solver_budget(cfg: dict) -> float:
    return float(cfg.get("solver", {}).get("per_query_budget_s", 30))


def solver_workers(cfg: dict) -> int:
    return int(cfg.get("solver", {}).get("workers", 1))


def build_system(cfg: dict) -> PetcSystem:
    try:
        k_bar = int(cfg["k_bar"])
        common = dict(A=_np(cfg["A"]), B=_np(cfg["B"]), K=_np(cfg["K"]),
                      P=_np(cfg["P_lyap"]), h=Fraction(cfg["h"]),
                      k_bar=k_bar, r=Fraction(cfg["r"]),
                      V0=Fraction(cfg.get("V0", 1)))
        if "Q_trig" in cfg:
            return PetcSystem(Q_trig=_np(cfg["Q_trig"]), **common)
        spec = PredictiveTriggerSpec(P_lyap=_np(cfg["P_lyap"]),
                                     Q_lyap=_np(cfg["Q_lyap"]),
                                     rho=float(cfg["rho"]))
        placeholder = PetcSystem(
            Q_trig=np.zeros((2 * len(cfg["A"]), 2 * len(cfg["A"]))), **common)
        q = build_predictive_Q(spec, placeholder)
        return PetcSystem(Q_trig=q, **common)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad system data: {exc}") from exc


def _np(rows) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in rows], dtype=float)


def make_disc(cfg: dict) -> DiscretizedPetc:
    sys_ = build_system(cfg)
    if "h_P" in cfg:
        h_p = Fraction(cfg["h_P"])
    else:
        h_p = contraction.compute_hP(
            sys_, resolution=Fraction(cfg.get("hP_resolution",
                                              Fraction(1, 100))))
    return rationalize(sys_, h_p)


# ---------------------------------------------------------------------------
# pipeline pieces


def run_contraction(cfg: dict, disc: DiscretizedPetc):
    cert = contraction.compute_a(
        disc, tol=Fraction(cfg.get("a_tol", Fraction(1, 1000))),
        budget=solver_budget(cfg), solver_cmd=solver_command(cfg),
        workers=solver_workers(cfg))
    n = contraction.compute_N(cert.a, disc.r)
    k_size = disc.k_bar - disc.k_lo + 1
    bounds = contraction.trace_count_bounds(max(k_size, 2), n)
    return cert, n, bounds


def build_models(cfg: dict, disc: DiscretizedPetc, n: int, prune: str,
                 assume_sat: bool):
    kwargs = dict(budget=solver_budget(cfg), solver_cmd=solver_command(cfg),
                  workers=solver_workers(cfg), assume_sat=assume_sat)
    bisim = abstraction.build_mpetc_bisim(disc, n, prune=prune, **kwargs)
    sim = abstraction.build_petc_sim(disc, bisim, **kwargs)
    return bisim, sim


def _write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)


def export_models(out: Path, bisim, sim) -> None:
    _write(out / "mpetc_bisim.json", abstraction.export_model(bisim, "json"))
    _write(out / "mpetc_bisim.dot", abstraction.export_model(bisim, "dot"))
    _write(out / "petc_sim.json", abstraction.export_model(sim, "json"))
    _write(out / "petc_sim.dot", abstraction.export_model(sim, "dot"))


def load_models(out: Path):
    bisim = abstraction.import_model((out / "mpetc_bisim.json").read_bytes())
    sim = abstraction.import_model((out / "petc_sim.json").read_bytes())
    return bisim, sim


# ---------------------------------------------------------------------------
# subcommands


def cmd_discretize(args) -> int:
    cfg = load_config(args.config)
    disc = make_disc(cfg)
    print(f"h = {disc.h} ({float(disc.h):.6g} s), k_bar = {disc.k_bar}, "
          f"h_P = {disc.h_P} ({float(disc.h_P):.6g} s), k_lo = {disc.k_lo}")
    for k in disc.K_range:
        m = np.array([[float(v) for v in row] for row in disc.M[k]])
        n_ = np.array([[float(v) for v in row] for row in disc.N[k]])
        with np.printoptions(precision=6, suppress=True):
            print(f"M({k}) =\n{m}")
            print(f"N({k}) =\n{n_}")
    return EXIT_OK


def cmd_contraction(args) -> int:
    cfg = load_config(args.config)
    disc = make_disc(cfg)
    cert, n, bounds = run_contraction(cfg, disc)
    print(f"a   = {float(cert.a):.6g} (tol {float(cert.tol):.1e}, "
          f"{len(cert.bisection_trace)} bisection probes)")
    print(f"h_P = {float(disc.h_P):.6g}")
    print(f"k_lo = {disc.k_lo}")
    print(f"N   = {n}")
    print(f"word bound (closed form)   = {bounds[0]:.3e}")
    print(f"word bound (geometric sum) = {bounds[1]:.3e}")
    return EXIT_OK


def cmd_abstract(args) -> int:
    cfg = load_config(args.config)
    disc = make_disc(cfg)
    out = Path(args.out)
    if args.kind == "trivial":
        _, n, _ = run_contraction(cfg, disc)
        model = abstraction.build_trivial(
            list(disc.K_range), n, h=disc.h, h_P=disc.h_P)
        _write(out / "trivial.json", abstraction.export_model(model, "json"))
        _write(out / "trivial.dot", abstraction.export_model(model, "dot"))
        print(f"trivial model: {len(model.states)} states -> {out}")
        return EXIT_OK
    cert, n, _ = run_contraction(cfg, disc)
    bisim, sim = build_models(cfg, disc, n, args.prune, args.assume_sat)
    export_models(out, bisim, sim)
    print(f"bisimilar model: {bisim.n_states(False)} states (+ eps); "
          f"simulating model: {sim.n_states(False)} states -> {out}")
    if args.kind == "bisim":
        return EXIT_OK
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    disc = make_disc(cfg)
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    cert, n, bounds = run_contraction(cfg, disc)
    timings["contraction_s"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    bisim, sim = build_models(cfg, disc, n, args.prune, args.assume_sat)
    timings["abstraction_s"] = time.perf_counter() - t0
    rep = analysis.report(bisim, sim, cert.a, n, disc.k_lo, disc.r, disc.h,
                          bounds, timings)
    print(rep.render(), end="")
    if args.out:
        out = Path(args.out)
        export_models(out, bisim, sim)
        _write(out / "report.json", rep.to_json().encode())
        _write(out / "report.txt", rep.render().encode())
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    disc = make_disc(cfg)
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    if args.models:
        bisim, sim = load_models(Path(args.models))
    else:
        _, n, _ = run_contraction(cfg, disc)
        bisim, sim = build_models(cfg, disc, n, abstraction.PRUNE_PREFIX,
                                  False)
    rep1 = verify.check_bisim_sample(disc, bisim, args.samples, seed=seed)
    rep2 = verify.check_sim_petc(disc, sim, args.samples, args.steps,
                                 seed=seed + 1)
    print(rep1.render())
    print(rep2.render())
    if not (rep1.passed and rep2.passed):
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_casestudy(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    timings: dict[str, float] = {}
    t_all = time.perf_counter()

    disc = make_disc(cfg)
    t0 = time.perf_counter()
    cert, n, bounds = run_contraction(cfg, disc)
    timings["contraction_s"] = time.perf_counter() - t0
    print(f"a = {float(cert.a):.6g}, h_P = {float(disc.h_P):.6g}, "
          f"k_lo = {disc.k_lo}, N = {n}")

    t0 = time.perf_counter()
    bisim, sim = build_models(cfg, disc, n, abstraction.PRUNE_PREFIX, False)
    timings["abstraction_s"] = time.perf_counter() - t0
    print(f"bisimilar words: {bisim.n_states(False)} (+ eps), "
          f"simulating words: {sim.n_states(False)}")

    rep = analysis.report(bisim, sim, cert.a, n, disc.k_lo, disc.r, disc.h,
                          bounds, timings)
    export_models(out, bisim, sim)
    _write(out / "report.json", rep.to_json().encode())
    _write(out / "report.txt", rep.render().encode())

    # sample trajectory from the arg-max word's witness, for plotting
    x0 = sim.witnesses.get(rep.f_star_word)
    if x0 is not None:
        trace = semantics.simulate_trace(disc, x0, horizon=3 * rep.T_star_sim)
        _write(out / "trace.csv", trace.to_csv(disc).encode())

    seed = int(cfg.get("seed", 0))
    rep1 = verify.check_bisim_sample(disc, bisim, args.samples, seed=seed)
    rep2 = verify.check_sim_petc(disc, sim, args.samples, args.steps,
                                 seed=seed + 1)
    timings["total_s"] = time.perf_counter() - t_all
    print(rep.render(), end="")
    print(rep1.render())
    print(rep2.render())
    print(f"total wall time: {timings['total_s']:.1f} s")
    if not (rep1.passed and rep2.passed):
        return EXIT_MISMATCH
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="petctraffic",
        description="Finite traffic models and certified bounds for "
                    "event-triggered control loops")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        p = sub.add_parser(name, **kw)
        p.add_argument("--config", default=None,
                       help="JSON config (default: bundled case study)")
        p.set_defaults(fn=fn)
        return p

    add("discretize", cmd_discretize,
        help="print the k-step transition matrices and trigger forms")
    add("contraction", cmd_contraction,
        help="certify the decrease ratio, periodic period and horizon")

    p = add("abstract", cmd_abstract, help="build and export traffic models")
    p.add_argument("--kind", choices=["bisim", "petc-sim", "trivial"],
                   default="petc-sim")
    p.add_argument("--out", default="models")
    p.add_argument("--prune", choices=[abstraction.PRUNE_PREFIX,
                                       abstraction.PRUNE_FULL],
                   default=abstraction.PRUNE_PREFIX)
    p.add_argument("--assume-sat", action="store_true",
                   help="keep undecided words (over-approximating model)")

    p = add("analyze", cmd_analyze, help="build models and print the report")
    p.add_argument("--out", default=None)
    p.add_argument("--prune", choices=[abstraction.PRUNE_PREFIX,
                                       abstraction.PRUNE_FULL],
                   default=abstraction.PRUNE_PREFIX)
    p.add_argument("--assume-sat", action="store_true")

    p = add("verify", cmd_verify, help="randomized model validation")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--models", default=None,
                   help="directory with previously exported model JSON")

    p = add("casestudy", cmd_casestudy,
            help="full pipeline on the bundled example")
    p.add_argument("--out", default="casestudy_out")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--steps", type=int, default=20)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverTransportError as exc:
        print(f"solver transport error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except SolverUnknownError as exc:
        print(f"solver could not decide: {exc}", file=sys.stderr)
        return EXIT_UNDECIDED


if __name__ == "__main__":
    sys.exit(main())
