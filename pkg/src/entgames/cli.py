"""Command-line front end.

Subcommands: value, repeat, verify, simulate, sic.  Every run writes an
output directory (default out/<command>/<timestamp>-<seed>/) containing
manifest.json (command, config echo, seed, version, wall time, output paths)
and report.json.  report.json is byte-deterministic for a fixed seed; the
manifest holds the nondeterministic bookkeeping.

Exit codes: 0 success, 1 property violation, 2 input error, 3 budget.
"""

from __future__ import annotations

import argparse
import fnmatch
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import checks as checks_mod
from . import protocol as protocol_mod
from .config import VERSION, BudgetError
from .games import (
    classical_value,
    entangled_value_seesaw,
    game_to_json,
    load_game,
    majority_game,
    repeat,
    save_game,
)
from .sic import SuperposedState, build_decoupling, sic_terms


def _load_json(path: Path):
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(
            f"invalid JSON in {path}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _fresh_seed() -> int:
    return int(np.random.SeedSequence().entropy % (1 << 32))


def _out_dir(args, command: str, seed) -> Path:
    if args.out is not None:
        out = Path(args.out)
    else:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        out = Path("out") / command / f"{stamp}-{seed}"
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, command: str, config: dict, seed, t0: float,
                    outputs: list[str]) -> None:
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "version": VERSION,
        "wall_time_s": time.perf_counter() - t0,
        "outputs": outputs,
    }
    (out / "manifest.json").write_text(_canonical_json(manifest))


def cmd_value(args) -> int:
    t0 = time.perf_counter()
    g = load_game(args.game)
    seed = args.seed
    if args.mode == "entangled" and seed is None:
        seed = _fresh_seed()
    out = _out_dir(args, "value", 0 if seed is None else seed)
    report: dict = {"command": "value", "mode": args.mode, "game": g.name or ""}
    if args.mode == "classical":
        res = classical_value(g)
        report["value"] = res.value
        report["strategy"] = {
            "alice": list(res.strategy.alice),
            "bob": list(res.strategy.bob),
        }
        print(f"classical value: {res.value:.12g}")
    else:
        res = entangled_value_seesaw(g, d=args.d, restarts=args.restarts,
                                     iters=args.iters, seed=seed)
        report["value"] = res.value
        report["seed"] = seed
        report["d"] = args.d
        report["restarts"] = args.restarts
        report["iters"] = args.iters
        report["best_restart"] = res.best_restart
        report["traces"] = [[float(v) for v in tr] for tr in res.traces]
        print(f"entangled value (lower bound): {res.value:.12g}")
        for r, tr in enumerate(res.traces):
            print(f"  restart {r}: {tr[-1]:.12g} after {len(tr)} iterations")
    (out / "report.json").write_text(_canonical_json(report))
    cfg = {"game": str(args.game), "mode": args.mode, "d": args.d,
           "restarts": args.restarts, "iters": args.iters}
    _write_manifest(out, "value", cfg, seed, t0, ["report.json"])
    return 0


def cmd_repeat(args) -> int:
    t0 = time.perf_counter()
    g = load_game(args.game)
    if args.alpha is None:
        rep = repeat(g, args.n)
    else:
        rep = majority_game(g, args.n, args.alpha)
    out = _out_dir(args, "repeat", 0)
    save_game(rep, out / "game.json")
    report = {
        "command": "repeat", "n": args.n, "alpha": args.alpha,
        "k": rep.k, "l": rep.l, "name": rep.name or "",
    }
    (out / "report.json").write_text(_canonical_json(report))
    cfg = {"game": str(args.game), "n": args.n, "alpha": args.alpha}
    _write_manifest(out, "repeat", cfg, 0, t0, ["game.json", "report.json"])
    print(f"wrote {out / 'game.json'} ({rep.k} inputs, {rep.l} outputs per side)")
    return 0


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    seed = args.seed if args.seed is not None else _fresh_seed()
    names = list(checks_mod.REGISTRY)
    if args.filter:
        names = [n for n in names if fnmatch.fnmatch(n, args.filter)]
        if not names:
            raise ValueError(f"filter {args.filter!r} matches no checks")
    out = _out_dir(args, "verify", seed)
    reports = checks_mod.run_all(seed=seed, trials_per_check=args.trials,
                                 names=names, report_dir=out, jobs=args.jobs)
    (out / "report.json").write_text(checks_mod.reports_to_json(reports))
    checks_mod.reports_to_csv(reports, out / "report.csv")
    for rep in reports:
        print(f"{rep.name}: trials={rep.trials_run} violations={rep.violations} "
              f"worst_margin={rep.worst_margin:.3e}")
    outputs = ["report.json", "report.csv"]
    outputs += sorted(p.name for p in out.glob("counterexample_*.json"))
    cfg = {"trials": args.trials, "filter": args.filter, "jobs": args.jobs}
    _write_manifest(out, "verify", cfg, seed, t0, outputs)
    return 1 if checks_mod.any_violations(reports) else 0


def _model_from_doc(doc: dict, base_dir: Path, n: int):
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ValueError("model must be an object with a 'kind' field")
    kind = doc["kind"]
    if kind == "iid_bernoulli":
        return protocol_mod.IidBernoulli(w=float(doc["w"]))
    if kind == "win_all_or_partial":
        return protocol_mod.WinAllOrPartial(q=float(doc["q"]), f=float(doc["f"]))
    if kind == "strategy_backed":
        game = load_game(base_dir / doc["game"])
        res = entangled_value_seesaw(
            game, d=int(doc.get("d", 2)), restarts=int(doc.get("restarts", 8)),
            iters=int(doc.get("iters", 60)), seed=int(doc.get("strategy_seed", 0)))
        return protocol_mod.StrategyBacked(game, res.strategy, n)
    raise ValueError(f"unknown model kind {kind!r}")


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    path = Path(args.config)
    doc = _load_json(path)
    if not isinstance(doc, dict) or "model" not in doc:
        raise ValueError("simulate config must be an object with a 'model' field")
    try:
        config = protocol_mod.ProtocolConfig(
            n=int(doc["n"]), epsilon=float(doc["epsilon"]), t=float(doc["t"]),
            trials=int(doc["trials"]),
            seed=int(args.seed if args.seed is not None else doc.get("seed", 0)),
            variant=str(doc.get("variant", "general")),
            v_override=doc.get("v_override"),
            hash_bits=doc.get("hash_bits"),
        )
    except KeyError as exc:
        raise ValueError(f"simulate config missing field {exc.args[0]!r}") from exc
    model = _model_from_doc(doc["model"], path.parent, config.n)
    stats = protocol_mod.run_protocol(config, model)
    verdict = protocol_mod.guarantee_report(config, model, stats)
    out = _out_dir(args, "simulate", config.seed)
    report = {
        "command": "simulate",
        "config": config.to_dict(),
        "stats": stats.to_dict(),
        "guarantee": verdict.to_dict(),
    }
    (out / "report.json").write_text(_canonical_json(report))
    (out / "report.csv").write_text(
        "\n".join(protocol_mod.stats_csv_lines(stats, verdict.verdict)) + "\n")
    print(f"v = {stats.v_used}, success rate = {stats.p_succeed_hat:.6g} "
          f"(99% CI {stats.succeed_ci[0]:.6g}..{stats.succeed_ci[1]:.6g})")
    if stats.conditional_defined:
        print(f"P(most rounds won | success) = "
              f"{stats.p_mostwin_given_succeed_hat:.6g}")
    else:
        print("conditional statistic undefined: no successful trials")
    print(f"verdict: {verdict.verdict}")
    cfg = dict(doc)
    cfg["seed"] = config.seed
    _write_manifest(out, "simulate", cfg, config.seed, t0,
                    ["report.json", "report.csv"])
    return 1 if verdict.verdict == "violated" else 0


def _superposed_from_doc(doc: dict) -> SuperposedState:
    for key in ("p", "dims", "advice"):
        if key not in doc:
            raise ValueError(f"state spec missing field {key!r}")
    p = np.asarray(doc["p"], dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError("'p' must be a square matrix")
    k = p.shape[0]
    da, db = (int(d) for d in doc["dims"])
    raw = doc["advice"]
    if len(raw) != k or any(len(row) != k for row in raw):
        raise ValueError("'advice' must be a k x k grid of amplitude lists")
    states = np.zeros((k, k, da, db), dtype=complex)
    for x in range(k):
        for y in range(k):
            amps = np.asarray(raw[x][y], dtype=float)
            if amps.shape != (da * db, 2):
                raise ValueError(
                    f"advice[{x}][{y}] must list {da * db} [re, im] pairs")
            states[x, y] = (amps[:, 0] + 1j * amps[:, 1]).reshape(da, db)
    return SuperposedState.build(p, states)


def cmd_sic(args) -> int:
    t0 = time.perf_counter()
    doc = _load_json(Path(args.spec))
    omega = _superposed_from_doc(doc)
    term_x, term_y = sic_terms(omega)
    out = _out_dir(args, "sic", 0)
    report: dict = {
        "command": "sic",
        "objective": term_x + term_y,
        "term_x": term_x,
        "term_y": term_y,
    }
    print(f"objective: {term_x + term_y:.12g} (terms {term_x:.12g}, {term_y:.12g})")
    code = 0
    if args.decouple:
        dec = build_decoupling(omega)
        alice_ok = dec.fbar_alice <= 9.0 * dec.delta_x + 1e-6
        out_ok = dec.fbar_out <= 81.0 * dec.delta_in + 1e-6
        report["decoupling"] = {
            "delta_x": dec.delta_x,
            "delta_y": dec.delta_y,
            "delta_in": dec.delta_in,
            "fbar_alice": dec.fbar_alice,
            "fbar_out": dec.fbar_out,
            "alice_bound_9x": 9.0 * dec.delta_x,
            "combined_bound_81x": 81.0 * dec.delta_in,
            "alice_ok": bool(alice_ok),
            "combined_ok": bool(out_ok),
        }
        print(f"decoupling: fbar_alice = {dec.fbar_alice:.6g} "
              f"<= 9*delta_x = {9 * dec.delta_x:.6g}: "
              f"{'ok' if alice_ok else 'VIOLATED'}")
        print(f"decoupling: fbar_out = {dec.fbar_out:.6g} "
              f"<= 81*delta = {81 * dec.delta_in:.6g}: "
              f"{'ok' if out_ok else 'VIOLATED'}")
        if not (alice_ok and out_ok):
            code = 1
    (out / "report.json").write_text(_canonical_json(report))
    cfg = {"spec": str(args.spec), "decouple": bool(args.decouple)}
    _write_manifest(out, "sic", cfg, 0, t0, ["report.json"])
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="entgames",
        description="Values, repetitions, inequality runs, superposed-state "
                    "diagnostics, and referee-protocol simulations for "
                    "two-player games.")
    p.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("value", help="classical or entangled value of a game")
    sp.add_argument("game", help="game JSON file")
    sp.add_argument("--mode", choices=["classical", "entangled"],
                    default="classical")
    sp.add_argument("--d", type=int, default=2, help="local dimension")
    sp.add_argument("--restarts", type=int, default=20)
    sp.add_argument("--iters", type=int, default=100)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_value)

    sp = sub.add_parser("repeat", help="n-fold repetition or majority game")
    sp.add_argument("game", help="game JSON file")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--alpha", type=float, default=None,
                    help="win fraction threshold; omitted means win-all")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_repeat)

    sp = sub.add_parser("verify", help="run the randomized inequality suite")
    sp.add_argument("--trials", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--filter", default=None, help="glob over check names")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("simulate", help="referee-protocol Monte Carlo")
    sp.add_argument("config", help="protocol config JSON file")
    sp.add_argument("--seed", type=int, default=None,
                    help="override the seed in the config file")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sic", help="superposed-state objective and decoupling")
    sp.add_argument("spec", help="superposed-state spec JSON file")
    sp.add_argument("--decouple", action="store_true")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_sic)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc.filename}: file not found", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
