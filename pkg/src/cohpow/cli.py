"""Command line: ``cohpow <verb> ...``, JSON on stdout (or --out)."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from . import avoidsucc, cohesive, formulas as fm, harness, orders, pcf, power, structures
from .cohesive import ArithmeticR, Verdict

GLOBAL_FLAGS = {
    "window": "window_bound", "steps": "step_budget", "tail": "tail_window",
    "cut": "cut", "stages": "stages", "seed": "seed",
}


def _globals() -> argparse.ArgumentParser:
    g = argparse.ArgumentParser(add_help=False)
    for flag in GLOBAL_FLAGS:
        g.add_argument(f"--{flag}", type=int, default=argparse.SUPPRESS)
    g.add_argument("--out", default=argparse.SUPPRESS, help="write JSON here instead of stdout")
    g.add_argument("--config", default=argparse.SUPPRESS, help="key=value file; flags override it")
    return g


def build_parser() -> argparse.ArgumentParser:
    g = _globals()
    p = argparse.ArgumentParser(prog="cohpow", parents=[g],
                                description="Cohesive powers of computable linear orders.")
    sub = p.add_subparsers(dest="verb", required=True)

    m = sub.add_parser("maximal", parents=[g], help="maximal-set approximation summary")
    m.add_argument("--markers", type=int, default=10)
    m.add_argument("--ce", type=int, default=16, help="cohesiveness report over the first K c.e. sets")

    o = sub.add_parser("order", parents=[g], help="inspect a computable order")
    o.add_argument("name", choices=orders.ORDER_NAMES)
    o.add_argument("--compare", nargs=2, type=int, metavar=("X", "Y"))
    o.add_argument("--first", type=int, default=0, help="list the first K domain elements")
    o.add_argument("--axioms", type=int, default=0, help="check the axioms on [0, N]")

    w = sub.add_parser("power", parents=[g], help="compare elements of a cohesive power")
    w.add_argument("order", choices=orders.ORDER_NAMES)
    w.add_argument("op", choices=("less", "eq", "domain", "succ", "pred", "blocks"))
    w.add_argument("elements", nargs="+", help="const:<n>, id, 2id, prog:<i>, compose:<i>:<j>")

    f = sub.add_parser("formula", parents=[g], help="parse, classify and evaluate a formula")
    f.add_argument("text")
    f.add_argument("--order", choices=orders.ORDER_NAMES)
    f.add_argument("--assign", action="append", default=[], metavar="VAR=VALUE",
                   help="a natural for the base order, an element with --power")
    f.add_argument("--bound", type=int, default=100)
    f.add_argument("--complete", action="store_true", help="treat the bounded search as exhaustive")
    f.add_argument("--power", action="store_true", help="evaluate in the power instead of the base")

    a = sub.add_parser("ma", parents=[g], help="the ternary-relation structures")
    asub = a.add_subparsers(dest="action", required=True)
    for name in ("build", "check", "psi"):
        q = asub.add_parser(name, parents=[g])
        q.add_argument("--instance", choices=("d", "c"), default="d")
        q.add_argument("--bound", type=int, default=200)
        q.add_argument("--at", type=int, default=500, help="snapshot stage of the D-instance")

    l5 = sub.add_parser("lemma5", parents=[g], help="the successor-avoiding construction")
    lsub = l5.add_subparsers(dest="action", required=True)
    r = lsub.add_parser("run", parents=[g], help="emit the action log as JSON lines")
    r.add_argument("--toy-c", action="store_true", help="use R = {3s+2} instead of the maximal set")
    s = lsub.add_parser("star", parents=[g])
    s.add_argument("--emax", type=int, default=8)
    s.add_argument("--nmax", type=int, default=500)
    s.add_argument("--rows", action="store_true", help="include every checked pair")
    b = lsub.add_parser("between", parents=[g])
    b.add_argument("--phi", required=True)

    e = sub.add_parser("exp", parents=[g], help="run an experiment and print its report")
    e.add_argument("name", choices=(*harness.EXPERIMENTS, "all"))
    return p


def config_from(args) -> harness.ExperimentConfig:
    text = Path(args.config).read_text() if getattr(args, "config", None) else None
    over = {GLOBAL_FLAGS[k]: getattr(args, k) for k in GLOBAL_FLAGS if hasattr(args, k)}
    return harness.make_config(text, out=getattr(args, "out", None), **over)


def _emit(obj, cfg: harness.ExperimentConfig, raw: Optional[str] = None):
    text = raw if raw is not None else json.dumps(harness._jsonable(obj), indent=2, sort_keys=True) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _verdict(v: Verdict) -> dict:
    return {"verdict": v.label, "horizon": v.horizon.as_dict(), "witness": v.witness, "detail": v.detail}


def cmd_maximal(args, cfg):
    approx = harness.maximal(cfg.stages)
    view = cohesive.settled_view(approx, cfg.horizon)
    rows = cohesive.cohesiveness_report(approx, args.ce, cfg.horizon)
    return {
        "stages": approx.stage,
        "enumerated": len(approx.member_stage),
        "view": {"window_bound": view.window_bound, "included": len(view.included),
                 "first_included": list(view.included[:20])},
        "markers": cohesive.marker_table(approx, args.markers),
        "cohesiveness": rows,
        "split_sets": [r["e"] for r in rows if r["split"]],
    }


def cmd_order(args, cfg):
    L = orders.get_order(args.name)
    out: dict = {"order": L.name}
    if args.compare:
        x, y = args.compare
        out["compare"] = {"x": x, "y": y, "less": L.less(x, y), "show": [L.show(x), L.show(y)]}
    if args.first:
        els = L.first_elements(args.first)
        out["first"] = [{"code": x, "show": L.show(x)} for x in els]
    if args.axioms:
        out["axioms"] = orders.axioms_check(L, L.domain_upto(args.axioms))
    return out


def cmd_power(args, cfg):
    L = orders.get_order(args.order)
    ctx = harness.context(cfg, L)
    els = [power.parse_element(ctx, t) for t in args.elements]
    need = {"less": 2, "eq": 2, "blocks": 2, "domain": 1, "succ": 1, "pred": 1}[args.op]
    if len(els) != need:
        raise SystemExit(f"{args.op} takes {need} element(s)")
    if args.op == "less":
        return _verdict(power.less_c(ctx, *els))
    if args.op == "eq":
        return _verdict(power.eq_c(ctx, *els))
    if args.op == "domain":
        return _verdict(power.domain_status(ctx, els[0]))
    if args.op == "blocks":
        return _verdict(power.blocks_far_apart(ctx, *els))
    if not args.order.startswith("thm4"):
        raise SystemExit("succ / pred are available on the thm4 orders only")
    r = (power.thm4_succ if args.op == "succ" else power.thm4_pred)(ctx, els[0])
    vals = ctx.values(r.element)
    return {**r.as_dict(), "tail_values": vals[-cfg.tail_window:]}


def _assignments(pairs: list[str]) -> dict[str, str]:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise SystemExit(f"bad --assign {item!r}; expected VAR=VALUE")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def cmd_formula(args, cfg):
    f = fm.parse(args.text)
    cls = fm.classify(f)
    out: dict = {"formula": fm.to_text(f), "class": cls.level, "sigma": cls.sigma, "pi": cls.pi,
                 "free": sorted(fm.free_vars(f))}
    if not args.order:
        return out
    L = orders.get_order(args.order)
    assign = _assignments(args.assign)
    if args.power:
        ctx = harness.context(cfg, L)
        env = {k: power.parse_element(ctx, v) for k, v in assign.items()}
        if cls.at_most_bc1:
            out["power"] = _verdict(fm.eval_power_bc1(ctx, f, env, complete=args.complete))
        elif not fm.free_vars(f):
            sample = harness._nat_elements()
            out["power"] = _verdict(fm.eval_power_prenex(ctx, f, sample, complete=args.complete))
        else:
            raise SystemExit("power evaluation needs a BC1 formula or a prenex sentence")
    else:
        env = {k: int(v) for k, v in assign.items()}
        # inner quantifiers search further so witnesses for outer ones fit
        out["base"] = _verdict(fm.eval_base(L, f, env, harness.prenex_bounds(f, args.bound),
                                            complete=args.complete))
    return out


def _ma_instance(args, cfg):
    if args.instance == "d":
        return structures.d_instance(stage=args.at)
    return structures.c_instance(harness.maximal(cfg.stages))


def cmd_ma(args, cfg):
    m = _ma_instance(args, cfg)
    if args.action == "build":
        stems = range(0, args.bound + 1, 2)
        return {
            "instance": m.name, "stage": m.stage,
            "in_A": [x for x in stems if m.in_A(x) is True],
            "in_A1": [x for x in stems if m.in_A1(x)],
            "unsettled": [x for x in stems if m.in_A(x) is None],
            "arrows": sorted(m.arrow_log(min(args.bound, 40)))[:400],
        }
    if args.action == "check":
        r = structures.check_facts_1_to_4(m, args.bound, m.stage)
        if args.instance == "d":
            r["fact5"] = structures.iso_MD_ME(structures.d_instance(4), structures.d_instance(8), args.bound)
        return r
    view = cohesive.settled_view(harness.maximal(cfg.stages), cfg.horizon).doubled()
    ctx = power.make_context(m, view, cfg.horizon)
    return structures.psi_experiments(ctx, harness.ma_elements(view, ctx), args.instance)


def cmd_lemma5(args, cfg):
    if args.action == "run":
        R = ArithmeticR(3, 2) if args.toy_c else avoidsucc.default_R(harness.maximal(cfg.stages))
        state = avoidsucc.run_construction(cfg.stages, R)
        return None, state.action_log_jsonl()
    cfg5 = harness.replace(cfg, emax=getattr(args, "emax", cfg.emax), nmax=getattr(args, "nmax", cfg.nmax))
    state, ctx = harness.lemma5_parts(cfg5)
    if args.action == "star":
        r = avoidsucc.star_check(state, ctx.view, range(args.emax), range(args.nmax + 1), cfg.step_budget)
        if not args.rows:
            r.pop("rows")
        return r, None
    phi = power.parse_element(ctx, args.phi)
    psi = avoidsucc.between_psi(ctx, phi)
    ident = power.identity()
    return {
        "phi": phi.name, "between": psi.name,
        "id<psi": _verdict(power.less_c(ctx, ident, psi)),
        "psi<phi": _verdict(power.less_c(ctx, psi, phi)),
        "tail_values": ctx.values(psi)[-cfg.tail_window:],
    }, None


def cmd_exp(args, cfg):
    names = list(harness.EXPERIMENTS) if args.name == "all" else [args.name]
    reports = [harness.run_experiment(n, cfg) for n in names]
    return reports[0] if len(reports) == 1 else {"schema": harness.SCHEMA, "reports": reports}


COMMANDS = {"maximal": cmd_maximal, "order": cmd_order, "power": cmd_power, "formula": cmd_formula,
            "ma": cmd_ma, "exp": cmd_exp}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from(args)
    except ValueError as exc:
        print(f"cohpow: {exc}", file=sys.stderr)
        return 2
    try:
        if args.verb == "lemma5":
            obj, raw = cmd_lemma5(args, cfg)
            _emit(obj, cfg, raw)
        else:
            _emit(COMMANDS[args.verb](args, cfg), cfg)
    except (ValueError, KeyError, fm.FormulaSyntaxError) as exc:
        print(f"cohpow: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
