"""Command-line interface.

Every subcommand builds a report (a dict) and prints it either as
``key: value`` lines or as one JSON document.  Exit status: 0 when the
checked property holds, 1 when a counterexample is reported, 2 on usage
or input errors.  Reports carry their truncation parameters and are
byte-identical for a fixed seed, whatever ``--workers`` is.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from . import bars, conditions, heyting, kripke, starforce, terms
from .bars import show, strings_upto
from .conditions import IN, INF, OUT, Condition
from .formula import FormulaSyntaxError, UnboundVariableError, format_formula, parse_formula

__all__ = ["RunConfig", "UsageError", "run", "main", "render"]


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    action: Optional[str] = None
    depth: Optional[int] = None
    cutoff: Optional[int] = None
    nbound: Optional[int] = None
    seed: int = 0
    variant: Optional[str] = None
    inputs: list = field(default_factory=list)
    out: Optional[str] = None
    format: str = "text"
    workers: int = 1
    timing: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.cutoff is not None and self.depth is not None and not (1 <= self.cutoff < self.depth):
            raise UsageError(f"need 1 <= cutoff < depth, got cutoff={self.cutoff}, depth={self.depth}")
        if self.workers < 1:
            raise UsageError("--workers must be at least 1")


# ------------------------------------------------------------ rendering

def _flatten(prefix, value, out):
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else str(k), value[k], out)
    elif isinstance(value, (list, tuple)) and any(isinstance(x, (dict, list, tuple)) for x in value):
        for i, x in enumerate(value):
            _flatten(f"{prefix}.{i}", x, out)
    else:
        out.append(f"{prefix}: {_scalar(value)}")


def _scalar(v):
    if isinstance(v, bool):
        return "yes" if v else "no"
    if v is None:
        return "none"
    if isinstance(v, (list, tuple)):
        return ", ".join(_scalar(x) for x in v) if v else "(empty)"
    return str(v)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    lines: list[str] = []
    _flatten("", report, lines)
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------ input helpers

def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _need_inputs(cfg: RunConfig, n: int) -> list[str]:
    if len(cfg.inputs) != n:
        raise UsageError(f"'{cfg.command} {cfg.action}' needs exactly {n} --in file(s)")
    return [_read(p) for p in cfg.inputs]


def _condition(text: str, cfg: RunConfig) -> Condition:
    c, depth = conditions.parse_condition_file(text)
    if cfg.variant and cfg.variant != c.variant:
        raise UsageError(f"file declares variant {c.variant}, --variant says {cfg.variant}")
    if depth is not None and cfg.depth is None:
        cfg.depth = depth
    return c


def _params(cfg: RunConfig, **extra) -> dict:
    out = {"depth": cfg.depth, "cutoff": cfg.cutoff, "nbound": cfg.nbound, "seed": cfg.seed,
           "variant": cfg.variant}
    out.update(extra)
    return {k: v for k, v in out.items() if v is not None}


def _pmap(fn, items, workers):
    """Order-preserving map, in worker processes when asked for."""
    items = list(items)
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# ------------------------------------------------------------ bars

def _bars_analyze(cfg):
    (text,) = _need_inputs(cfg, 1)
    members = bars.parse_bar_file(text)
    d = cfg.depth if cfg.depth is not None else max((len(u) for u in members), default=0)
    too_long = [u for u in members if len(u) > d]
    if too_long:
        raise UsageError(f"{show(min(too_long, key=len))} is longer than --depth {d}")
    B = bars.FiniteBarSet(members, d)
    w = bars.uniform_witness(B, d)
    report = {
        "params": _params(cfg, depth=d),
        "members": [show(u) for u in B.sorted()],
        "bar": bars.is_bar(B, d),
        "uniform witness": w,
        "extension closed": bars.is_extension_closed(B, d),
        "weakly uniform": bars.is_weakly_uniform(B, d),
        "extension closure size": len(bars.close_under_extensions(B, d)),
    }
    return report, 0


# ------------------------------------------------------------ conditions

def _cond_validate(cfg):
    (text,) = _need_inputs(cfg, 1)
    c = _condition(text, cfg)
    bad = conditions.validate_condition(c)
    if cfg.depth is not None and c.length > cfg.depth:
        raise UsageError(f"condition reaches length {c.length} > depth {cfg.depth}")
    report = {"params": _params(cfg, variant=c.variant), "condition": str(c), "valid": not bad,
              "violations": [f"{show(v.node)}: {v.rule}" for v in bad]}
    return report, 0 if not bad else 1


def _cond_project(cfg):
    (text,) = _need_inputs(cfg, 1)
    c = _condition(text, cfg)
    q = conditions.proj_Q(c)
    return {"params": _params(cfg, variant=c.variant), "condition": str(c), "projection": str(q),
            "valid": conditions.is_valid(c)}, 0


def _cond_inpart(cfg):
    q_text, r_text = _need_inputs(cfg, 2)
    q, r = _condition(q_text, cfg), _condition(r_text, cfg)
    for c in (q, r):
        if not conditions.is_valid(c):
            raise UsageError(f"{c} is not a valid condition")
    m = conditions.inpart(q, r)
    below = conditions.weaker_leq_W
    report = {"params": _params(cfg, variant="B"), "q": str(q), "r": str(r), "inpart": str(m),
              "below q": below(m, q), "below r": below(m, r)}
    return report, 0 if report["below q"] and report["below r"] else 1


def _cond_weaken(cfg):
    if cfg.depth is None:
        raise UsageError("cond weaken needs --depth")
    if cfg.inputs:
        (text,) = _need_inputs(cfg, 1)
        p = _condition(text, cfg)
    else:
        p = Condition(cfg.variant or "A", {"": INF})
    if not conditions.is_valid(p):
        raise UsageError(f"{p} is not a valid condition")
    rng = random.Random(f"weaken:{cfg.seed}")
    g = conditions.complete_labeling(p, cfg.depth, rng)
    cands = [u for u in g.nodes_labeled(INF) if u and g(bars.sibling(u)) is INF]
    report = {"params": _params(cfg, variant=p.variant), "start": str(p),
              "labeling": str(g.as_condition())}
    if not cands:
        report.update({"weakening": None, "summary": None})
        return report, 0
    u = cands[rng.randrange(len(cands))]
    if p.variant == "A":
        target = IN if len(u) >= cfg.depth or rng.random() < 0.5 else OUT
        h = conditions.legal_weaken_A(g, {u: target})
        report["flip"] = f"{show(u)} -> {target}"
    else:
        h = conditions.legal_weaken_B(g, [u])
        report["flip"] = f"{show(u)} -> {IN}"
    report["weakening"] = str(h.as_condition())
    report["summary"] = str(conditions.summarize_weakening(g, h))
    return report, 0


def _dense_one(args):
    n, dmax, variant, base = args
    bad = conditions.density_check(conditions.DenseLevel(n, dmax), dmax, variant, base)
    return n, None if bad is None else str(bad)


def _cond_dense_check(cfg):
    dmax = 3 if cfg.depth is None else cfg.depth
    variant = cfg.variant or "A"
    ns = cfg.extra.get("n") or [0, 1]
    base = cfg.extra.get("base_depth")
    results = _pmap(_dense_one, [(n, dmax, variant, base) for n in ns], cfg.workers)
    report = {"params": _params(cfg, depth=dmax, variant=variant,
                                base_depth=dmax - 1 if base is None else base),
              "dense": {f"D{n}": bad is None for n, bad in results},
              "counterexamples": {f"D{n}": bad for n, bad in results if bad is not None}}
    return report, 0 if all(bad is None for _, bad in results) else 1


def _cond_sample(cfg):
    d = 4 if cfg.depth is None else cfg.depth
    variant = cfg.variant or "A"
    preds = [conditions.DenseLevel(n, d) for n in range(d)]
    g = conditions.sample_pseudo_generic(d, preds, cfg.seed, variant)
    B = conditions.bar_from_labeling(g)
    return {"params": _params(cfg, depth=d, variant=variant), "labeling": str(g.as_condition()),
            "bar members": [show(u) for u in B.sorted()],
            "uniform witness": bars.uniform_witness(B, d)}, 0


# ------------------------------------------------------------ heyting

def _heyting_one(P):
    H = heyting.FiniteHeyting(P, verify=False)
    res = heyting.residuation_failures(H)
    conn = heyting.is_connected(H)
    dec = heyting.decidables_trivial(H)
    return len(H), len(res), conn, dec


def _heyting_check(cfg):
    if cfg.inputs:
        (text,) = _need_inputs(cfg, 1)
        posets = [heyting.parse_poset_file(text)]
        scope = "file"
    else:
        size = cfg.extra.get("max_size") or 5
        posets = [P for n in range(size + 1) for P in heyting.naturally_labeled_posets(n)]
        scope = f"all posets with at most {size} elements"
    results = _pmap(_heyting_one, posets, cfg.workers)
    mismatches = sum(1 for _, _, c, d in results if c != d)
    failures = sum(r for _, r, _, _ in results)
    report = {"params": _params(cfg, scope=scope), "posets": len(posets),
              "largest algebra": max((k for k, _, _, _ in results), default=0),
              "connected": sum(1 for _, _, c, _ in results if c),
              "residuation failures": failures, "connectedness mismatches": mismatches}
    return report, 0 if not (mismatches or failures) else 1


# ------------------------------------------------------------ frames

def _frame_from_header(h: dict):
    try:
        return kripke.build_preset(h["preset"], int(h["s"]), int(h["d"]), int(h.get("seed", 0)),
                                   int(h.get("m", 2)))
    except KeyError as exc:
        raise UsageError(f"frame header lacks {exc}") from None


def _load_frame(text: str):
    """A preset report/dump (JSON or text) or a JSON table frame."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"bad JSON: {exc}") from None
        doc = doc.get("frame", doc)
        if "header" in doc:
            return _frame_from_header(doc["header"])
        if "nodes" in doc and "facts" in doc:
            return _table_frame(doc)
        raise UsageError("JSON input is neither a frame dump nor a table frame")
    header = {}
    for line in text.splitlines():
        key, sep, value = line.partition(": ")
        if sep and key.startswith("frame.header."):
            header[key[len("frame.header."):]] = value
    if not header:
        raise UsageError("no frame header found in input")
    return _frame_from_header(header)


def _table_frame(doc):
    nodes = [str(n) for n in doc["nodes"]]
    edges = [tuple(map(str, e)) for e in doc.get("edges", [])]
    domains = {str(k): list(v) for k, v in doc.get("domains", {}).items()}
    objects = sorted({x for v in domains.values() for x in v})
    for n in nodes:
        domains.setdefault(n, objects)
    table = {str(k): {tuple(f) for f in v} for k, v in doc["facts"].items()}
    try:
        return kripke.Frame.from_table(nodes, edges, domains, table, names={o: o for o in objects})
    except kripke.FrameError as exc:
        raise UsageError(str(exc)) from None


def _node(frame, name):
    if name is None:
        return frame.bottom
    for n in frame.nodes:
        if frame.labels[n] == name:
            return n
    raise UsageError(f"no node named {name!r}")


def _frame_build(cfg):
    (text,) = _need_inputs(cfg, 1)
    F = _load_frame(text)
    if F.meta.get("preset"):
        return {"params": _params(cfg), "frame": kripke.frame_dump(F)}, 0
    order = [[F.labels[u], F.labels[v]] for u in F.nodes for v in F.up[u] if v != u]
    return {"params": _params(cfg), "nodes": [F.labels[n] for n in F.nodes],
            "bottom": F.labels[F.bottom], "order": order}, 0


def _formula_for(frame, text, free=()):
    return parse_formula(text, free=free, names=frame.names)


def _frame_eval(cfg):
    (text,) = _need_inputs(cfg, 1)
    F = _load_frame(text)
    formulas = cfg.extra.get("formula") or []
    if not formulas:
        raise UsageError("frame eval needs --formula")
    nodes = [F.nodes] if cfg.extra.get("node") is None else [[_node(F, cfg.extra["node"])]]
    out = {}
    for ftext in formulas:
        f = _formula_for(F, ftext)
        out[format_formula(f)] = {F.labels[n]: kripke.evaluate(F, n, f) for n in nodes[0]}
    return {"params": _params(cfg, **_frame_params(F)), "truth": out}, 0


def _frame_params(F):
    return {k: v for k, v in F.meta.items() if k in ("preset", "s", "d", "m", "seed")}


def _frame_persist(cfg):
    (text,) = _need_inputs(cfg, 1)
    F = _load_frame(text)
    fails = kripke.check_atom_persistence(F)
    formulas = [_formula_for(F, t) for t in cfg.extra.get("formula") or []]
    fails += kripke.check_persistence(F, formulas)
    return {"params": _params(cfg, **_frame_params(F)), "nodes": len(F.nodes),
            "failures": [str(x) for x in fails]}, 0 if not fails else 1


_DEFAULT_FAMILY = {"fand": "B", "fanc": "C", "fanpi": "capC", "fanfull": "C"}


def _frame_internal(cfg):
    (text,) = _need_inputs(cfg, 1)
    F = _load_frame(text)
    preset = F.meta.get("preset")
    if preset is None:
        raise UsageError("frame internal needs a preset frame")
    node = _node(F, cfg.extra.get("node"))
    s, d = F.meta["s"], F.meta["d"]
    std = strings_upto(s)
    check = cfg.extra.get("check") or "c-set"
    report = {"params": _params(cfg, **_frame_params(F)), "node": F.labels[node], "check": check}
    if check == "c-set":
        if "Cp" not in F.names:
            raise UsageError("the c-set check needs a frame with C and Cp (preset fanc)")
        bad = kripke.c_set_biconditional(F, node, "C", "Cp", std)
        report.update({"holds": not bad, "failing sequences": [show(u) for u in bad]})
        return report, 0 if not bad else 1
    family = cfg.extra.get("family") or ("Cp" if check == "decidable" and "Cp" in F.names
                                         else _DEFAULT_FAMILY[preset])
    if family not in F.names:
        raise UsageError(f"frame has no term named {family!r}")
    report["family"] = family
    if check == "decidable":
        report["decidable"] = kripke.internal_decidable(F, node, family, std)
    elif check == "uniform":
        ok, n = kripke.internal_uniform(F, node, family, d)
        report.update({"uniform": ok, "level": n})
    else:
        raise UsageError(f"unknown check {check!r}")
    return report, 0


def _preset(cfg):
    name = cfg.action
    s = 3 if cfg.cutoff is None else cfg.cutoff
    d = 6 if cfg.depth is None else cfg.depth
    m = 2 if cfg.nbound is None else cfg.nbound
    if not (1 <= s < d):
        raise UsageError(f"need 1 <= cutoff < depth, got {s}, {d}")
    F = kripke.build_preset(name, s, d, cfg.seed, m)
    std = strings_upto(s)
    checks = {}
    if name == "fanc":
        checks["decidable Cp at bottom"] = kripke.internal_decidable(F, F.bottom, "Cp", std)
        checks["uniform C at bottom"] = kripke.internal_uniform(F, F.bottom, "C", d)[0]
        bad = kripke.c_set_biconditional(F, F.bottom, "C", "Cp", std)
        checks["c-set failures"] = [show(u) for u in bad]
        ok = checks["decidable Cp at bottom"] and not checks["uniform C at bottom"] and not bad
    elif name == "fanpi":
        g = F.bottom.g
        want = frozenset(terms.numeral(bars.shortlex_index(b)) for b in strings_upto(d) if g(b) is IN)
        capC = F.names["capC"]
        checks["bottom is IN-set"] = terms.interpret_term(capC, F.bottom) == want
        full = {b: terms.numeral(bars.shortlex_index(b)) for b in strings_upto(d)}
        checks["pi nodes drop their index"] = all(
            terms.interpret_term(capC, n) == frozenset(v for b, v in full.items() if b != n.a)
            for n in F.nodes if isinstance(n, terms.PiNode))
        w = kripke.capC_nonclosure_witness(F)
        checks["nonclosure witness"] = list(w) if w else None
        ok = checks["bottom is IN-set"] and checks["pi nodes drop their index"]
    elif name == "fanfull":
        checks["branch semantics"] = all(
            kripke.members_at(F, n, "C") == frozenset(b for b in strings_upto(d) if not bars.is_prefix(b, n.a))
            for n in F.nodes if isinstance(n, terms.BranchNode))
        ok = checks["branch semantics"]
    else:
        checks["uniform B at bottom"] = kripke.internal_uniform(F, F.bottom, "B", d)[0]
        ok = True
    report = {"params": _params(cfg, cutoff=s, depth=d, nbound=m if name == "fanpi" else None,
                                preset=name),
              "nodes": len(F.nodes), "checks": checks, "frame": kripke.frame_dump(F)}
    return report, 0 if ok else 1


# ------------------------------------------------------------ lemma suite

def _lemma_suite(cfg):
    variant = cfg.variant or "A"
    d = 2 if cfg.depth is None else cfg.depth
    if d > 2:
        raise UsageError("budget exceeded: need depth <= 2 and at most 6 terms")
    try:
        ctx = starforce.ForcingContext(variant, d, starforce.default_terms(variant, d),
                                       nbound=cfg.nbound,
                                       weakening=cfg.extra.get("weakening") or "domain")
        rep = starforce.lemma_suite(variant, ctx, max_formula_depth=cfg.extra.get("formula_depth") or 3,
                                    workers=cfg.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = rep.as_dict()
    report["term universe"] = {name: terms.format_term(t) for name, t in ctx.names.items()}
    report["params"] = _params(cfg, depth=d, variant=variant, nbound=ctx.nbound if variant == "C" else None)
    return report, 0 if rep.ok else 1


# ------------------------------------------------------------ dispatch

_COMMANDS = {
    ("bars", "analyze"): _bars_analyze,
    ("cond", "validate"): _cond_validate,
    ("cond", "project"): _cond_project,
    ("cond", "inpart"): _cond_inpart,
    ("cond", "weaken"): _cond_weaken,
    ("cond", "dense-check"): _cond_dense_check,
    ("cond", "sample"): _cond_sample,
    ("heyting", "check"): _heyting_check,
    ("frame", "build"): _frame_build,
    ("frame", "eval"): _frame_eval,
    ("frame", "persist"): _frame_persist,
    ("frame", "internal"): _frame_internal,
    ("lemma-suite", None): _lemma_suite,
    ("preset", "fand"): _preset,
    ("preset", "fanc"): _preset,
    ("preset", "fanpi"): _preset,
    ("preset", "fanfull"): _preset,
}


def run(cfg: RunConfig) -> tuple[int, dict]:
    fn = _COMMANDS.get((cfg.command, cfg.action))
    if fn is None:
        raise UsageError(f"unknown command {cfg.command} {cfg.action or ''}".strip())
    start = time.perf_counter()
    report, code = fn(cfg)
    report = {"command": " ".join(x for x in (cfg.command, cfg.action) if x), **report}
    if cfg.timing:
        report["wall time"] = round(time.perf_counter() - start, 3)
    return code, report


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=int)
    common.add_argument("--cutoff", type=int)
    common.add_argument("--nbound", type=int)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--variant", choices=["A", "B", "C"])
    common.add_argument("--format", choices=["text", "json"], default="text")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--in", dest="inputs", action="append", default=[], metavar="PATH")
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--timing", action="store_true", help="add wall time to the report")

    p = argparse.ArgumentParser(prog="fanmodels", description="Finite fan-model toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bars").add_subparsers(dest="action", required=True)
    b.add_parser("analyze", parents=[common], help="bar, uniformity and closure properties")

    c = sub.add_parser("cond").add_subparsers(dest="action", required=True)
    for name in ("validate", "project", "inpart", "weaken", "sample"):
        c.add_parser(name, parents=[common])
    dc = c.add_parser("dense-check", parents=[common])
    dc.add_argument("--n", type=int, action="append", help="dense level index (repeatable)")
    dc.add_argument("--base-depth", type=int)

    h = sub.add_parser("heyting").add_subparsers(dest="action", required=True)
    h.add_parser("check", parents=[common]).add_argument("--max-size", type=int)

    f = sub.add_parser("frame").add_subparsers(dest="action", required=True)
    f.add_parser("build", parents=[common])
    for name in ("eval", "persist"):
        fp = f.add_parser(name, parents=[common])
        fp.add_argument("--formula", action="append")
        fp.add_argument("--node")
    fi = f.add_parser("internal", parents=[common])
    fi.add_argument("--check", choices=["c-set", "decidable", "uniform"], default="c-set")
    fi.add_argument("--family")
    fi.add_argument("--node")

    ls = sub.add_parser("lemma-suite", parents=[common])
    ls.add_argument("--weakening", choices=["domain", "literal"])
    ls.add_argument("--formula-depth", type=int)
    ls.set_defaults(action=None)

    pr = sub.add_parser("preset").add_subparsers(dest="action", required=True)
    for name in ("fand", "fanc", "fanpi", "fanfull"):
        pr.add_parser(name, parents=[common])
    return p


_EXTRA = ("n", "base_depth", "max_size", "formula", "node", "check", "family", "weakening",
          "formula_depth")


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    extra = {k: getattr(args, k) for k in _EXTRA if getattr(args, k, None) is not None}
    try:
        cfg = RunConfig(args.command, args.action, args.depth, args.cutoff, args.nbound, args.seed,
                        args.variant, args.inputs, args.out, args.format, args.workers, args.timing, extra)
        code, report = run(cfg)
    except (UsageError, ValueError, KeyError, FormulaSyntaxError, UnboundVariableError,
            conditions.UnmeetableError, starforce.RankExhausted, starforce.UniverseTooSmall) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = render(report, cfg.format)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
