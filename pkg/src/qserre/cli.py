"""Command line entry point: ``qserre <subcommand> [options]``.

Exit status is 0 when every check passed, 1 when any check failed and 2 for
configuration errors (reported before any computation starts).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import suites as S
from .calculus import build_3d, build_4d, build_H3, build_H4, dump_calculus
from .qfield import scalar_mode
from .spectral import hopf_fibration

REPORT_SCHEMA = "qserre.report/1"
GOLDEN_SCHEMA = "qserre.golden/1"
SPECTRAL_SCHEMA = "qserre.spectral/1"


def canonical(obj):
    """JSON-safe copy with string keys, recursively; unknown scalars become strings."""
    if isinstance(obj, dict):
        return {_key(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    return str(obj)


def _key(k):
    if isinstance(k, tuple):
        return ",".join(str(x) for x in k)
    return str(k)


def dumps(obj) -> str:
    return json.dumps(canonical(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _config(args) -> S.RunConfig:
    try:
        return S.RunConfig(calculus=args.calculus, N=args.N, scalar=scalar_mode(args.q), seed=args.seed)
    except (ValueError, ZeroDivisionError) as exc:
        raise S.ConfigError(str(exc)) from exc


def _config_json(cfg: S.RunConfig) -> dict:
    return {"calculus": cfg.calculus, "N": cfg.N, "q": cfg.field.name, "seed": cfg.seed}


def _suite_names(requested, cfg) -> list:
    if "all" in requested:
        names = [s for s in S.SUITES if not (s == "spectral" and cfg.calculus == "4d")]
    else:
        names = list(dict.fromkeys(requested))
    S.validate(cfg, names)
    return names


def _print_report(rep, out):
    extra = f"N={rep.truncation} " if rep.truncation is not None else ""
    print(f"{rep.status}  {rep.check}  [{extra}{rep.scalar_mode}, {rep.checked} checks]", file=out)
    for f in rep.failures[:3]:
        print(f"      failed: {f['identity']}  witness: {f['witness']}", file=out)
    if len(rep.failures) > 3:
        print(f"      ... {len(rep.failures) - 3} more failures", file=out)
    for k, v in sorted(canonical(rep.details).items()):
        print(f"      {k}: {json.dumps(v, sort_keys=True) if not isinstance(v, str) else v}", file=out)


def run_reports(names, cfg) -> dict:
    return {name: S.run_suite(name, cfg) for name in names}


def cmd_verify(args, out) -> int:
    cfg = _config(args)
    names = _suite_names(args.suite or ["all"], cfg)
    results = run_reports(names, cfg)
    ok = all(r.ok for reps in results.values() for r in reps)
    if args.json:
        out.write(dumps({"schema": REPORT_SCHEMA, "config": _config_json(cfg), "status": "PASS" if ok else "FAIL",
                         "suites": {n: [r.to_json() for r in reps] for n, reps in results.items()}}))
    else:
        for name, reps in results.items():
            print(f"== {name}", file=out)
            for r in reps:
                _print_report(r, out)
        total = sum(len(reps) for reps in results.values())
        failed = sum(not r.ok for reps in results.values() for r in reps)
        print(f"{'PASS' if ok else 'FAIL'}: {total - failed}/{total} reports passed", file=out)
    return 0 if ok else 1


def cmd_condition_k(args, out) -> int:
    args.calculus = "4d"
    args.suite = ["condition-k"]
    return cmd_verify(args, out)


def _need_3d(cfg, what):
    if cfg.calculus != "3d":
        raise S.ConfigError(f"{what} is available for the 3D calculus only")


def xi_rows(cfg) -> dict:
    fib = hopf_fibration(cfg.field, cfg.N)
    return fib.xi_table(cfg.N)


def e_table(cfg, r) -> dict:
    fib = hopf_fibration(cfg.field, cfg.N)
    return fib.spectral(cfg.N).page(r).table()


def _grid(cells: dict, title, out):
    """Rows q (descending), columns p, as in a spectral sequence diagram."""
    ps = sorted({p for p, _ in cells})
    qs = sorted({q for _, q in cells}, reverse=True)
    width = max([len(str(v)) for v in cells.values()] + [3]) + 2
    print(title, file=out)
    for q in qs:
        row = "".join(str(cells.get((p, q), "")).rjust(width) for p in ps)
        print(f"  q={q} |{row}", file=out)
    print("       " + "-" * (width * len(ps) + 1), file=out)
    print("        " + "".join(f"p={p}".rjust(width) for p in ps), file=out)


def cmd_table(args, out) -> int:
    cfg = _config(args)
    _need_3d(cfg, "table")
    data = {}
    if args.xi or not args.e2:
        rows = xi_rows(cfg)
        data["xi"] = {(m, n): {"generators": row["generators"], "free": row["free"]} for (m, n), row in rows.items()}
    if args.e2:
        data["e2"] = e_table(cfg, 2)
    if args.json:
        out.write(dumps({"schema": SPECTRAL_SCHEMA, "config": _config_json(cfg), **data}))
        return 0
    if "xi" in data:
        cells = {(n, m): ", ".join(v["generators"]) or "0" for (m, n), v in data["xi"].items()}
        ms = sorted({m for m, _ in data["xi"]})
        ns = sorted({n for _, n in data["xi"]})
        width = max(len(c) for c in cells.values()) + 3
        print(f"Xi_m^n generators over X (N={cfg.N})", file=out)
        print("      " + "".join(f"n={n}".ljust(width) for n in ns), file=out)
        for m in ms:
            print(f"m={m}   " + "".join(cells[(n, m)].ljust(width) for n in ns), file=out)
    if "e2" in data:
        _grid(data["e2"], f"E_2 dimensions summed over Z-degree (N={cfg.N})", out)
    return 0


def cmd_cohomology(args, out) -> int:
    cfg = _config(args)
    _need_3d(cfg, "cohomology")
    fib = hopf_fibration(cfg.field, cfg.N)
    ss = fib.spectral(cfg.N)
    total = {}
    for z in ss.blocks():
        for k, d in ss.total_cohomology(z).items():
            if d:
                total.setdefault(k, {})[z] = d
    e2 = ss.e2_check()
    base = e2.details.get("truncated_base_cohomology", {})
    fibre = {n: fib.fibre_connection(n).generators for n in range(fib.top + 1)}
    data = {"total": total, "base": {k.split(",")[0]: v for k, v in base.items() if k.endswith(",0")},
            "fibre_generators": {n: [fib.X.render_key(g) for g in gens] for n, gens in fibre.items()}}
    if args.json:
        out.write(dumps({"schema": SPECTRAL_SCHEMA, "config": _config_json(cfg), **data}))
        return 0
    print(f"truncated de Rham cohomology of X (N={cfg.N}), dims by Z-degree:", file=out)
    for k in range(fib.top + 1):
        print(f"  H^{k}: {json.dumps(canonical(total.get(k, {})), sort_keys=True)}", file=out)
    print("truncated base cohomology (Z-degree 0, reported only):", file=out)
    for p, d in sorted(data["base"].items()):
        print(f"  H^{p}(B): {d}", file=out)
    print("fibre cohomology generators over B:", file=out)
    for n, gens in data["fibre_generators"].items():
        print(f"  H^{n}(Xi_0): {', '.join(gens) or '0'}", file=out)
    return 0


def spectral_json(cfg, r) -> dict:
    fib = hopf_fibration(cfg.field, cfg.N)
    pg = fib.spectral(cfg.N).page(r)
    blocks = [{"p": p, "q": q, "zdeg": z, "dim": d} for (z, p, q), d in sorted(pg.dims.items()) if d]
    maps = []
    for (z, p, q), imgs in sorted(pg.maps.items()):
        if any(imgs):
            maps.append({"from": {"p": p, "q": q, "zdeg": z}, "to": {"p": p + r, "q": q - r + 1, "zdeg": z},
                         "matrix": [{str(i): str(c) for i, c in sorted(col.items())} for col in imgs]})
    return {"page": r, "blocks": blocks, "maps": maps}


def cmd_spectral(args, out) -> int:
    cfg = _config(args)
    S.validate(cfg, ["spectral"])
    pages = [args.page] if args.page else list(range(1, 5))
    data = [spectral_json(cfg, r) for r in pages]
    if args.json:
        body = data[0] if len(data) == 1 else {"pages": data}
        out.write(dumps({"schema": SPECTRAL_SCHEMA, "config": _config_json(cfg), **body}))
        return 0
    for page in data:
        cells: dict = {}
        for b in page["blocks"]:
            cells[(b["p"], b["q"])] = cells.get((b["p"], b["q"]), 0) + b["dim"]
        for p in range(3):
            for q in range(2):
                cells.setdefault((p, q), 0)
        _grid(cells, f"E_{page['page']} (N={cfg.N}, summed over Z-degree)", out)
        for m in page["maps"]:
            f, t = m["from"], m["to"]
            print(f"  d_{page['page']}: ({f['p']},{f['q']}) -> ({t['p']},{t['q']}) [z={f['zdeg']}] "
                  f"rank {sum(1 for c in m['matrix'] if c)}", file=out)
    return 0


def golden_documents(names, cfg) -> dict:
    docs = {}
    for name in names:
        doc = {"schema": GOLDEN_SCHEMA, "suite": name, "config": _config_json(cfg),
               "reports": [r.to_json() for r in S.run_suite(name, cfg)]}
        if name == "calculus":
            F = cfg.field
            calcs = [build_3d(F), build_H3(F)] if cfg.calculus == "3d" else [build_4d(F), build_H4(F)]
            doc["presentations"] = {c.name: json.loads(dump_calculus(c)) for c in calcs}
        docs[f"{name}.json"] = dumps(doc)
    return docs


def cmd_goldens(args, out) -> int:
    cfg = _config(args)
    names = _suite_names(args.suite, cfg) if args.suite else []
    docs = golden_documents(names, cfg)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for fname, text in sorted(docs.items()):
        (outdir / fname).write_text(text, encoding="utf-8")
        print(f"wrote {outdir / fname}", file=out)
    ok = all(json.loads(t)["reports"] and all(r["status"] == "PASS" for r in json.loads(t)["reports"])
             for t in docs.values())
    return 0 if ok else 1


def _common(p):
    p.add_argument("--calculus", choices=("3d", "4d"), default="3d")
    p.add_argument("-N", type=int, default=3, help="truncation (coefficient word length)")
    p.add_argument("--q", default="3/2", help="'symbolic' or a rational specialization such as 3/2")
    p.add_argument("--json", action="store_true", help="emit JSON instead of text")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled property checks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qserre", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    suite_choices = S.SUITES + ("all",)

    p = sub.add_parser("verify", help="run verification suites")
    _common(p)
    p.add_argument("--suite", action="append", choices=suite_choices)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("table", help="Xi table or E_2 diagram")
    _common(p)
    p.add_argument("--xi", action="store_true")
    p.add_argument("--e2", action="store_true")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("cohomology", help="truncated total, base and fibre cohomology")
    _common(p)
    p.set_defaults(func=cmd_cohomology)

    p = sub.add_parser("spectral", help="pages of the Serre spectral sequence")
    _common(p)
    p.add_argument("--page", type=int, default=None)
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("condition-k", help="condition K for the 4D calculus")
    _common(p)
    p.set_defaults(func=cmd_condition_k)

    p = sub.add_parser("goldens", help="write canonical JSON golden files")
    _common(p)
    p.add_argument("outdir")
    p.add_argument("--suite", action="append", choices=suite_choices)
    p.set_defaults(func=cmd_goldens)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except S.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
