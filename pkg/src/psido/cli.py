"""``psido`` command line: run probe suites, compute indices, list the catalog.

Exit codes: 0 when every selected probe passes, 1 when a probe fails (the
failing invariant is printed to stderr), 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

import jsonschema

from .grid import CONVENTION
from .spectral import ContourError, ProbeError, winding_index
from .suites import DEFAULT_TOLERANCES, PROBES, SUITES, Context
from .symbols import get_symbol, list_catalog

EXIT_OK, EXIT_PROBE, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


def load_schema(name: str) -> dict:
    return json.loads(resources.files("psido").joinpath("schemas", name).read_text())


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def parse_grids(text: str):
    grids = []
    for item in text.split(","):
        try:
            T, M = item.split(":")
            grids.append([float(T), int(M)])
        except ValueError:
            raise ConfigError(f"bad grid {item!r}; expected T:M") from None
    return grids


def parse_tol(items):
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"bad tolerance override {item!r}; expected KEY=VAL")
        try:
            out[key] = float(val)
        except ValueError:
            raise ConfigError(f"tolerance {key!r} is not a number") from None
    return out


def build_config(args) -> dict:
    cfg = {}
    if args.config:
        text = Path(args.config).read_text()
        if not text.strip():
            raise ConfigError("config file is empty")
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    if args.suite:
        cfg["suite"] = args.suite
    if args.probe:
        cfg["probes"] = args.probe
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.grid:
        cfg["grids"] = parse_grids(args.grid)
    if args.tol_override:
        cfg.setdefault("tolerances", {}).update(parse_tol(args.tol_override))
    if args.out:
        cfg["out"] = args.out
    try:
        jsonschema.validate(cfg, load_schema("config.json"))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config violates schema at {path}: {exc.message}") from None
    unknown = set(cfg.get("tolerances", {})) - set(DEFAULT_TOLERANCES)
    if unknown:
        raise ConfigError(f"unknown tolerance keys: {sorted(unknown)}")
    return cfg


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PSIDO_THREADS", "") or os.cpu_count() or 1))
    except ValueError:
        return 1


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])


def run(cfg: dict) -> int:
    if "probes" in cfg:
        probes = [PROBES[p] for p in cfg["probes"]]
    else:
        probes = SUITES[cfg["suite"]]
    ctx = Context(seed=cfg.get("seed", 0), grids=cfg.get("grids"), tol=cfg.get("tolerances", {}))
    with ThreadPoolExecutor(max_workers=min(_threads(), len(probes))) as pool:
        futures = [pool.submit(p, ctx) for p in probes]
        results = []
        for p, fut in zip(probes, futures):
            try:
                results.append(fut.result())
            except (ProbeError, ContourError, ValueError) as exc:
                print(f"error in probe {p.__name__}: {exc}", file=sys.stderr)
                return EXIT_CONFIG

    out = Path(cfg.get("out", "psido-out"))
    (out / "probes").mkdir(parents=True, exist_ok=True)
    failed = [r for r in results if not r.passed]
    report = {"convention": CONVENTION, "seed": ctx.seed, "suite": cfg.get("suite"),
              "probes": {r.name: r.to_dict() for r in results},
              "failed": [r.name for r in failed], "passed": not failed}
    (out / "report.json").write_text(dumps(report))
    for r in results:
        (out / "probes" / f"{r.name}.json").write_text(dumps(dict(r.to_dict(), convention=CONVENTION)))
        for fname, (header, rows) in r.curves.items():
            (out / "curves").mkdir(exist_ok=True)
            _write_csv(out / "curves" / fname, header, rows)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.invariant}")
    for r in failed:
        print(f"failing invariant [{r.name}]: {r.invariant}", file=sys.stderr)
    return EXIT_PROBE if failed else EXIT_OK


def catalog_listing() -> dict:
    probes = []
    for suite in ("core", "spectral", "multipliers", "sobolev"):
        probes += [{"name": p.__name__[len("probe_"):], "suite": suite} for p in SUITES[suite]]
    doc = {"convention": CONVENTION, "symbols": list_catalog(), "probes": probes,
           "suites": sorted(SUITES)}
    jsonschema.validate(doc, load_schema("catalog.json"))
    return doc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="psido", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run probe suites and write JSON/CSV reports")
    r.add_argument("--config", help="JSON config file (see schemas/config.json)")
    r.add_argument("--suite", choices=sorted(SUITES))
    r.add_argument("--probe", action="append", help="single probe; repeatable")
    r.add_argument("--seed", type=int)
    r.add_argument("--grid", help="grid schedule T:M[,T:M...]")
    r.add_argument("--out", help="output directory (default psido-out)")
    r.add_argument("--tol-override", action="append", metavar="KEY=VAL")

    i = sub.add_parser("index", help="winding index of a catalog symbol")
    i.add_argument("--symbol", required=True)
    i.add_argument("--radius", type=float, default=3.0)
    i.add_argument("--samples", type=int, default=1024)
    i.add_argument("--center", default="0,0", help="contour centre t,xi")

    sub.add_parser("list", help="list catalog symbols and probes as JSON")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        sys.stdout.write(dumps(catalog_listing()))
        return EXIT_OK
    if args.command == "index":
        try:
            center = tuple(float(v) for v in args.center.split(","))
            if len(center) != 2:
                raise ValueError
        except ValueError:
            print(f"bad --center {args.center!r}; expected t,xi", file=sys.stderr)
            return EXIT_CONFIG
        try:
            s = get_symbol(args.symbol)
        except KeyError as exc:
            print(f"unknown symbol: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        try:
            rep = winding_index(s, center, args.radius, args.samples)
        except (ContourError, ProbeError) as exc:
            print(f"index failed: {exc}", file=sys.stderr)
            return EXIT_PROBE
        sys.stdout.write(dumps(rep.to_dict()))
        return EXIT_OK
    try:
        cfg = build_config(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
