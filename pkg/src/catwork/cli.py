"""Command-line front end: ``catwork build | verify | roundtrip``.

Exit codes: 0 everything passed, 1 a claim failed, 2 bad input (scenario,
artifacts or arguments).  JSON reports follow the ``catwork.report/1``
schema and never contain timings, so identical inputs give identical bytes.

Report layout::

    {
      "schema": "catwork.report/1",
      "command": "verify" | "roundtrip",
      "scenario": {"name": str, "seed": int, "caps": {...}},
      "results": [ {"id", "suite", "anchor", "status", "detail", "witness"?} ... ],
      "summary": {"pass": int, "fail": int, "skipped": int},
      "ok": bool
    }

Roundtrip results carry ``trial``, ``ce_set``, ``recovered``,
``oracle_calls`` and ``component_calls`` instead of ``suite``/``detail``.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from pathlib import Path

from catwork import kernels
from catwork.coders.composite import end_to_end
from catwork.effective import CeSetSpec
from catwork.errors import CapsError, ScenarioError
from catwork.scenario import Scenario, default_scenario, load_scenario
from catwork.structures import FiniteStructure, dumps
from catwork.suites import SUITES, artifacts_of, build_all, run_suites, with_artifacts

REPORT_SCHEMA = "catwork.report/1"
BUILD_SCHEMA = "catwork.build/1"
STRUCTURE_SCHEMA = "catwork.structure/1"
MANIFEST = "manifest.json"
ROUNDTRIP_ANCHOR = "composite structure: encode D, find an isomorphism with f and the oracle, decode D"


class InputError(Exception):
    """Anything that should end the run with exit code 2."""


def _load(args) -> Scenario:
    try:
        sc = default_scenario() if args.scenario == "default" else load_scenario(args.scenario)
    except ScenarioError as exc:
        where = f" [field: {exc.field}]" if exc.field else ""
        raise InputError(f"invalid scenario: {exc}{where}") from None
    if args.seed_override is not None:
        sc = sc.with_seed(args.seed_override)
    return sc


def _scenario_header(sc: Scenario) -> dict:
    return {"name": sc.name, "seed": sc.seed, "caps": sc.caps.to_dict()}


def _write(path: str, text: str) -> None:
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True)
    p.write_text(text, encoding="utf-8")


def _provenance(built, name: str) -> dict:
    section, side = name.split(".")
    if section == "warmup":
        src = built.warmup.provenance()
    elif section == "boxes":
        src = built.boxes.provenance()
    else:
        easy, hard, _ = built.composite
        src = dict(easy.pair.provenance(), ce_set=built.scenario.composite.to_dict(),
                   s_omega_seed=hard.seed if side == "hard" else None)
    return {"artifact": name, "section": section, "side": side, "source": src}


# --- build ------------------------------------------------------------------------

def cmd_build(args) -> int:
    sc = _load(args)
    try:
        built = build_all(sc)
    except CapsError as exc:
        raise InputError(f"caps too small: {exc}") from None
    out = Path(args.out)
    files = {}
    for name, s in artifacts_of(built).items():
        doc = {
            "schema": STRUCTURE_SCHEMA,
            "scenario": _scenario_header(sc),
            "provenance": _provenance(built, name),
            "structure": s.to_dict(),
        }
        fname = f"{name}.json"
        _write(str(out / fname), dumps(doc))
        files[name] = fname
        print(f"wrote {out / fname}  ({s.size} elements)")
    manifest = {"schema": BUILD_SCHEMA, "scenario": sc.to_dict(), "files": files}
    _write(str(out / MANIFEST), dumps(manifest))
    print(f"wrote {out / MANIFEST}")
    return 0


def load_artifacts(directory: str, sc: Scenario) -> dict[str, FiniteStructure]:
    d = Path(directory)
    try:
        manifest = json.loads((d / MANIFEST).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {d / MANIFEST}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{d / MANIFEST} is not valid JSON: {exc}") from None
    if manifest.get("schema") != BUILD_SCHEMA:
        raise InputError(f"{d / MANIFEST}: expected schema {BUILD_SCHEMA}")
    if manifest.get("scenario") != sc.to_dict():
        raise InputError("artifacts were built from a different scenario (or seed)")
    out = {}
    for name, fname in sorted(manifest.get("files", {}).items()):
        path = d / fname
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
            if doc.get("schema") != STRUCTURE_SCHEMA:
                raise ValueError(f"expected schema {STRUCTURE_SCHEMA}")
            out[name] = FiniteStructure.from_dict(doc["structure"])
        except OSError as exc:
            raise InputError(f"cannot read artifact {path}: {exc.strerror}") from None
        except (ValueError, KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"malformed artifact {path}: {exc}") from None
    return out


# --- verify -----------------------------------------------------------------------

def _summary(statuses) -> dict:
    statuses = list(statuses)
    return {k: sum(1 for s in statuses if s == k) for k in ("pass", "fail", "skipped")}


def cmd_verify(args) -> int:
    sc = _load(args)
    names = SUITES if args.suite == "all" else (args.suite,)
    try:
        built = build_all(sc)
    except CapsError as exc:
        raise InputError(f"caps too small: {exc}") from None
    if args.artifacts:
        built = with_artifacts(built, load_artifacts(args.artifacts, sc))
    results = []
    for name in names:
        t0 = time.perf_counter()
        res = run_suites(built, [name])
        dt = time.perf_counter() - t0
        for r in res:
            print(f"{r.status.upper():7s} {r.id:32s} {r.anchor}")
            if r.status == "fail":
                print(f"        witness: {json.dumps(r.witness)}  {r.detail.get('error', '')}".rstrip())
        print(f"        [{name}: {len(res)} checks, {dt:.2f}s]")
        results.extend(res)
    summary = _summary(r.status for r in results)
    report = {
        "schema": REPORT_SCHEMA,
        "command": "verify",
        "scenario": _scenario_header(sc),
        "artifacts": bool(args.artifacts),
        "results": [r.to_dict() for r in results],
        "summary": summary,
        "ok": summary["fail"] == 0,
    }
    if args.out:
        _write(args.out, dumps(report))
    print(f"{summary['pass']} passed, {summary['fail']} failed, {summary['skipped']} skipped")
    return 0 if report["ok"] else 1


# --- roundtrip --------------------------------------------------------------------

def trial_sets(sc: Scenario, trials: int) -> list[CeSetSpec]:
    """Trial 0 is the scenario's own set; the rest are drawn from its seed."""
    first = sc.composite or sc.warmup or CeSetSpec({}, sc.caps.H, sc.caps.N)
    rng = random.Random(sc.seed)
    out = [first]
    while len(out) < trials:
        out.append(CeSetSpec.random(rng, sc.caps.N, sc.caps.H))
    return out[:trials]


def cmd_roundtrip(args) -> int:
    sc = _load(args)
    if args.trials < 1:
        raise InputError("--trials must be >= 1")
    c = sc.caps
    results = []
    t0 = time.perf_counter()
    for t, d in enumerate(trial_sets(sc, args.trials)):
        rep = end_to_end(d, level_cap=c.M, w=c.w, n_max=c.N_max, seed=sc.seed + t)
        ok = rep["ok"] and len(rep["component_calls"]) == c.w * c.N_max and all(
            k >= 1 for k in rep["component_calls"]
        )
        entry = {
            "id": f"roundtrip.{t}",
            "anchor": ROUNDTRIP_ANCHOR,
            "status": "pass" if ok else "fail",
            "trial": t,
            "ce_set": rep["ce_set"],
            "recovered": rep.get("recovered"),
            "oracle_calls": rep["oracle_calls"],
            "component_calls": rep["component_calls"],
        }
        if not ok:
            entry["stage"] = rep.get("stage", "oracle")
            entry["error"] = rep.get("error", "a scrambled component was matched without an oracle call")
            entry["witness"] = rep.get("witness")
            print(f"FAIL    trial {t}: {entry['stage']}: {entry['error']}")
        results.append(entry)
    dt = time.perf_counter() - t0
    summary = _summary(r["status"] for r in results)
    recovered = summary["pass"]
    report = {
        "schema": REPORT_SCHEMA,
        "command": "roundtrip",
        "scenario": _scenario_header(sc),
        "results": results,
        "summary": dict(summary, recovered=recovered, trials=len(results),
                        oracle_calls=sum(r["oracle_calls"] for r in results)),
        "ok": summary["fail"] == 0,
    }
    if args.out:
        _write(args.out, dumps(report))
    print(f"{recovered}/{len(results)} recovered, {report['summary']['oracle_calls']} oracle calls, "
          f"{dt:.2f}s ({kernels.BACKEND} kernels)")
    return 0 if report["ok"] else 1


# --- entry point ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="catwork", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("scenario", nargs="?", default="default",
                        help="scenario JSON file, or 'default' for the packaged one")
        sp.add_argument("--seed-override", type=int, default=None, metavar="SEED")

    b = sub.add_parser("build", help="build every structure the scenario describes")
    common(b)
    b.add_argument("--out", required=True, help="output directory")
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="run invariant suites")
    common(v)
    v.add_argument("--suite", choices=SUITES + ("all",), default="all")
    v.add_argument("--artifacts", metavar="DIR", help="verify structures from a previous build")
    v.add_argument("--out", help="write the JSON report here")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("roundtrip", help="randomised encode/decode runs")
    common(r)
    r.add_argument("--trials", type=int, default=10)
    r.add_argument("--out", help="write the JSON report here")
    r.set_defaults(func=cmd_roundtrip)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ScenarioError as exc:
        print(f"error: invalid scenario: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
