"""Batch command-line front end; a thin client of the HTTP service.

Verbs: ``spectrum``, ``resolvent``, ``expgroup``, ``calc``, ``compare``,
``invert``, ``selftest``.  Each verb loads a JSON run config, selects the
matching commands from its ``commands`` list, posts them to the service
and writes one JSON (and optionally CSV) artifact per command plus a
``summary.json`` into the output directory.

By default requests go to the bundled app in-process (no server needed);
``--server URL`` redirects them to a remote instance, which is the whole
point of the service split.  Exit codes: 0 all checks passed, 1 validation
or transport error, 2 numeric failure.
"""
from __future__ import annotations

import argparse
import csv as csv_mod
import json
import sys
from pathlib import Path
from typing import Optional

VERBS = ("spectrum", "resolvent", "expgroup", "calc", "compare", "invert", "selftest")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERIC = 2


def _make_client(server: Optional[str]):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=600.0)
    # in-process transport through the full request/response cycle
    from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {"commands": []}
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SystemExit(f"config parse error in {path}: line {exc.lineno}, "
                         f"column {exc.colno}: {exc.msg}")
    except OSError as exc:
        raise SystemExit(f"cannot read config {path}: {exc}")


def _dump_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _dump_csv(path: Path, spec: dict) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv_mod.writer(fh)
        writer.writerow(spec["header"])
        writer.writerows(spec["rows"])


def _write_artifacts(out_dir: Path, results: list, summary: dict, fmt: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for res in results:
        stem = f"{res['index']:02d}_{res['command']}"
        if fmt in ("json", "both"):
            _dump_json(out_dir / f"{stem}.json", res)
        if fmt in ("csv", "both") and res.get("csv"):
            _dump_csv(out_dir / f"{stem}.csv", res["csv"])
    _dump_json(out_dir / "summary.json", summary)


def main(argv: Optional[list] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="quatcalc",
        description="Quaternionic operator calculus: batch runner and self test.")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in VERBS:
        p = sub.add_parser(verb, help=f"run the {verb} commands from the config"
                           if verb != "selftest" else "run the built-in acceptance suite")
        p.add_argument("--config", default=None, help="run config (JSON)")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--tol", type=float, default=None,
                       help="override the per-command tolerance")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for randomized suites (overrides the config)")
        p.add_argument("--format", choices=("json", "csv", "both"), default="json")
        p.add_argument("--server", default=None,
                       help="base URL of a running service (default: in-process)")
    args = parser.parse_args(argv)

    cfg = _load_config(args.config)
    cfg.setdefault("commands", [])
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.verb == "selftest" and not any(
            c.get("command") == "selftest" for c in cfg["commands"]):
        cfg["commands"].append({"command": "selftest"})
    if args.tol is not None:
        for c in cfg["commands"]:
            c.setdefault("tol", args.tol)

    client = _make_client(args.server)
    try:
        resp = client.post("/run", params={"only": args.verb}, json=cfg)
    except Exception as exc:
        print(f"service request failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if resp.status_code != 200:
        print(f"service rejected the request ({resp.status_code}): {resp.text}",
              file=sys.stderr)
        return EXIT_VALIDATION
    payload = resp.json()
    results = payload["results"]
    summary = payload["summary"]
    summary["verb"] = args.verb
    summary["seed"] = cfg.get("seed", 0)
    _write_artifacts(Path(args.out), results, summary, args.format)

    for res in results:
        state = "ok" if res["passed"] else res["status"]
        print(f"[{state}] {res['index']:02d} {res['command']}"
              + (f": {res['error']}" if res.get("error") else ""))
    print(f"summary: {summary['commands']} command(s), "
          f"passed={summary['passed']}")
    if summary["validation_errors"]:
        return EXIT_VALIDATION
    if summary["numeric_failures"] or not summary["passed"]:
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
