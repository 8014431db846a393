"""Command line interface: ``cellular-attractors {demo,run,verify,report}``.

Exit status is 0 when every invariant check passes, 2 when some check
reports violations and 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .pipeline import DEMOS, PipelineConfig, emit_report, make_demo, result_document, run_pipeline

OK, ERROR, VIOLATIONS = 0, 1, 2


def _load(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc


def _summary(body: dict) -> str:
    v = body["verification"]
    return (f"{body['config']['demo']}: m={body['m_selection']['m']} "
            f"rho={body['garay']['rho']:.4g} eps={body['m_selection']['epsilon_effective']:.4g} "
            f"conjugacy={v['conjugacy_error']:.3g} violations={v['violations']}")


def cmd_demo(args) -> int:
    for name in sorted(DEMOS):
        d = make_demo(name)
        print(f"{name:15s} k={d.k}  f on R^{4 * d.k + 4}  {d.description}")
    return OK


def cmd_run(args) -> int:
    config = PipelineConfig.from_dict(_load(args.config))
    res = run_pipeline(config)
    doc = result_document(res)
    out = Path(args.out)
    out.write_text(json.dumps(doc, indent=2, sort_keys=True))
    print(_summary(doc["body"]))
    print(f"result written to {out}")
    return OK if res.report.passed else VIOLATIONS


def cmd_verify(args) -> int:
    stored = _load(args.result)
    config = PipelineConfig.from_dict(stored["body"]["config"])
    res = run_pipeline(config)
    fresh = result_document(res)["body"]
    mismatched = [key for key in ("embedding", "garay", "klee", "m_selection", "verification")
                  if fresh[key] != stored["body"][key]]
    print(_summary(fresh))
    if mismatched:
        print(f"stored result differs from rebuild in: {', '.join(mismatched)}")
        return VIOLATIONS
    print("stored result reproduced")
    return OK if res.report.passed else VIOLATIONS


def cmd_report(args) -> int:
    doc = _load(args.result)
    path = emit_report(doc, args.out)
    print(f"report written to {path}")
    return OK if doc["body"]["verification"]["violations"] == 0 else VIOLATIONS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cellular-attractors",
                                description="Realize sampled attractors as global attractors of homeomorphisms.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    demo = sub.add_parser("demo", help="shipped demo systems")
    demo.add_argument("action", choices=["list"])
    demo.set_defaults(func=cmd_demo)
    run = sub.add_parser("run", help="build and verify from a JSON config")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default="result.json")
    run.set_defaults(func=cmd_run)
    ver = sub.add_parser("verify", help="rebuild a stored result and re-run the checks")
    ver.add_argument("--result", required=True)
    ver.set_defaults(func=cmd_verify)
    rep = sub.add_parser("report", help="write report.json and CSV tables")
    rep.add_argument("--result", required=True)
    rep.add_argument("--out", required=True)
    rep.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
