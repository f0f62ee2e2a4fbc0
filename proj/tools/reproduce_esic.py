#!/usr/bin/env python3
"""Compare cs-int latency on ESIC v1.0 test documents with the published summary.

Expects word-timestamped TSVs converted to the slteval format:

    DATA/<doc_id>.en.tsv       source speech (track src)
    DATA/<doc_id>.cs-int.tsv   Czech interpreting (track int)

An optional parallel corpus (--extra-src/--extra-tgt) is appended to the
aligner's training data. Not part of the test suite.
"""

import argparse
import json
import subprocess
import sys
import tempfile
from pathlib import Path

TARGETS = {"avg": 3.99, "p90": 6.77}
TOLERANCE = 0.15


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("data", type=Path)
    ap.add_argument("--slteval", default="build/tools/slteval")
    ap.add_argument("--extra-src", type=Path)
    ap.add_argument("--extra-tgt", type=Path)
    ap.add_argument("--jobs", type=int, default=4)
    args = ap.parse_args()

    docs = []
    for src in sorted(args.data.glob("*.en.tsv")):
        doc_id = src.name[: -len(".en.tsv")]
        interp = args.data / f"{doc_id}.cs-int.tsv"
        if interp.exists():
            docs.append({"doc_id": doc_id, "source": str(src.resolve()), "outputs": {"cs-int": str(interp.resolve())}})
    if not docs:
        print(f"no <doc>.en.tsv / <doc>.cs-int.tsv pairs in {args.data}", file=sys.stderr)
        return 2

    config = {
        "jobs": args.jobs,
        "source": {"language": "en"},
        "systems": [{"name": "cs-int", "kind": "interpreter", "language": "cs"}],
        "documents": docs,
        "aligner": {"model": "model2_diagonal", "iterations": 5, "trim": 5},
    }
    if args.extra_src and args.extra_tgt:
        config["aligner"]["extra_corpora"] = {
            "cs-int": {"source": str(args.extra_src.resolve()), "target": str(args.extra_tgt.resolve())}
        }

    with tempfile.TemporaryDirectory() as tmp:
        cfg_path = Path(tmp) / "config.json"
        cfg_path.write_text(json.dumps(config, indent=2))
        out = Path(tmp) / "out"
        rc = subprocess.call([args.slteval, "report", "-c", str(cfg_path), "-o", str(out), "--format", "json"])
        if rc == 2:
            return rc
        report = json.loads((out / "report.json").read_text())

    row = next(r for r in report["latency"] if r["system"] == "cs-int")
    got = {"avg": row["avg"], "p90": row["percentiles"]["90"]}
    ok = True
    for key, target in TARGETS.items():
        within = abs(got[key] - target) <= TOLERANCE * target
        ok &= within
        print(f"{'ok ' if within else 'off'}  {key:4s} {got[key]:.2f} s  (reference {target:.2f} s, +-{TOLERANCE:.0%})")
    print(f"documents {len(report['documents'])}, samples {row['samples']}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
