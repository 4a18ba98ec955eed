"""Command line front end.

Exit codes: 0 all rows served, 1 validation problem, 2 I/O problem,
3 finished but some rows were quarantined.
"""

from __future__ import annotations

import argparse
import sys

from .jobs import AdapterError, AdapterJobSpec
from .manifest_io import ManifestIoError
from .stages import STAGE_ORDER, run_pipeline

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_PARTIAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="accentshift-adapters",
        description="Fill manifest rows with model outputs, stage by stage.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one or more stages over a manifest")
    run.add_argument("--manifest", required=True)
    run.add_argument("--audio-dir", required=True)
    run.add_argument("--stages", default="all",
                     help="comma-separated subset of: " + ",".join(STAGE_ORDER))
    run.add_argument("--out", default=None,
                     help="output manifest path (default: rewrite in place)")
    run.add_argument("--g2p", default="stub")
    run.add_argument("--voice", default="stub")
    run.add_argument("--recognizer", default="stub")
    run.add_argument("--classifier", default="stub")
    run.add_argument("--utmos-model", default="stub")
    run.add_argument("--symbol-map", default=None)
    run.add_argument("--embeddings-out", default=None)
    run.add_argument("--quarantine", default=None)
    run.add_argument("--batch-size", type=int, default=8)
    return parser


def _parse_stages(text: str) -> tuple[str, ...] | None:
    if text == "all":
        return None
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    if not names:
        raise AdapterError("no stages given")
    return names


def cmd_run(args: argparse.Namespace) -> int:
    job = AdapterJobSpec(
        manifest=args.manifest,
        audio_dir=args.audio_dir,
        g2p_model=args.g2p,
        tts_voice=args.voice,
        recognizer_model=args.recognizer,
        classifier_model=args.classifier,
        utmos_model=args.utmos_model,
        symbol_map=args.symbol_map,
        batch_size=args.batch_size,
    )
    result = run_pipeline(
        job,
        stages=_parse_stages(args.stages),
        out_manifest=args.out,
        embeddings_out=args.embeddings_out,
        quarantine_path=args.quarantine,
    )
    print(f"rows={len(result.rows)} quarantined={result.new_failures} "
          f"manifest={result.manifest_path}")
    if result.embeddings_path is not None:
        print(f"embeddings={result.embeddings_path}")
    print(f"quarantine={result.quarantine_path}")
    return EXIT_PARTIAL if result.new_failures else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return cmd_run(args)
    except (AdapterError, ManifestIoError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
