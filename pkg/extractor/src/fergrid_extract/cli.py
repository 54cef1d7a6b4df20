"""The `extract` command: manifest in, .embs store out."""

from __future__ import annotations

import argparse
import json
import sys

from .encoders import DEFAULT_ENCODER
from .errors import ConfigError, ExtractError
from .manifest import load_manifest
from .store import extract_store


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extract",
        description=("Apply scheduled Gaussian blur to manifest images and "
                     "encode them into an .embs embedding store."),
    )
    parser.add_argument("--manifest", required=True,
                        help="CSV with columns group,identity,expression,path")
    parser.add_argument("--sigmas", default="0,1,2,3,4",
                        help="comma-separated blur levels (default 0,1,2,3,4)")
    parser.add_argument("--encoder", default=DEFAULT_ENCODER,
                        help=f"encoder id, e.g. grid:64 (default {DEFAULT_ENCODER})")
    parser.add_argument("--out", required=True, help="destination .embs path")
    return parser


def _parse_sigmas(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise ConfigError(f"bad sigma list {text!r}, expected e.g. 0,1,2") from None


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        manifest = load_manifest(args.manifest)
        count = extract_store(manifest, _parse_sigmas(args.sigmas),
                              args.encoder, args.out)
    except (ExtractError, OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1
    print(f"wrote {args.out}: {count} records from {len(manifest.rows)} images, "
          f"encoder {args.encoder}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
