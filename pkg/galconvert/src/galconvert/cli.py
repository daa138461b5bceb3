"""Command line entry point: convert one participant per invocation."""
import argparse
import sys
import tempfile
from pathlib import Path

from .convert import DEFAULT_KIN_FIELDS, ConvertSummary, convert_participant
from .errors import ConvertError


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="galconvert",
        description="Convert grasp-and-lift MATLAB recordings into a "
                    "bundle directory readable by the decoding toolkit.")
    p.add_argument("--source", type=Path,
                   help="directory holding HS_<id>_S<k>.mat and <id>_AllLifts.mat")
    p.add_argument("--out", type=Path, help="bundle directory to create")
    p.add_argument("--participant", help="participant id, e.g. P1")
    p.add_argument("--channels",
                   help="comma separated channel subset, kept in the given order")
    p.add_argument("--onset-field", default="tHandStart",
                   help="AllLifts column marking movement onset (default %(default)s)")
    p.add_argument("--rest-field", default="tHandStop",
                   help="AllLifts column marking return to rest (default %(default)s)")
    p.add_argument("--fixture-test", action="store_true",
                   help="generate a synthetic source tree in a temp directory, "
                        "convert it, and verify the result")
    return p


def _report(summary: ConvertSummary) -> None:
    print(f"wrote {summary.out_dir}")
    print(f"  series: {summary.n_series}  trials: {summary.n_trials}  "
          f"dropped: {summary.n_dropped}  channels: {len(summary.channel_names)}")
    for series, lift, reason in summary.dropped:
        print(f"  dropped series {series} lift {lift}: {reason}", file=sys.stderr)


def _fixture_test() -> int:
    import json

    import numpy as np

    from .fixtures import write_fixture

    with tempfile.TemporaryDirectory() as tmp:
        src = Path(tmp) / "source"
        truth = write_fixture(src, participant="P9", n_channels=6, n_series=2,
                              trials_per_series=4, samples_per_series=3000,
                              seed=11, missing=[(2, 1)])
        out = Path(tmp) / "bundle"
        summary = convert_participant(src, out, "P9")
        manifest = json.loads((out / "manifest.json").read_text())
        eeg = np.fromfile(out / "eeg.f32", dtype="<f4").reshape(
            len(manifest["channel_names"]), -1)
        checks = [
            ("series found", summary.n_series == 2),
            ("trials kept", summary.n_trials == 7 and summary.n_dropped == 1),
            ("channel names", manifest["channel_names"] == truth.channel_names),
            ("eeg samples", eeg.shape[1] == truth.eeg.shape[1]),
            ("eeg values", np.array_equal(eeg, truth.eeg.astype(np.float32))),
        ]
        for label, ok in checks:
            print(f"  {label}: {'ok' if ok else 'MISMATCH'}")
        if not all(ok for _, ok in checks):
            print("fixture test FAILED", file=sys.stderr)
            return 3
    print("fixture test passed")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.fixture_test:
        return _fixture_test()
    if not (args.source and args.out and args.participant):
        parser.error("--source, --out and --participant are required "
                     "(or use --fixture-test)")
    whitelist = None
    if args.channels:
        whitelist = [c.strip() for c in args.channels.split(",") if c.strip()]
        if not whitelist:
            parser.error("--channels must name at least one channel")
    try:
        summary = convert_participant(
            args.source, args.out, args.participant,
            channel_whitelist=whitelist,
            onset_field=args.onset_field, rest_field=args.rest_field,
            kin_fields=DEFAULT_KIN_FIELDS)
    except ConvertError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    _report(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
