"""Command-line front end: dehaze one pair or a CSV manifest of pairs.

Single pair::

    hazefuse --rgb scene_rgb.tiff --nir scene_nir.tiff --out scene.png --report report.json

Batch::

    hazefuse batch --manifest pairs.csv --report report.json --table metrics.csv

The manifest is a CSV file with header ``rgb,nir,out`` and an optional
``label`` column. Relative paths are resolved against the manifest's
directory.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .colorspace import HAZE_MAP_MODES, rgb_to_ycbcr
from .errors import HazefuseError, ManifestParseError
from .fusion import FusionConfig, dehaze
from .image_io import load_pair, save_image
from .metrics import MetricsReport, evaluate

log = logging.getLogger("hazefuse")

MANIFEST_COLUMNS = ("rgb", "nir", "out")


@dataclass(frozen=True)
class ManifestEntry:
    rgb: Path
    nir: Path
    out: Path
    label: str | None = None


@dataclass
class RunManifest:
    entries: list[ManifestEntry]
    config: FusionConfig = field(default_factory=FusionConfig)


@dataclass
class ReportRecord:
    label: str
    config: FusionConfig
    metrics: MetricsReport | None
    ms: float
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_json(self) -> dict:
        rec = {
            "label": self.label,
            "config": self.config.as_dict(),
            "metrics": self.metrics.as_dict() if self.metrics is not None else None,
            "ms": round(self.ms, 3),
        }
        if self.error is not None:
            rec["error"] = self.error
        return rec


def run_single(
    rgb_path: str | os.PathLike,
    nir_path: str | os.PathLike,
    out_path: str | os.PathLike,
    cfg: FusionConfig = FusionConfig(),
    report_path: str | os.PathLike | None = None,
    label: str | None = None,
) -> ReportRecord:
    """Dehaze one pair, write the PNG and return its metrics record.

    Metrics compare the luma of the input with the luma of the output. If
    ``report_path`` is given the record is appended to the JSON array
    stored there (created if missing).
    """
    start = time.perf_counter()
    try:
        pair = load_pair(rgb_path, nir_path)
        restored = dehaze(pair, cfg)
        save_image(restored, out_path)
        metrics = evaluate(rgb_to_ycbcr(pair.rgb).y, rgb_to_ycbcr(restored).y)
    except HazefuseError as exc:
        msg = str(exc)
        if str(rgb_path) not in msg and str(nir_path) not in msg:
            msg = f"{rgb_path} + {nir_path}: {msg}"
        raise type(exc)(msg) from exc
    record = ReportRecord(
        label=label or str(rgb_path),
        config=cfg,
        metrics=metrics,
        ms=1000.0 * (time.perf_counter() - start),
    )
    if report_path is not None:
        _append_report(Path(report_path), record)
    return record


def _append_report(path: Path, record: ReportRecord) -> None:
    existing = []
    if path.exists():
        existing = json.loads(path.read_text())
        if not isinstance(existing, list):
            raise ValueError(f"{path} does not hold a JSON report array")
    existing.append(record.to_json())
    path.write_text(json.dumps(existing, indent=2) + "\n")


def write_report(records: list[ReportRecord], path: str | os.PathLike) -> None:
    Path(path).write_text(json.dumps([r.to_json() for r in records], indent=2) + "\n")


def read_manifest(manifest_path: str | os.PathLike, cfg: FusionConfig = FusionConfig()) -> RunManifest:
    manifest_path = Path(manifest_path)
    try:
        with open(manifest_path, newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise ManifestParseError(f"cannot read manifest {manifest_path}: {exc}") from exc

    reader = csv.DictReader(io.StringIO(text))
    header = [h.strip() for h in (reader.fieldnames or [])]
    missing = [c for c in MANIFEST_COLUMNS if c not in header]
    extra = [h for h in header if h not in MANIFEST_COLUMNS + ("label",)]
    if missing or extra:
        raise ManifestParseError(
            f"{manifest_path}: header must be rgb,nir,out[,label]; got {','.join(header)}"
        )
    reader.fieldnames = header

    base = manifest_path.parent
    entries, seen = [], set()
    for lineno, row in enumerate(reader, start=2):
        if None in row:
            raise ManifestParseError(f"{manifest_path}:{lineno}: too many fields")
        values = {k: (v or "").strip() for k, v in row.items()}
        if not any(values.values()):
            continue
        empty = [c for c in MANIFEST_COLUMNS if not values[c]]
        if empty:
            raise ManifestParseError(f"{manifest_path}:{lineno}: empty {', '.join(empty)}")
        label = values.get("label") or None
        if label is not None:
            if label in seen:
                raise ManifestParseError(f"{manifest_path}:{lineno}: duplicate label {label!r}")
            seen.add(label)
        entries.append(
            ManifestEntry(*(base / values[c] for c in MANIFEST_COLUMNS), label=label)
        )
    return RunManifest(entries, cfg)


def _entry_label(entry: ManifestEntry, base: Path) -> str:
    if entry.label:
        return entry.label
    try:
        return entry.rgb.relative_to(base).as_posix()
    except ValueError:
        return entry.rgb.as_posix()


def run_batch(
    manifest_path: str | os.PathLike,
    report_path: str | os.PathLike | None,
    cfg: FusionConfig = FusionConfig(),
    workers: int | None = None,
) -> list[ReportRecord]:
    """Process every manifest entry; failures become error records.

    Records come back in manifest order whatever the number of workers.
    """
    manifest = read_manifest(manifest_path, cfg)
    base = Path(manifest_path).parent

    def one(entry: ManifestEntry) -> ReportRecord:
        label = _entry_label(entry, base)
        start = time.perf_counter()
        try:
            return run_single(entry.rgb, entry.nir, entry.out, manifest.config, label=label)
        except (HazefuseError, OSError) as exc:
            log.warning("%s failed: %s", label, exc)
            return ReportRecord(
                label=label,
                config=manifest.config,
                metrics=None,
                ms=1000.0 * (time.perf_counter() - start),
                error=f"{type(exc).__name__}: {exc}",
            )

    if workers is None:
        workers = min(4, os.cpu_count() or 1)
    if workers <= 1 or len(manifest.entries) <= 1:
        records = [one(e) for e in manifest.entries]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(one, manifest.entries))

    if report_path is not None:
        write_report(records, report_path)
    return records


TABLE_COLUMNS = ("label", "levels", "haze_map", "bins") + MetricsReport.FIELDS


def emit_table(records: list[ReportRecord]) -> str:
    """CSV table of successful records, sorted by label, 4 decimal places."""
    if not records:
        raise ValueError("no records to tabulate")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    for rec in sorted(records, key=lambda r: r.label):
        if rec.metrics is None:
            continue
        cfg = rec.config.as_dict()
        m = rec.metrics.as_dict()
        writer.writerow(
            [rec.label, cfg["levels"], cfg["haze_map"], cfg["bins"]]
            + [f"{m[k]:.4f}" for k in MetricsReport.FIELDS]
        )
    return buf.getvalue()


def _add_config_args(parser: argparse.ArgumentParser, suppress: bool = False) -> None:
    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--levels", type=int, default=default(2), help="wavelet levels (default 2)")
    parser.add_argument(
        "--haze-map", choices=HAZE_MAP_MODES, default=default("scale"),
        help="blue-channel normalisation (default scale)",
    )
    parser.add_argument("--bins", type=int, default=default(256), help="histogram bins (default 256)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hazefuse", description="Remove haze from registered RGB/NIR image pairs."
    )
    parser.add_argument("--rgb", help="hazy RGB image (PNG/TIFF)")
    parser.add_argument("--nir", help="registered NIR image (PNG/TIFF)")
    parser.add_argument("--out", help="output PNG")
    parser.add_argument("--report", help="JSON report to append to")
    parser.add_argument("-v", "--verbose", action="store_true")
    _add_config_args(parser)

    sub = parser.add_subparsers(dest="command")
    batch = sub.add_parser("batch", help="process a CSV manifest of pairs")
    batch.add_argument("--manifest", required=True, help="CSV with header rgb,nir,out[,label]")
    batch.add_argument("--report", required=True, help="JSON report to write")
    batch.add_argument("--table", help="also write a CSV metrics table here")
    batch.add_argument("--workers", type=int, default=None, help="parallel entries (default min(4, CPUs))")
    _add_config_args(batch, suppress=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = FusionConfig(n_levels=args.levels, haze_map_mode=args.haze_map, histogram_bins=args.bins)
    except ValueError as exc:
        parser.error(str(exc))

    if args.command == "batch":
        try:
            records = run_batch(args.manifest, args.report, cfg, workers=args.workers)
        except ManifestParseError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        ok = [r for r in records if r.ok]
        if args.table and ok:
            Path(args.table).write_text(emit_table(ok))
        failed = len(records) - len(ok)
        log.info("%d of %d pairs processed, %d failed", len(ok), len(records), failed)
        return 1 if failed else 0

    if not (args.rgb and args.nir and args.out):
        parser.error("--rgb, --nir and --out are required (or use the batch subcommand)")
    try:
        record = run_single(args.rgb, args.nir, args.out, cfg, report_path=args.report)
    except HazefuseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(record.to_json(), indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
