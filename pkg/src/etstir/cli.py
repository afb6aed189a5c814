"""Command-line entry point.

::

    etstir --config paper_table42.cfg --out results --workers 4 --plot
    etstir --config single_case.cfg --set drive.v_rms=0 --dump-fields

``--config`` takes a path or the name of a bundled config. The output
directory is ``--out``, else ``$ETSTIR_OUT``, else ``./etstir_out``.
"""
from __future__ import annotations

import argparse
import logging
import os
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .config import RunSpec, bundled_configs, dump_run, load_run, resolve_config_path
from .driver import case_metadata, run_case, run_sweep
from .errors import ConfigError, EtstirError
from .io import (case_summary, dump_case_fields, write_json, write_series_csv,
                 write_sweep_csv)
from .plot import emit_plot

log = logging.getLogger("etstir")

DEFAULT_OUT = "etstir_out"
ARTIFACT_KINDS = ("series_csv", "sweep_csv", "field_dump", "plot_svg", "metadata")


@dataclass
class RunManifest:
    out_dir: Path
    artifacts: list = field(default_factory=list)  # (kind, Path)
    wall_times: dict = field(default_factory=dict)  # case label -> s
    errors: list = field(default_factory=list)

    def add(self, kind: str, path) -> None:
        if kind not in ARTIFACT_KINDS:
            raise ValueError(f"unknown artifact kind {kind!r}")
        self.artifacts.append((kind, Path(path)))

    def paths(self, kind: str) -> list:
        return [p for k, p in self.artifacts if k == kind]

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {
            "out_dir": str(self.out_dir),
            "artifacts": [{"kind": k, "path": str(p.relative_to(self.out_dir))}
                          for k, p in self.artifacts],
            "wall_time_s": self.wall_times,
            "errors": self.errors,
        }


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9.+-]+", "_", text).strip("_") or "case"


def default_out_dir() -> Path:
    return Path(os.environ.get("ETSTIR_OUT") or DEFAULT_OUT)


def _prepare_out(out_dir) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from None
    return out


def _write_case(manifest, result, tag, out, dump_fields):
    series = write_series_csv(result.series, out / "series" / f"{tag}.csv")
    manifest.add("series_csv", series)
    manifest.wall_times[tag] = result.wall_time
    if dump_fields and result.fields is not None:
        grid = result.fields.potential.grid
        for p in dump_case_fields(result, grid, out / "fields" / tag):
            manifest.add("field_dump", p)


def execute(spec: RunSpec, out_dir, workers: int | None = None, dump_fields=False,
            plot=False) -> RunManifest:
    """Run a resolved :class:`RunSpec` and write its artifacts into ``out_dir``."""
    out = _prepare_out(out_dir)
    (out / "series").mkdir(exist_ok=True)
    manifest = RunManifest(out)
    resolved = out / "resolved.cfg"
    resolved.write_text(dump_run(spec))
    manifest.add("metadata", resolved)
    workers = spec.workers if workers is None else workers
    if workers < 1:
        raise ConfigError("workers must be at least 1")

    if spec.mode == "case":
        result = run_case(spec.case, keep_fields=dump_fields)
        tag = _slug(spec.case.label or "case")
        _write_case(manifest, result, tag, out, dump_fields)
        meta = dict(result.metadata, result=case_summary(result))
        manifest.add("metadata", write_json(meta, out / "metadata.json"))
        if plot:
            manifest.add("plot_svg", emit_plot([(tag, result.series)], out / "coverage.svg"))
    else:
        table = run_sweep(spec.case, spec.axis, spec.values, workers=workers,
                          keep_fields=dump_fields)
        manifest.add("sweep_csv", write_sweep_csv(table, out / "sweep.csv"))
        rows = []
        for k, row in enumerate(table.rows):
            tag = f"{k:02d}_{_slug(row.config.label)}"
            entry = {"index": k, "value": row.value, "label": row.config.label,
                     "series": f"series/{tag}.csv" if row.result is not None else None}
            if row.result is None:
                entry["error"] = row.error
                manifest.errors.append(f"{row.config.label}: {row.error}")
            else:
                _write_case(manifest, row.result, tag, out, dump_fields)
                entry["result"] = case_summary(row.result)
            rows.append(entry)
        meta = dict(case_metadata(spec.case), sweep={"axis": spec.axis,
                                                       "values": list(spec.values),
                                                       "rows": rows})
        manifest.add("metadata", write_json(meta, out / "metadata.json"))
        if plot and any(r.result is not None for r in table.rows):
            manifest.add("plot_svg", emit_plot(table, out / "coverage.svg"))
    write_json(manifest.to_dict(), out / "manifest.json")
    return manifest


def run_from_config(path, overrides=(), out_dir=None, workers=None, dump_fields=False,
                    plot=False) -> RunManifest:
    """Load ``path`` (file or bundled name), apply overrides, run, write artifacts."""
    spec = load_run(resolve_config_path(path), overrides)
    return execute(spec, out_dir if out_dir is not None else default_out_dir(),
                   workers=workers, dump_fields=dump_fields, plot=plot)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="etstir",
        description="Electrothermal stirring of a microcantilever binding assay.")
    ap.add_argument("--config", metavar="PATH",
                    help="case/sweep config file or bundled config name")
    ap.add_argument("--set", dest="overrides", metavar="KEY=VALUE", action="append",
                    default=[], help="override a config value, e.g. drive.v_rms=25")
    ap.add_argument("--out", metavar="DIR", help="output directory "
                    f"(default $ETSTIR_OUT or ./{DEFAULT_OUT})")
    ap.add_argument("--workers", type=int, metavar="N", help="parallel sweep workers")
    ap.add_argument("--dump-fields", action="store_true", help="write steady field dumps")
    ap.add_argument("--plot", action="store_true", help="write coverage.svg")
    ap.add_argument("--list-configs", action="store_true", help="list bundled configs")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else
                        logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.list_configs:
        for name in bundled_configs():
            print(name)
        return 0
    if not args.config:
        print("etstir: error: --config is required", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    try:
        manifest = run_from_config(args.config, args.overrides, out_dir=args.out,
                                   workers=args.workers, dump_fields=args.dump_fields,
                                   plot=args.plot)
    except ConfigError as exc:
        print(f"etstir: config error: {exc}", file=sys.stderr)
        return 2
    except EtstirError as exc:
        print(f"etstir: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for kind, path in manifest.artifacts:
        print(f"{kind:11s} {path}")
    print(f"done in {time.perf_counter() - t0:.1f} s -> {manifest.out_dir}")
    if not manifest.ok:
        for err in manifest.errors:
            print(f"etstir: case failed: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
