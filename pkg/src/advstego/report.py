"""Report serialisation: JSON (schema-checked), per-image CSV and the chart."""

from __future__ import annotations

import csv
import io
import json
import os
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from .pipeline import ExperimentReport

CSV_COLUMNS = [
    "image_id", "true_label",
    "pred_clean", "conf_clean",
    "pred_injected", "conf_injected",
    "pred_fgsm_clean", "conf_fgsm_clean",
    "pred_fgsm_injected", "conf_fgsm_injected",
    "extract_pre_ok", "extract_post_ok", "linf",
]


@lru_cache(maxsize=None)
def load_schema() -> dict:
    return json.loads(resources.files("advstego").joinpath("report_schema.json").read_text())


def validate_report_dict(data: dict) -> None:
    jsonschema.validate(data, load_schema())


def report_json(report: ExperimentReport) -> str:
    data = report.to_dict()
    validate_report_dict(data)
    return json.dumps(data, indent=2) + "\n"


def report_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in report.results:
        row = [r.image_id, "" if r.true_label is None else r.true_label]
        for stage in r.stages:
            row += [stage.label, repr(stage.confidence)]
        row += [int(r.extraction_ok_pre_attack), int(r.extraction_ok_post_attack), r.linf_clean_vs_adv]
        writer.writerow(row)
    return buf.getvalue()


def write_report(report: ExperimentReport, out_dir: str | os.PathLike, fmt: str = "both",
                 chart: bool = True) -> list[Path]:
    """Write ``report.json`` / ``report.csv`` / ``chart.svg`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("json", "both"):
        path = out / "report.json"
        path.write_text(report_json(report))
        written.append(path)
    if fmt in ("csv", "both"):
        path = out / "report.csv"
        path.write_text(report_csv(report))
        written.append(path)
    if chart:
        from .plotting import confidence_chart

        path = out / "chart.svg"
        confidence_chart(report, path)
        written.append(path)
    return written
