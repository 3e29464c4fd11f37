"""Report export: JSON documents and flattened CSV tables."""

import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from .reports import ExperimentReport


class Exporter:
    """
    Serializes experiment reports.
    """

    @staticmethod
    def to_json(report: ExperimentReport) -> str:
        return report.to_json() + "\n"

    @staticmethod
    def flatten(record: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
        """
        Flatten nested dicts into dotted keys; lists become JSON strings.

        Args:
            record: Row or summary mapping.
            prefix: Key prefix for nested calls.

        Returns:
            Dict: One level of scalar values.
        """
        flat: Dict[str, Any] = {}
        for key, value in record.items():
            name = f"{prefix}{key}"
            if isinstance(value, dict):
                flat.update(Exporter.flatten(value, f"{name}."))
            elif isinstance(value, list):
                flat[name] = json.dumps(value)
            else:
                flat[name] = value
        return flat

    @staticmethod
    def to_csv(report: ExperimentReport) -> str:
        """
        One CSV line per report row; columns are the union of flattened keys
        in first-seen order. Case errors follow as rows with an ``error`` column.
        """
        rows: List[Dict[str, Any]] = [Exporter.flatten(r) for r in report.rows]
        rows += [
            {"case": e.case, "error": e.error, "error_kind": e.kind}
            for e in report.errors
        ]
        columns: List[str] = ["experiment", "seed"]
        for row in rows:
            for key in row:
                if key not in columns:
                    columns.append(key)
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(
                {"experiment": report.experiment, "seed": report.seed, **row}
            )
        return buffer.getvalue()

    @staticmethod
    def render(report: ExperimentReport, fmt: str = "json") -> str:
        if fmt == "csv":
            return Exporter.to_csv(report)
        return Exporter.to_json(report)

    @staticmethod
    def write(
        report: ExperimentReport, out: Optional[str] = None, fmt: str = "json"
    ) -> Optional[Path]:
        """
        Write the rendered report to ``out``, or to stdout when it is None.

        Returns:
            Path: The file written, or None for stdout.
        """
        content = Exporter.render(report, fmt)
        if out is None:
            sys.stdout.write(content)
            return None
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
        return path
