"""Run artifacts: JSON document plus one CSV per derived table."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

from .contract import Fingerprint, StageSpec

SCHEMA_VERSION = "1.0"

# keys whose values legitimately change between identical runs
VOLATILE_KEYS = frozenset({"created_utc", "timestamp"})


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"columns": list(self.columns), "rows": [list(r) for r in self.rows]}


@dataclass
class RunArtifact:
    experiment: str
    metadata: dict[str, Any]
    specs: dict[str, StageSpec] = field(default_factory=dict)
    counts: dict[str, dict[str, dict[str, int]]] = field(default_factory=dict)
    fingerprints: dict[str, Fingerprint] = field(default_factory=dict)
    deviations: dict[str, Any] = field(default_factory=dict)
    verdicts: dict[str, str] = field(default_factory=dict)
    tables: dict[str, Table] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "metadata": self.metadata,
            "specs": {k: spec.to_dict() for k, spec in self.specs.items()},
            "counts": self.counts,
            "fingerprints": {k: fp.to_dict() for k, fp in self.fingerprints.items()},
            "deviations": self.deviations,
            "verdicts": self.verdicts,
            "tables": {k: t.to_dict() for k, t in self.tables.items()},
            "extra": self.extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"


def strip_volatile(obj: Any) -> Any:
    """Copy of a JSON-like tree without timestamp fields."""
    if isinstance(obj, Mapping):
        return {k: strip_volatile(v) for k, v in obj.items() if k not in VOLATILE_KEYS}
    if isinstance(obj, list):
        return [strip_volatile(v) for v in obj]
    return obj


def emit_report(artifact: RunArtifact, out_dir: str | Path,
                formats: Iterable[str] = ("json", "csv")) -> list[Path]:
    """Write ``run.json`` and/or ``table_<name>.csv`` files; returns the paths written."""
    out = Path(out_dir)
    formats = set(formats)
    if formats - {"json", "csv"}:
        raise ValueError(f"unknown formats {formats - {'json', 'csv'}}")
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        if "json" in formats:
            path = out / "run.json"
            path.write_text(artifact.to_json(), encoding="utf-8")
            written.append(path)
        if "csv" in formats:
            for name, table in artifact.tables.items():
                path = out / f"table_{name}.csv"
                with path.open("w", newline="", encoding="utf-8") as fh:
                    w = csv.writer(fh, lineterminator="\n")
                    w.writerow(table.columns)
                    w.writerows(table.rows)
                written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write report under {out}: {exc}") from exc
    return written


def load_artifact(path: str | Path) -> dict:
    """Read a ``run.json`` and revalidate every fingerprint.

    Each fingerprint names its contract in ``provenance["contract"]``; its labels
    must follow that spec's family and its values must lie in [-1, 1]
    (ValueError otherwise).
    """
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {doc.get('schema_version')!r}")
    specs = {k: StageSpec.from_dict(v) for k, v in doc.get("specs", {}).items()}
    for name, fp_doc in doc.get("fingerprints", {}).items():
        fp = Fingerprint.from_dict(fp_doc)
        contract = fp.provenance.get("contract")
        if contract not in specs:
            raise ValueError(f"fingerprint {name!r} names unknown contract {contract!r}")
        fp.check_family(specs[contract].family)
    return doc
