"""JSON artifact formats and atomic file writes.

Two document kinds flow through the pipeline: measurement records
(``qpt-records``) and analysis results (``qpt-result``).  Both are plain
JSON with complex numbers as ``[real, imag]`` pairs, so documents
round-trip bit exactly through the standard encoder.  Writes go through a
temporary file in the destination directory followed by an atomic rename;
readers never observe partial documents.

Malformed input (bad JSON, wrong kind, missing or invalid fields) raises
``ConfigError`` with the file position or field name; filesystem problems
propagate as ``OSError``.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from typing import Sequence

import numpy as np

from .channels import AffineMap, affine_from_chi
from .errors import ConfigError
from .metrics import DiscrepancyReport, ProcessComparison
from .process_tomography import ProcessEstimate
from .projection import ProjectionResult
from .simulator import ExperimentConfig, MeasurementRecord
from .state_tomography import ExpectationRecord

SCHEMA_VERSION = 1
RECORDS_KIND = "qpt-records"
RESULT_KIND = "qpt-result"


def encode_complex_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def decode_complex_matrix(data, shape: tuple[int, int], field: str) -> np.ndarray:
    try:
        m = np.array(
            [[complex(float(v[0]), float(v[1])) for v in row] for row in data]
        )
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"{field}: malformed complex matrix: {exc}") from exc
    if m.shape != shape:
        raise ConfigError(f"{field}: expected shape {shape}, got {m.shape}")
    return m


def encode_affine(a: AffineMap) -> dict:
    return {
        "matrix": [[float(v) for v in row] for row in a.matrix],
        "translation": [float(v) for v in a.translation],
    }


def decode_affine(data, field: str) -> AffineMap:
    try:
        return AffineMap(
            matrix=np.array(data["matrix"], dtype=float),
            translation=np.array(data["translation"], dtype=float),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{field}: malformed affine map: {exc}") from exc


def config_to_dict(config: ExperimentConfig) -> dict:
    return {
        "t2": config.t2,
        # JSON has no infinity; null stands for "no amplitude damping".
        "t1": None if math.isinf(config.t1) else config.t1,
        "decoherence_time": config.decoherence_time,
        "polarization": config.polarization,
        "shots": config.shots,
        "seed": config.seed,
        "pulse_error": config.pulse_error,
    }


def config_from_dict(data) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"config must be an object, got {type(data).__name__}")
    known = {
        "t2", "t1", "decoherence_time", "polarization", "shots", "seed",
        "pulse_error",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "t2" not in data:
        raise ConfigError("config is missing the required key t2")
    kwargs = {"t2": data["t2"]}
    if data.get("t1") is not None:
        kwargs["t1"] = data["t1"]
    for key in ("decoherence_time", "polarization", "seed", "pulse_error"):
        if key in data:
            kwargs[key] = data[key]
    if data.get("shots") is not None:
        kwargs["shots"] = data["shots"]
    try:
        return ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


def records_document(records: Sequence[MeasurementRecord]) -> dict:
    if not records:
        raise ValueError("no measurement records to serialize")
    config = records[0].config
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": RECORDS_KIND,
        "config": config_to_dict(config),
        "records": [
            {
                "input_index": record.input_index,
                "expectations": [
                    {
                        "axis": r.axis,
                        "value": r.value,
                        "shots": r.shots,
                    }
                    for r in record.records
                ],
            }
            for record in records
        ],
    }


def _require(doc: dict, key: str, context: str):
    if key not in doc:
        raise ConfigError(f"{context}: missing key {key!r}")
    return doc[key]


def _check_header(doc, kind: str, context: str) -> None:
    if not isinstance(doc, dict):
        raise ConfigError(f"{context}: expected a JSON object")
    version = _require(doc, "schema_version", context)
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"{context}: unsupported schema_version {version!r} "
            f"(expected {SCHEMA_VERSION})"
        )
    found = _require(doc, "kind", context)
    if found != kind:
        raise ConfigError(f"{context}: expected kind {kind!r}, got {found!r}")


def parse_records_document(doc) -> list[MeasurementRecord]:
    _check_header(doc, RECORDS_KIND, "records document")
    config = config_from_dict(_require(doc, "config", "records document"))
    entries = _require(doc, "records", "records document")
    if not isinstance(entries, list) or not entries:
        raise ConfigError("records document: records must be a non-empty list")
    parsed = []
    for pos, entry in enumerate(entries):
        context = f"records[{pos}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{context}: expected an object")
        index = _require(entry, "input_index", context)
        expectations = _require(entry, "expectations", context)
        if not isinstance(expectations, list):
            raise ConfigError(f"{context}: expectations must be a list")
        try:
            records = tuple(
                ExpectationRecord(
                    axis=e["axis"], value=e["value"], shots=e.get("shots")
                )
                for e in expectations
            )
            parsed.append(
                MeasurementRecord(input_index=index, records=records, config=config)
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{context}: {exc}") from exc
    return parsed


def result_document(
    estimate: ProcessEstimate, config: ExperimentConfig | None = None
) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": RESULT_KIND,
        "config": None if config is None else config_to_dict(config),
        "raw": {
            "chi": encode_complex_matrix(estimate.chi),
            "affine": encode_affine(estimate.affine),
            "cp": {
                "flag": estimate.cp_flag,
                "min_choi_eigenvalue": estimate.cp_min_eigenvalue,
            },
            "tp": {"flag": estimate.tp_flag, "deficit": estimate.tp_deficit},
            "anti_hermitian_norm": estimate.anti_hermitian_norm,
            "residuals": list(estimate.residuals),
            "lambda": encode_complex_matrix(estimate.lambda_matrix),
        },
        "projected": None,
        "discrepancy": None,
        "state_metrics": None,
    }


def attach_projection(
    doc: dict,
    result: ProjectionResult,
    report: DiscrepancyReport,
    comparison: ProcessComparison,
) -> dict:
    """Fill the projection sections of a result document in place."""
    doc["projected"] = {
        "chi": encode_complex_matrix(result.chi_tilde),
        "affine": encode_affine(affine_from_chi(result.chi_tilde)),
        "distance": result.distance,
        "iterations": result.iterations,
        "converged": result.converged,
        "restart_distances": [
            d if math.isfinite(d) else None for d in result.restart_distances
        ],
    }
    doc["discrepancy"] = report.as_dict()
    if comparison.state_metrics is None:
        doc["state_metrics"] = {"skipped": comparison.skip_reason}
    else:
        doc["state_metrics"] = comparison.state_metrics.as_dict()
    return doc


def document_chi(doc, prefer_projected: bool = True) -> np.ndarray:
    """Extract a coefficient matrix from a result document.

    Takes the projected matrix when present (unless told otherwise), the raw
    one else.
    """
    _check_header(doc, RESULT_KIND, "result document")
    projected = doc.get("projected")
    if prefer_projected and projected is not None:
        return decode_complex_matrix(
            _require(projected, "chi", "projected"), (4, 4), "projected.chi"
        )
    raw = _require(doc, "raw", "result document")
    return decode_complex_matrix(_require(raw, "chi", "raw"), (4, 4), "raw.chi")


def document_config(doc) -> ExperimentConfig | None:
    _check_header(doc, RESULT_KIND, "result document")
    stored = doc.get("config")
    return None if stored is None else config_from_dict(stored)


def read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc


def write_text_atomic(path: str, text: str) -> None:
    """Write via a sibling temporary file and an atomic rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle = tempfile.NamedTemporaryFile(
        mode="w", encoding="utf-8", dir=directory, delete=False, suffix=".tmp"
    )
    try:
        with handle:
            handle.write(text)
        os.replace(handle.name, path)
    except BaseException:
        try:
            os.unlink(handle.name)
        except OSError:
            pass
        raise


def write_json_atomic(path: str, doc: dict) -> None:
    write_text_atomic(path, json.dumps(doc, indent=2, allow_nan=False) + "\n")
