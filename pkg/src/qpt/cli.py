"""Command-line pipeline: simulate, reconstruct, project, compare, render.

Exit codes: 0 success, 2 configuration or input-validation problem, 3
filesystem problem, 4 projection did not converge (the best iterate is
still written).  The ``QPT_LOG`` environment variable sets the log level
(DEBUG, INFO, WARNING, ERROR).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import io as qio
from .channels import standard_channel
from .errors import ConfigError, NonConvergenceError, QptError
from .mesh import ellipsoid_mesh, mesh_metadata, write_obj
from .metrics import process_distance_report
from .process_tomography import run_process_tomography
from .projection import project_to_physical, projection_report
from .simulator import PRESETS, ExperimentConfig, preset_config, run_experiment

log = logging.getLogger("qpt")

PAPER_REPRO = "paper-repro"


def _shots_argument(text: str):
    if text == "exact":
        return "exact"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"shots must be a positive integer or 'exact', got {text!r}"
        ) from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"shots must be positive, got {value}")
    return value


def _resolve_config(args) -> ExperimentConfig:
    preset = getattr(args, "preset", None)
    config_path = getattr(args, "config", None)
    if (preset is None) == (config_path is None):
        raise ConfigError("exactly one of --preset and --config is required")
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {preset!r}; available: {', '.join(sorted(PRESETS))}"
            )
        config = PRESETS[preset]
    else:
        config = qio.config_from_dict(qio.read_json(config_path))
    return _apply_overrides(config, args)


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    from dataclasses import replace

    updates = {}
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    shots = getattr(args, "shots", None)
    if shots is not None:
        updates["shots"] = None if shots == "exact" else shots
    if not updates:
        return config
    try:
        return replace(config, **updates)
    except ValueError as exc:
        raise ConfigError(f"invalid override: {exc}") from exc


def cmd_simulate(args) -> int:
    config = _resolve_config(args)
    records = run_experiment(config)
    qio.write_json_atomic(args.out, qio.records_document(records))
    log.info("wrote %d record sets to %s", len(records), args.out)
    return 0


def cmd_reconstruct(args) -> int:
    records = qio.parse_records_document(qio.read_json(args.records))
    try:
        estimate = run_process_tomography(records, entropy_weight=args.entropy_weight)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{args.records}: {exc}") from exc
    config = records[0].config if records else None
    qio.write_json_atomic(args.out, qio.result_document(estimate, config))
    log.info(
        "reconstructed process: cp=%s tp=%s -> %s",
        estimate.cp_flag, estimate.tp_flag, args.out,
    )
    return 0


def _project_into_document(doc: dict, restarts: int, max_evaluations: int) -> int:
    chi = qio.document_chi(doc, prefer_projected=False)
    code = 0
    try:
        result = project_to_physical(
            chi, restarts=restarts, max_evaluations=max_evaluations
        )
    except NonConvergenceError as exc:
        log.error("projection did not converge: %s", exc)
        result = exc.best_result
        code = 4
    report = projection_report(chi, result)
    comparison = process_distance_report(
        chi, result.chi_tilde, context=("estimated", "projected")
    )
    qio.attach_projection(doc, result, report, comparison)
    return code


def cmd_project(args) -> int:
    doc = qio.read_json(args.result)
    code = _project_into_document(doc, args.restarts, args.max_evals)
    qio.write_json_atomic(args.out, doc)
    log.info("projected result written to %s", args.out)
    return code


def _channel_by_name(name: str) -> np.ndarray:
    base, _, argument = name.partition(":")
    kind = base.replace("-", "_")
    try:
        if kind == "identity":
            return standard_channel("identity")
        if kind == "dephasing":
            return standard_channel("dephasing", factor=float(argument))
        if kind == "depolarizing":
            return standard_channel("depolarizing", p=float(argument))
        if kind == "amplitude_damping":
            return standard_channel("amplitude_damping", gamma=float(argument))
    except ValueError as exc:
        raise ConfigError(f"channel {name!r}: {exc}") from exc
    raise ConfigError(
        f"{name!r} is neither an existing result file nor a known channel "
        "(identity, dephasing:FACTOR, depolarizing:P, amplitude-damping:GAMMA)"
    )


def _comparison_operand(spec: str) -> tuple[np.ndarray, str]:
    if os.path.exists(spec):
        doc = qio.read_json(spec)
        chi = qio.document_chi(doc)
        label = os.path.basename(spec)
        if doc.get("projected") is not None:
            label += ":projected"
        else:
            label += ":raw"
        return chi, label
    return _channel_by_name(spec), spec


def cmd_compare(args) -> int:
    chi_a, label_a = _comparison_operand(args.a)
    chi_b, label_b = _comparison_operand(args.b)
    comparison = process_distance_report(chi_a, chi_b, context=(label_a, label_b))
    doc = {
        "schema_version": qio.SCHEMA_VERSION,
        "kind": "qpt-comparison",
        "context": [label_a, label_b],
        "norms": comparison.norms.as_dict(),
        "state_metrics": (
            {"skipped": comparison.skip_reason}
            if comparison.state_metrics is None
            else comparison.state_metrics.as_dict()
        ),
    }
    qio.write_json_atomic(args.out, doc)
    print(
        f"{label_a} vs {label_b}: frobenius={comparison.norms.frobenius_norm:.6f} "
        f"d_pro={comparison.norms.trace_distance_pro:.6f}"
    )
    return 0


def _render_block(doc: dict, block: str, prefix: str, subdivisions: int) -> None:
    section = doc.get(block)
    if section is None:
        return
    affine = qio.decode_affine(section["affine"], f"{block}.affine")
    mesh = ellipsoid_mesh(affine, subdivisions)
    write_obj(mesh, f"{prefix}_{block}.obj")
    qio.write_json_atomic(f"{prefix}_{block}.json", mesh_metadata(affine, mesh))


def cmd_render(args) -> int:
    doc = qio.read_json(args.result)
    if doc.get("kind") != qio.RESULT_KIND:
        raise ConfigError(f"{args.result}: not a result document")
    if "raw" not in doc:
        raise ConfigError(f"{args.result}: missing raw section")
    _render_block(doc, "raw", args.out, args.subdivisions)
    _render_block(doc, "projected", args.out, args.subdivisions)
    log.info("meshes written with prefix %s", args.out)
    return 0


def _run_single_pipeline(config: ExperimentConfig, out_dir: str, args) -> int:
    os.makedirs(out_dir, exist_ok=True)
    records = run_experiment(config)
    qio.write_json_atomic(
        os.path.join(out_dir, "records.json"), qio.records_document(records)
    )
    estimate = run_process_tomography(records)
    doc = qio.result_document(estimate, config)
    code = _project_into_document(doc, args.restarts, args.max_evals)
    result_path = os.path.join(out_dir, "result.json")
    qio.write_json_atomic(result_path, doc)

    projected = doc["projected"]
    ideal = standard_channel("identity")
    comparison = process_distance_report(
        qio.decode_complex_matrix(projected["chi"], (4, 4), "projected.chi"),
        ideal,
        context=("projected", "identity"),
    )
    qio.write_json_atomic(
        os.path.join(out_dir, "compare_identity.json"),
        {
            "schema_version": qio.SCHEMA_VERSION,
            "kind": "qpt-comparison",
            "context": ["projected", "identity"],
            "norms": comparison.norms.as_dict(),
            "state_metrics": (
                {"skipped": comparison.skip_reason}
                if comparison.state_metrics is None
                else comparison.state_metrics.as_dict()
            ),
        },
    )
    for block in ("raw", "projected"):
        _render_block(doc, block, os.path.join(out_dir, "mesh"), args.subdivisions)
    print(
        f"{out_dir}: projection distance {doc['projected']['distance']:.6f}, "
        f"identity frobenius {comparison.norms.frobenius_norm:.6f}"
    )
    return code


def cmd_pipeline(args) -> int:
    if getattr(args, "preset", None) == PAPER_REPRO:
        code = 0
        for name in ("paper-20ns", "paper-40ns", "paper-80ns"):
            config = _apply_overrides(preset_config(name), args)
            step = _run_single_pipeline(config, os.path.join(args.out, name), args)
            code = code or step
        return code
    config = _resolve_config(args)
    return _run_single_pipeline(config, args.out, args)


def _add_config_arguments(parser, include_repro: bool = False) -> None:
    names = sorted(PRESETS)
    if include_repro:
        names.append(PAPER_REPRO)
    parser.add_argument(
        "--preset", choices=names, help="bundled experiment configuration"
    )
    parser.add_argument("--config", help="path to a config JSON file")
    parser.add_argument("--seed", type=int, help="override the noise seed")
    parser.add_argument(
        "--shots",
        type=_shots_argument,
        help="override shots per expectation ('exact' disables sampling)",
    )


def _add_projection_arguments(parser) -> None:
    parser.add_argument(
        "--restarts", type=int, default=8, help="projection restarts (default 8)"
    )
    parser.add_argument(
        "--max-evals",
        type=int,
        default=50000,
        help="objective-evaluation budget per restart (default 50000)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpt",
        description="Single-qubit process tomography pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the experiment, write records JSON")
    _add_config_arguments(p)
    p.add_argument("--out", required=True, help="output records path")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("reconstruct", help="records JSON to a result document")
    p.add_argument("--records", required=True, help="input records path")
    p.add_argument("--out", required=True, help="output result path")
    p.add_argument(
        "--entropy-weight",
        type=float,
        default=1e-6,
        help="state-estimation entropy tiebreak weight",
    )
    p.set_defaults(handler=cmd_reconstruct)

    p = sub.add_parser("project", help="attach the physical projection to a result")
    p.add_argument("--result", required=True, help="input result path")
    p.add_argument("--out", required=True, help="output result path")
    _add_projection_arguments(p)
    p.set_defaults(handler=cmd_project)

    p = sub.add_parser(
        "compare", help="compare two results or named channels"
    )
    p.add_argument("a", help="result path or channel name")
    p.add_argument("b", help="result path or channel name")
    p.add_argument("--out", required=True, help="output comparison path")
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("render", help="write Bloch-ellipsoid meshes for a result")
    p.add_argument("--result", required=True, help="input result path")
    p.add_argument("--out", required=True, help="output file prefix")
    p.add_argument(
        "--subdivisions", type=int, default=3, help="icosphere refinement level"
    )
    p.set_defaults(handler=cmd_render)

    p = sub.add_parser(
        "pipeline", help="simulate, reconstruct, project, compare, render"
    )
    _add_config_arguments(p, include_repro=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--subdivisions", type=int, default=3, help="icosphere refinement level"
    )
    _add_projection_arguments(p)
    p.set_defaults(handler=cmd_pipeline)
    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("QPT_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(
        level=level, format="%(levelname)s %(name)s: %(message)s", force=False
    )
    log.setLevel(level)


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NonConvergenceError as exc:
        # Reached only when a command other than project/pipeline hits the
        # solver; those handle the error themselves to persist the iterate.
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except QptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
