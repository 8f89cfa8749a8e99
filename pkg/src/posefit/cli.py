"""Command-line interface for rendering, refinement, evaluation, and serving.

Exit codes: 0 on success, 1 on usage or input errors, 2 when refinement
aborts because no candidate pose ever rendered a visible silhouette.
All diagnostics go to stderr; machine-readable output goes to stdout or
the path given by ``--out``.

Every command that draws random numbers takes ``--seed`` (default 0), so
repeated runs are byte-identical.
"""

import argparse
import json
import sys
from pathlib import Path

from .camera import InvalidPoseError, PoseParams
from .mesh import EmptyMeshError, ObjParseError, load_obj
from .rasterizer import render_silhouette, save_mask_png
from .segmentation import (MaskShapeError, NoReferenceError, iou,
                           load_reference_set, select_reference)
from .refiner import DegenerateInitializationError, RefinerConfig, refine
from .records import (AnnotationRecord, RecordError, pose_from_dict,
                      random_split, read_record_file, read_records_jsonl,
                      write_record_file)
from .evaluation import (histogram, histogram_to_csv, iou_report,
                         format_percent, report_to_csv,
                         run_synthetic_benchmark, benchmark_summary)
from .segmentation import load_mask_png

_INPUT_ERRORS = (InvalidPoseError, ObjParseError, EmptyMeshError, RecordError,
                 MaskShapeError, NoReferenceError, ValueError, OSError)


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _write_output(text: str, out_path) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text)


def _load_pose_arg(args) -> PoseParams:
    if args.pose is not None:
        try:
            data = json.loads(args.pose)
        except json.JSONDecodeError as exc:
            raise RecordError(f"--pose is not valid JSON: {exc}") from exc
        return pose_from_dict(data)
    return read_record_file(args.record).pose


def cmd_render(args) -> int:
    mesh = load_obj(args.mesh)
    pose = _load_pose_arg(args)
    mask = render_silhouette(mesh, pose, args.width, args.height)
    save_mask_png(mask, args.out)
    print(f"rendered {mask.area()} foreground pixels to {args.out}",
          file=sys.stderr)
    return 0


def _refiner_config(config_json, initial_pose) -> RefinerConfig:
    overrides = {}
    if config_json is not None:
        try:
            overrides = json.loads(config_json)
        except json.JSONDecodeError as exc:
            raise RecordError(f"--config is not valid JSON: {exc}") from exc
        if not isinstance(overrides, dict):
            raise RecordError("--config must be a JSON object")
        if "epsilon" in overrides:
            overrides["epsilon"] = tuple(overrides["epsilon"])
    try:
        return RefinerConfig.for_initial_pose(initial_pose, **overrides)
    except TypeError as exc:
        raise RecordError(f"unknown refiner config field: {exc}") from exc


def cmd_refine(args) -> int:
    mesh = load_obj(args.mesh)
    record = read_record_file(args.record)
    refs = load_reference_set(args.reference, args.instances)
    initial_render = render_silhouette(mesh, record.pose,
                                       record.image_width, record.image_height)
    reference = select_reference(refs, initial_render)
    config = _refiner_config(args.config, record.pose)
    result = refine(mesh, record.pose, reference, config)

    refined = AnnotationRecord(
        image_id=record.image_id,
        image_width=record.image_width,
        image_height=record.image_height,
        category=record.category,
        model_path=record.model_path,
        pose=result.pose,
        stage="refined",
        iou_vs_reference=result.iou_final,
        timestamp=record.timestamp,
    )
    write_record_file(refined, args.out)
    sidecar = {
        "iou_initial": result.iou_initial,
        "iou_final": result.iou_final,
        "sweeps": result.sweeps,
        "evaluations": result.evaluations,
        "converged": result.converged,
        "trajectory": [[s, v] for s, v in result.trajectory],
    }
    Path(str(args.out) + ".trajectory.json").write_text(
        json.dumps(sidecar, indent=2) + "\n")
    print(f"refined {record.image_id}: IoU {result.iou_initial:.4f} -> "
          f"{result.iou_final:.4f} in {result.sweeps} sweeps", file=sys.stderr)
    return 0


def _resolve(path_str: str, base: Path) -> Path:
    path = Path(path_str)
    return path if path.is_absolute() else base / path


def cmd_eval(args) -> int:
    records_path = Path(args.records)
    records = read_records_jsonl(records_path)
    base = records_path.resolve().parent
    ref_dir = Path(args.references)
    items = []
    for record in records:
        mesh = load_obj(_resolve(record.model_path, base))
        reference = load_mask_png(ref_dir / f"{record.image_id}.png")
        items.append((record, mesh, reference))
    report = iou_report(items)
    _write_output(json.dumps(report.to_dict(), indent=2) + "\n", args.out)
    print(f"{report.n} records: IoU {format_percent(report)}", file=sys.stderr)
    if args.csv is not None:
        Path(args.csv).write_text(report_to_csv(report))
    return 0


def cmd_stats(args) -> int:
    records = read_records_jsonl(args.records)
    spec = histogram(records, args.param, args.bins)
    _write_output(histogram_to_csv(spec), args.out)
    return 0


def cmd_synth(args) -> int:
    mesh = load_obj(args.mesh)
    trials = run_synthetic_benchmark(mesh, args.trials, seed=args.seed,
                                     width=args.width, height=args.height)
    payload = {"seed": args.seed,
               "summary": benchmark_summary(trials),
               "trials": [t.to_dict() for t in trials]}
    _write_output(json.dumps(payload, indent=2) + "\n", args.out)
    summary = payload["summary"]
    print(f"{summary['n']} trials: mean IoU {summary['mean_initial_iou']:.4f}"
          f" -> {summary['mean_final_iou']:.4f}", file=sys.stderr)
    return 0


def cmd_split(args) -> int:
    ids = [line.strip() for line in Path(args.ids).read_text().splitlines()
           if line.strip()]
    manifest = random_split(ids, args.fraction, args.seed,
                            train_count=args.train_count)
    _write_output(json.dumps(manifest.to_dict(), indent=2) + "\n", args.out)
    print(f"split {len(ids)} ids into {len(manifest.train)} train / "
          f"{len(manifest.test)} test", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.records_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="posefit",
                     description="Pose annotation and silhouette-IoU refinement")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="render a silhouette mask PNG")
    p.add_argument("--mesh", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--pose", help="pose as inline JSON")
    group.add_argument("--record", help="annotation record JSON file")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("refine", help="refine a record against a mask")
    p.add_argument("--mesh", required=True)
    p.add_argument("--record", required=True)
    p.add_argument("--reference", required=True, help="segmentation mask PNG")
    p.add_argument("--instances", help="instance-mask JSON sidecar")
    p.add_argument("--config", help="refiner config overrides as JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("eval", help="mean/std IoU report over a record corpus")
    p.add_argument("--records", required=True, help="records JSONL file")
    p.add_argument("--references", required=True,
                   help="directory of <image_id>.png reference masks")
    p.add_argument("--out")
    p.add_argument("--csv", help="also write per-record CSV here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="histogram a pose parameter as CSV")
    p.add_argument("--records", required=True)
    p.add_argument("--param", required=True)
    p.add_argument("--bins", type=int, default=18)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="seeded synthetic recovery benchmark")
    p.add_argument("--mesh", required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=int, default=320)
    p.add_argument("--height", type=int, default=240)
    p.add_argument("--out")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("split", help="deterministic train/test split")
    p.add_argument("--ids", required=True, help="text file, one image id per line")
    p.add_argument("--fraction", type=float, default=2.0 / 3.0)
    p.add_argument("--train-count", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("serve", help="run the annotation session service")
    p.add_argument("--records-dir", default="records")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8750)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse --help exits 0, usage errors exit 1
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except DegenerateInitializationError as exc:
        print(f"posefit: {exc}", file=sys.stderr)
        return 2
    except _INPUT_ERRORS as exc:
        print(f"posefit: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
