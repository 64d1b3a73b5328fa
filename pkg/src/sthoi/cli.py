"""``sthoi`` command line.

Every subcommand writes its result as JSON to stdout (or ``--out``); failures
exit non-zero with a one-line JSON error record on stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import heatmap as hm
from . import split as sp
from . import taxonomy as tx
from .io import ParseError, read_tracklets, write_tracklets
from .pipeline import CELLS, EvalError, eval_all
from .synthetic import NoiseSpec, gen_synthetic
from .tracklets import ALPHA_PRESETS, EvalConfig

log = logging.getLogger("sthoi")

EXIT_USAGE = 1
EXIT_PARSE = 2


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE, kind: str = "error"):
        super().__init__(message)
        self.code = code
        self.kind = kind


def read_config(path: str | None) -> dict[str, str]:
    """``key=value`` lines; ``#`` starts a comment."""
    if not path:
        return {}
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise CliError(str(e), EXIT_PARSE, "config") from e
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{n}: expected key=value", EXIT_PARSE, "config")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_alpha(value: str) -> float:
    if value in ALPHA_PRESETS:
        return ALPHA_PRESETS[value]
    try:
        return float(value)
    except ValueError:
        raise CliError(f"--alpha must be a number or one of {sorted(ALPHA_PRESETS)}") from None


def _eval_config(args) -> tuple[EvalConfig, dict]:
    cfg = read_config(args.config)
    settings = {
        "alpha": cfg.get("alpha", "0.0"),
        "tp_miou": cfg.get("tp_miou", "0.2"),
        "tracking_iou": cfg.get("tracking_iou", "0.5"),
        "jobs": cfg.get("jobs", "1"),
        "criterion": cfg.get("criterion", "both"),
        "mode": cfg.get("mode", "both"),
    }
    for key in ("alpha", "jobs", "criterion", "mode"):
        v = getattr(args, key, None)
        if v is not None:
            settings[key] = str(v)
    try:
        config = EvalConfig(alpha=parse_alpha(settings["alpha"]), tp_miou=float(settings["tp_miou"]),
                            tracking_iou=float(settings["tracking_iou"]))
        settings["jobs"] = int(settings["jobs"])
    except ValueError as e:
        raise CliError(str(e)) from e
    return config, settings


def _selected_cells(settings) -> list[str]:
    modes = ("2d", "3d") if settings["mode"] == "both" else (settings["mode"],)
    crits = ("strict", "loose") if settings["criterion"] == "both" else (settings["criterion"],)
    return [f"{m}_{c}" for m, c in CELLS if m in modes and c in crits]


def _emit(doc, out: str | None):
    text = json.dumps(doc, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _run_eval(args, part: str):
    config, settings = _eval_config(args)
    gt = read_tracklets(args.gt)
    pred = read_tracklets(args.pred)
    report = eval_all(gt, pred, config, jobs=settings["jobs"],
                      interacting_only=args.interacting_only, per_frame_max=args.per_frame_max)
    cells = _selected_cells(settings)
    if part == "all":
        doc = json.loads(report.to_json())
        if not args.out:
            print(report.table(), file=sys.stderr)
    elif part == "tracking":
        doc = {"tracking": report.tracking,
               "per_video": [{k: r[k] for k in ("video", "mota", "idf1", "misses",
                                                "false_positives", "id_switches")}
                             for r in report.per_video]}
    elif part == "interaction":
        doc = {"interaction": {f"map_{c}": report.interaction[f"map_{c}"] for c in cells},
               "per_class": {f"ap_{c}": report.per_class[f"ap_{c}"] for c in cells}}
    else:
        doc = {"objects": {f"miou_{c}": report.objects[f"miou_{c}"] for c in cells}}
    doc = json.loads(json.dumps(doc, default=float).replace("NaN", "null"))
    _emit(doc, args.out)


def cmd_decode_heatmap(args):
    h = hm.read_sthm(args.input)
    config = hm.HeatmapConfig()
    t = args.threshold if args.threshold is not None else config.threshold(args.size)
    box = hm.decode_heatmap(h, threshold=t, largest_component=args.largest_component)
    _emit({"threshold": t, "size": args.size, "box": box.to_list() if box else None}, args.out)


def cmd_fuse_heatmaps(args):
    maps = [hm.read_sthm(p) for p in (args.part, args.human, args.context)]
    if args.mode == "equal":
        fused = hm.fuse(*maps, weights=hm.EQUAL_WEIGHTS, normalize_first=args.normalize_first)
    elif args.mode == "dynamic":
        if not args.weights:
            raise CliError("--mode dynamic needs --weights bp,bh,bc")
        weights = [float(w) for w in args.weights.split(",")]
        if len(weights) != 3:
            raise CliError("--weights needs exactly three values")
        fused = hm.fuse(*maps, weights=weights, normalize_first=args.normalize_first)
    else:
        if not (args.table and args.interaction):
            raise CliError("--mode select needs --table and --interaction")
        raw = json.loads(Path(args.table).read_text())
        table = {int(k): v for k, v in raw.items()}
        branch = hm.select_branch(table, interactions=[args.interaction])[args.interaction]
        fused = maps[hm.BRANCHES.index(branch)]
        if args.normalize_first:
            fused = hm.normalize(fused)
    if args.long:
        fused = hm.blend_long_term(fused, hm.read_sthm(args.long), args.epsilon)
    hm.write_sthm(args.out, fused)
    print(json.dumps({"out": args.out, "shape": list(fused.shape), "max": float(np.max(fused))}))


def cmd_make_split(args):
    try:
        problem = sp.load_problem(args.problem)
    except (OSError, KeyError, ValueError) as e:
        raise CliError(f"cannot read split problem: {e}", EXIT_PARSE, "parse") from e
    method = args.method
    if method == "auto":
        method = "exact" if problem.n_videos <= 16 else "heuristic"
    if method == "exact":
        sol = sp.solve_exact(problem)
    else:
        sol = sp.solve_heuristic(problem, seed=args.seed, iterations=args.iterations)
    doc = sp.solution_to_dict(problem, sol)
    doc["method"] = method
    _emit(doc, args.out)


def _oracle(args):
    try:
        return tx.MockOntology.from_file(args.ontology)
    except (OSError, ValueError) as e:
        raise CliError(f"cannot read ontology: {e}", EXIT_PARSE, "parse") from e


def cmd_cluster_classes(args):
    oracle = _oracle(args)
    clusters = tx.cluster_classes(tx.read_words(args.words), oracle, args.representative)
    _emit({"clusters": clusters}, args.out)


def cmd_build_tree(args):
    oracle = _oracle(args)
    if args.clusters:
        clusters = json.loads(Path(args.clusters).read_text())["clusters"]
    else:
        clusters = tx.cluster_classes(tx.read_words(args.words), oracle, args.representative)
    tree = tx.build_taxonomy(clusters, oracle)
    _emit({"root": tree.root, "tree": tree.to_dict(), "introduced": sorted(tree.introduced)},
          args.out)


def cmd_gen_synthetic(args):
    noise = NoiseSpec(persons=args.persons, miss_last_second=args.miss_last_second,
                      fp_tracklets=args.fp_tracklets, object_shift=args.object_shift,
                      tube_frames=args.tube_frames)
    gt, pred, expected = gen_synthetic(args.seed, args.videos, args.seconds, noise)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_tracklets(out / "gt.jsonl", gt, with_score=False)
    write_tracklets(out / "pred.jsonl", pred)
    (out / "expected.json").write_text(json.dumps(expected, indent=2, sort_keys=True) + "\n")
    print(json.dumps({"gt": str(out / "gt.jsonl"), "pred": str(out / "pred.jsonl"),
                      "expected": str(out / "expected.json")}))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sthoi", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, part in (("eval-tracking", "tracking"), ("eval-interaction", "interaction"),
                       ("eval-objects", "objects"), ("eval-all", "all")):
        p = sub.add_parser(name, help=f"step-wise evaluation ({part})")
        p.add_argument("--gt", required=True)
        p.add_argument("--pred", required=True)
        p.add_argument("--alpha", help="score threshold or preset: " + ", ".join(ALPHA_PRESETS))
        p.add_argument("--criterion", choices=("strict", "loose", "both"))
        p.add_argument("--mode", choices=("2d", "3d", "both"))
        p.add_argument("--jobs", type=int)
        p.add_argument("--config", help="key=value file (alpha, tp_miou, tracking_iou, jobs, ...)")
        p.add_argument("--interacting-only", action="store_true",
                       help="drop GT people with interaction 0 before tracking evaluation")
        p.add_argument("--per-frame-max", action="store_true",
                       help="object score: best GT object per frame instead of per tracklet")
        p.add_argument("--out")
        p.set_defaults(func=lambda a, part=part: _run_eval(a, part))

    p = sub.add_parser("decode-heatmap", help="heatmap (STHM) -> box")
    p.add_argument("--input", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--size", choices=[s.value for s in hm.SizeClass])
    g.add_argument("--threshold", type=float)
    p.add_argument("--largest-component", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_decode_heatmap)

    p = sub.add_parser("fuse-heatmaps", help="fuse part/human/context heatmaps")
    p.add_argument("--part", required=True)
    p.add_argument("--human", required=True)
    p.add_argument("--context", required=True)
    p.add_argument("--mode", choices=("equal", "dynamic", "select"), default="equal")
    p.add_argument("--weights", help="bp,bh,bc for --mode dynamic")
    p.add_argument("--table", help="JSON {interaction: {branch: mIoU}} for --mode select")
    p.add_argument("--interaction", type=int)
    p.add_argument("--normalize-first", action="store_true")
    p.add_argument("--long", help="long-term heatmap to blend in")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fuse_heatmaps)

    p = sub.add_parser("make-split", help="select test videos")
    p.add_argument("--problem", required=True)
    p.add_argument("--method", choices=("auto", "exact", "heuristic"), default="auto")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iterations", type=int, default=6000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_make_split)

    for name, func in (("cluster-classes", cmd_cluster_classes), ("build-tree", cmd_build_tree)):
        p = sub.add_parser(name)
        p.add_argument("--ontology", required=True, help="child<TAB>parent lines")
        p.add_argument("--words", help="one word per line")
        if name == "build-tree":
            p.add_argument("--clusters", help="JSON {'clusters': [[...], ...]}")
        p.add_argument("--representative", choices=("shallowest", "deepest"), default="shallowest")
        p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("gen-synthetic", help="write a synthetic benchmark")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--videos", type=int, default=10)
    p.add_argument("--seconds", type=int, default=30)
    p.add_argument("--persons", type=int, default=2)
    p.add_argument("--miss-last-second", action="store_true")
    p.add_argument("--fp-tracklets", type=int, default=0)
    p.add_argument("--object-shift", type=float, default=0.0)
    p.add_argument("--tube-frames", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_gen_synthetic)
    return parser


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command in ("build-tree", "cluster-classes") and not (
            args.words or getattr(args, "clusters", None)):
        return _fail("usage", "--words (or --clusters) is required", EXIT_USAGE)
    try:
        args.func(args)
    except CliError as e:
        return _fail(e.kind, str(e), e.code)
    except ParseError as e:
        return _fail("parse", str(e), EXIT_PARSE)
    except EvalError as e:
        return _fail(type(e).__name__, str(e), e.exit_code)
    except (ValueError, KeyError, OSError, sp.InfeasibleStart) as e:
        return _fail(type(e).__name__, str(e), EXIT_USAGE)
    return 0


if __name__ == "__main__":
    sys.exit(main())
