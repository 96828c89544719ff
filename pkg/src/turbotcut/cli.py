"""Command line: ``cut``, ``gen-corpus`` and ``evaluate``.

Exit codes: 0 success, 2 invalid input, 3 detection failure, 4 I/O error.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import fields

import numpy as np

from . import __version__
from .config import CHOICES, PipelineConfig, parse_config
from .errors import TurbotError
from .imgcore import atomic_write_text

log = logging.getLogger("turbotcut")

EXIT_OK = 0
EXIT_INVALID = 2


def _origin(text):
    parts = text.replace(",", " ").split()
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected X,Y")
    try:
        return (float(parts[0]), float(parts[1]))
    except ValueError:
        raise argparse.ArgumentTypeError("expected two numbers X,Y") from None


def _add_config_flags(p):
    """One flag per configuration key; unset flags leave the file/default value."""
    g = p.add_argument_group("pipeline configuration (override --config)")
    g.add_argument("--config", metavar="FILE", help="key = value configuration file")
    for f in fields(PipelineConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name in CHOICES:
            g.add_argument(flag, dest=f.name, choices=CHOICES[f.name], default=None)
        elif f.name == "close_enabled":
            g.add_argument("--close", dest="close_enabled", action=argparse.BooleanOptionalAction,
                           default=None, help="closing by reconstruction (default on)")
        elif f.name == "origin_px":
            g.add_argument(flag, dest=f.name, type=_origin, default=None, metavar="X,Y")
        else:
            kind = int if f.type in (int, "int") else float
            g.add_argument(flag, dest=f.name, type=kind, default=None, metavar="N")


def _config_from(args):
    overrides = {f.name: getattr(args, f.name, None) for f in fields(PipelineConfig)}
    return parse_config(args.config, overrides)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def _cut_one(job):
    from .pipeline import run_pipeline
    image, cfg, out_xml, out_overlay, debug_dir = job
    return run_pipeline(image, cfg, out_xml=out_xml, out_overlay=out_overlay, debug_dir=debug_dir)


def cmd_cut(args):
    cfg = _config_from(args)
    images = args.images
    if len(images) > 1 and args.out_xml:
        raise SystemExit("--out-xml takes a single image; use --out-dir for batches")
    if len(images) > 1 and not args.out_dir:
        raise SystemExit("several images need --out-dir")
    jobs = []
    for image in images:
        stem = os.path.splitext(os.path.basename(image))[0]
        out_xml = args.out_xml
        overlay = None
        debug_dir = None
        if args.out_dir:
            os.makedirs(args.out_dir, exist_ok=True)
            out_xml = out_xml or os.path.join(args.out_dir, stem + ".xml")
            if args.overlay:
                overlay = os.path.join(args.out_dir, stem + "_overlay.png")
        elif args.overlay:
            overlay = os.path.splitext(out_xml)[0] + "_overlay.png" if out_xml else stem + "_overlay.png"
        if args.debug_dir:
            debug_dir = args.debug_dir if len(images) == 1 else os.path.join(args.debug_dir, stem)
        jobs.append((image, cfg, out_xml, overlay, debug_dir))

    if args.jobs > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_cut_one, jobs))
    else:
        results = [_cut_one(j) for j in jobs]

    for r in results:
        if r.ok:
            cp = r.critical_points
            where = r.xml_path or "stdout"
            print(f"{r.image_path}: ok method={cfg.method} curve={r.curve.kind} points={len(r.curve)} "
                  f"head_begin={cp.head_begin} nose={cp.nose} head_end={cp.head_end} "
                  f"eyes_reversed={cp.eyes_reversed} -> {where}", file=sys.stderr)
            if not r.xml_path:
                sys.stdout.write(r.xml)
        else:
            print(f"{r.image_path}: FAILED [{r.error_stage}] exit {r.exit_code}", file=sys.stderr)
    if args.report:
        payload = [r.report() for r in results]
        atomic_write_text(args.report, json.dumps(payload if len(payload) > 1 else payload[0], indent=2,
                                                  default=_json_default) + "\n")
    codes = [r.exit_code for r in results if r.exit_code]
    return codes[0] if codes else EXIT_OK


def cmd_gen_corpus(args):
    from .synth import write_corpus
    adversarial = [int(v) for v in args.adversarial.split(",") if v.strip()] if args.adversarial else []
    names = write_corpus(args.out, count=args.count, seed=args.seed, adversarial=adversarial)
    print(f"wrote {len(names)} scenes to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(args):
    from .evaluate import evaluate_corpus, scores_csv, scores_table, success_rate
    cfg = _config_from(args)
    if not os.path.isdir(args.directory):
        raise SystemExit(f"not a directory: {args.directory}")
    scores = evaluate_corpus(args.directory, cfg, jobs=args.jobs)
    text = scores_csv(scores)
    if args.csv:
        atomic_write_text(args.csv, text)
    print(scores_table(scores))
    if scores and args.min_success is not None and success_rate(scores) < args.min_success:
        return 3
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="turbotcut",
                                     description="Cutting curves for flatfish head removal.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cut", help="compute the cutting curve of one or more images")
    p.add_argument("images", nargs="+", metavar="IMAGE")
    p.add_argument("--out-xml", metavar="FILE", help="XML output (single image; default stdout)")
    p.add_argument("--out-dir", metavar="DIR", help="write <stem>.xml per image into DIR")
    p.add_argument("--overlay", action="store_true", help="also write an inspection overlay PNG")
    p.add_argument("--debug-dir", metavar="DIR", help="dump every intermediate stage")
    p.add_argument("--report", metavar="FILE", help="JSON run report")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    _add_config_flags(p)
    p.set_defaults(func=cmd_cut)

    p = sub.add_parser("gen-corpus", help="write a synthetic corpus with ground truth")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--adversarial", default="", metavar="I,J,...",
                   help="indices that get clutter glued to the snout")
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("evaluate", help="score the pipeline on a synthetic corpus")
    p.add_argument("directory")
    p.add_argument("--csv", metavar="FILE", help="machine-readable per-image results")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--min-success", type=float, default=None,
                   help="exit 3 when the success rate is below this fraction")
    _add_config_flags(p)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except TurbotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(f"error: {exc.code}", file=sys.stderr)
            return EXIT_INVALID
        raise
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
