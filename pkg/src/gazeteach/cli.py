"""Command-line front: scene tools, headless teaching, serving, dataset
checks and evaluation."""

from __future__ import annotations

import argparse
import json
import sys

from gazeteach import dataset, metrics
from gazeteach.config import TeachConfig, load_config
from gazeteach.scene import load_scene, random_tabletop_scene, save_scene
from gazeteach.service import run_scripted


def _load_cfg(args) -> TeachConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return TeachConfig()


def cmd_scene_generate(args) -> int:
    scene = random_tabletop_scene(seed=args.seed, n_objects=args.objects)
    save_scene(scene, args.out)
    print(f"wrote scene with {len(scene.primitives)} objects to {args.out}")
    return 0


def cmd_scene_inspect(args) -> int:
    scene = load_scene(args.scene)
    print(f"seed {scene.rng_seed}, {len(scene.primitives)} primitives:")
    for p in scene.primitives:
        t = p.pose.translation
        dims = "x".join(f"{d:.3f}" for d in p.dimensions)
        print(
            f"  [{p.object_id:3d}] {p.class_name:<12} {p.shape:<8} dims {dims} m"
            f"  at ({t[0]: .3f}, {t[1]: .3f}, {t[2]: .3f}) m"
        )
    if args.render:
        from PIL import Image

        from gazeteach.geometry import look_at
        from gazeteach.scene import default_scene_intrinsics, render_rgb

        cfg = TeachConfig()
        camera = look_at(cfg.scene_camera_eye, cfg.scene_camera_target)
        rgb = render_rgb(scene, camera, default_scene_intrinsics())
        Image.fromarray(rgb, mode="RGB").save(args.render)
        print(f"rendered preview to {args.render}")
    return 0


def cmd_teach(args) -> int:
    scene = load_scene(args.scene)
    config = _load_cfg(args)
    report = run_scripted(args.script, scene, args.out, config=config, seed=args.seed)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0 if report["final_state"] in ("done", "gaze_tracking", "object_proposed") else 1


def cmd_serve(args) -> int:
    import dataclasses

    from gazeteach.server import serve

    scene = load_scene(args.scene)
    config = _load_cfg(args)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    serve(scene, config, dataset_root=args.out, host=args.host, port=args.port)
    return 0


def cmd_validate(args) -> int:
    report = dataset.validate(args.root)
    print(report)
    return 0 if report.ok else 1


def cmd_stats(args) -> int:
    s = dataset.stats(args.root)
    print(s.to_text())
    if args.json:
        print(json.dumps({f"{c}/{e}": n for (c, e), n in sorted(s.counts.items())}, indent=2))
    return 0


def cmd_eval(args) -> int:
    dets = metrics.load_detections(args.detections)
    gts = metrics.load_ground_truths(args.ground_truth)
    result = metrics.evaluate(dets, gts)
    print(result.to_table())
    if args.pr_dir:
        written = metrics.export_pr_curves(result, args.pr_dir)
        print(f"wrote {len(written)} precision-recall curve file(s) to {args.pr_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gazeteach", description="gaze-guided robot-teaching toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    scene = sub.add_parser("scene", help="generate or inspect scene files")
    scene_sub = scene.add_subparsers(dest="scene_command", required=True)
    gen = scene_sub.add_parser("generate", help="write a random tabletop scene")
    gen.add_argument("--out", required=True, help="output scene YAML path")
    gen.add_argument("--objects", type=int, default=None, help="number of objects (default 3-6)")
    gen.add_argument("--seed", type=int, default=0)
    gen.set_defaults(func=cmd_scene_generate)
    ins = scene_sub.add_parser("inspect", help="summarize a scene file")
    ins.add_argument("scene", help="scene YAML path")
    ins.add_argument("--render", help="also render an RGB preview PNG here")
    ins.set_defaults(func=cmd_scene_inspect)

    teach = sub.add_parser("teach", help="replay a teaching script headlessly")
    teach.add_argument("--script", required=True)
    teach.add_argument("--scene", required=True)
    teach.add_argument("--out", required=True, help="dataset output directory")
    teach.add_argument("--config", help="config YAML")
    teach.add_argument("--seed", type=int, default=None)
    teach.set_defaults(func=cmd_teach)

    serve = sub.add_parser("serve", help="run the interactive teaching service")
    serve.add_argument("--scene", required=True)
    serve.add_argument("--port", type=int, default=8765)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--out", help="dataset output directory")
    serve.add_argument("--config", help="config YAML")
    serve.add_argument("--seed", type=int, default=None)
    serve.set_defaults(func=cmd_serve)

    val = sub.add_parser("validate", help="check a dataset tree for violations")
    val.add_argument("root")
    val.set_defaults(func=cmd_validate)

    st = sub.add_parser("stats", help="per-class viewpoint histogram of a dataset")
    st.add_argument("root")
    st.add_argument("--json", action="store_true", help="also print machine-readable counts")
    st.set_defaults(func=cmd_stats)

    ev = sub.add_parser("eval", help="COCO-style evaluation of detections against ground truth")
    ev.add_argument("--detections", required=True)
    ev.add_argument("--ground-truth", required=True)
    ev.add_argument("--pr-dir", help="write per-class precision-recall curves here")
    ev.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
