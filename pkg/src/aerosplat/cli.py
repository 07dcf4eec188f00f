"""Command-line interface.

Subcommands: simulate, render, metrics, presets.  Exit codes: 0 success,
2 config error, 3 solver blow-up, 4 I/O error.
"""

import argparse
import dataclasses
import os
import sys

import numpy as np

from . import _kernels, metrics, mpm, ppm, scene, surface
from .errors import BlowUpError, ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_IO = 4


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="aerosplat",
        description="Surface-patch wind simulation with a CPU splat renderer.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scene config and write frames")
    sim.add_argument("--config", required=True, help="scene config file")
    sim.add_argument("--frames", type=int, help="override frame count")
    sim.add_argument("--seed", type=int, help="override RNG seed")
    sim.add_argument("--out", help="override output directory")
    sim.add_argument(
        "--threads",
        type=int,
        default=1,
        help="worker count (only 1 is implemented; higher values warn)",
    )
    sim.add_argument("--dump-particles", action="store_true")
    sim.add_argument("--dump-patches", action="store_true")
    sim.add_argument("--quiet", action="store_true")

    ren = sub.add_parser("render", help="render one frame from a patch dump")
    ren.add_argument("--patches", required=True, help="patch dump file")
    ren.add_argument("--config", required=True, help="scene config (camera/light)")
    ren.add_argument("--out", required=True, help="output PPM path")

    met = sub.add_parser("metrics", help="compare frames or point dumps")
    met.add_argument("metric", choices=["psnr", "chamfer"])
    met.add_argument("--pred", required=True)
    met.add_argument("--ref", required=True)

    pre = sub.add_parser("presets", help="list or show shipped presets")
    pre_sub = pre.add_subparsers(dest="preset_command", required=True)
    pre_sub.add_parser("list")
    show = pre_sub.add_parser("show")
    show.add_argument("name")

    return parser


def _cmd_simulate(args):
    config = scene.load_config(args.config)
    if args.frames is not None:
        config.frames = args.frames
    if args.seed is not None:
        config.seed = args.seed
        config.flow = dataclasses.replace(config.flow, seed=args.seed)
    if args.out is not None:
        config.out_dir = args.out
    if args.dump_particles:
        config.dump_particles = True
    if args.dump_patches:
        config.dump_patches = True
    if args.threads > 1:
        print(
            f"note: --threads {args.threads} requested; running single-threaded "
            "(the only implemented mode)",
            file=sys.stderr,
        )
    if not args.quiet:
        print(f"kernel backend: {_kernels.active_name()}")
    summary = scene.run_simulation(config, quiet=args.quiet)
    if not args.quiet:
        print(f"wrote {summary.frames_written} frames to {summary.out_dir}")
    return EXIT_OK


def _cmd_render(args):
    config = scene.load_config(args.config)
    scene.render_patch_dump(config, args.patches, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def _load_points(path):
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] < 3:
        raise ValueError(f"{path}: expected at least 3 columns")
    return data[:, :3]


def _paired_frames(pred_dir, ref_dir):
    names = sorted(
        name
        for name in os.listdir(pred_dir)
        if name.startswith("frame_") and name.endswith(".ppm")
    )
    pairs = [
        (os.path.join(pred_dir, name), os.path.join(ref_dir, name))
        for name in names
        if os.path.exists(os.path.join(ref_dir, name))
    ]
    if not pairs:
        raise ValueError(f"no matching frame_*.ppm pairs under {pred_dir} and {ref_dir}")
    return pairs


def _cmd_metrics(args):
    if args.metric == "psnr":
        if os.path.isdir(args.pred) and os.path.isdir(args.ref):
            values = []
            for pred_path, ref_path in _paired_frames(args.pred, args.ref):
                value = metrics.psnr(ppm.read_ppm(pred_path), ppm.read_ppm(ref_path))
                values.append(value)
                print(f"{os.path.basename(pred_path)} {value:.6g}")
            print(f"mean {np.mean(values):.6g}")
        else:
            value = metrics.psnr(ppm.read_ppm(args.pred), ppm.read_ppm(args.ref))
            print(f"{value:.6g}")
    else:
        value = metrics.chamfer(_load_points(args.pred), _load_points(args.ref))
        print(f"{value:.6g}")
    return EXIT_OK


def _cmd_presets(args):
    if args.preset_command == "list":
        for name in scene.preset_names():
            print(name)
    else:
        sys.stdout.write(scene.preset_text(args.name))
    return EXIT_OK


def main(argv=None):
    args = _build_parser().parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "render": _cmd_render,
        "metrics": _cmd_metrics,
        "presets": _cmd_presets,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"solver blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
