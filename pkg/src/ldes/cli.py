"""Command-line front-end: map synthesis, blending, baking and calibration
as composable subcommands.

All angles on the command line are degrees. Map outputs follow the naming
convention; pass a directory to ``--out`` to have the filename generated, or
a full conforming filename to control it. Every subcommand is deterministic
and exits non-zero with a one-line diagnostic on failure. The LDES_THREADS
environment variable caps internal row-band parallelism.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys

from . import calibrate, io, mapgen, resample, transform
from .core import FootageMap, ImageBuffer, LdesError, ViewMap
from .projection import load_params, save_params
from .resample import BILINEAR, CATMULL_ROM, SampleFilter


def _filter_from_name(name: str) -> SampleFilter:
    if name == "bilinear":
        return BILINEAR
    if name in ("catmull-rom", "catmull_rom"):
        return CATMULL_ROM
    raise ValueError(f"unknown filter {name!r}")


def _sanitize_description(text: str) -> str:
    clean = re.sub(r"[^A-Za-z0-9._-]+", "-", text).strip("_")
    return clean or "Untitled"


def _params_from_file(path, desc_flag: str | None):
    params, description = load_params(path)
    if desc_flag:
        description = desc_flag
    if not description:
        description = _sanitize_description(os.path.splitext(os.path.basename(path))[0])
    return params, _sanitize_description(description)


def _write_map_out(map_obj, out: str, description: str) -> str:
    if os.path.isdir(out) or out.endswith(os.sep):
        path = os.path.join(out, io.map_filename(map_obj, description, "exr"))
    else:
        path = out
    io.write_map(map_obj, path)
    return path


def _read_view_map(path) -> ViewMap:
    map_obj = io.read_map(path)
    if not isinstance(map_obj, ViewMap):
        raise ValueError(f"{path}: expected a view map")
    return map_obj


def _read_footage_map(path) -> FootageMap:
    map_obj = io.read_map(path)
    if not isinstance(map_obj, FootageMap):
        raise ValueError(f"{path}: expected a footage map")
    return map_obj


def _cmd_gen_view(args) -> int:
    params, description = _params_from_file(args.params, args.desc)
    match = re.fullmatch(r"(\d+)x(\d+)", args.size)
    if not match:
        raise ValueError(f"--size must look like 1920x1080, got {args.size!r}")
    width, height = int(match.group(1)), int(match.group(2))
    vmap = mapgen.generate_view_map(params, width, height, with_vignette=args.vignette)
    path = _write_map_out(vmap, args.out, description)
    print(path)
    return 0


def _cmd_gen_footage(args) -> int:
    if (args.params is None) == (args.from_view is None):
        raise ValueError("provide either a params file or --from-view, not both")
    if args.params:
        params, description = _params_from_file(args.params, args.desc)
        size = args.size or 1024
        fmap = mapgen.generate_footage_map(params, size)
    else:
        vmap = _read_view_map(args.from_view)
        description = args.desc or io.parse_filename(args.from_view).description
        size = args.size or mapgen.default_footage_size(vmap.image.width, vmap.image.height)
        fmap = mapgen.derive_footage_map(vmap, size)
    path = _write_map_out(fmap, args.out, _sanitize_description(description))
    print(path)
    return 0


def _parse_keyframes(text: str) -> list[tuple[int, float]]:
    frames = []
    for token in text.split(","):
        frame_str, _, value_str = token.partition(":")
        frames.append((int(frame_str), float(value_str)))
    if sorted(f for f, _ in frames) != [f for f, _ in frames]:
        raise ValueError("keyframes must be in ascending frame order")
    return frames


def _opacity_at(frames: list[tuple[int, float]], frame: int) -> float:
    if frame <= frames[0][0]:
        return frames[0][1]
    for (f0, v0), (f1, v1) in zip(frames, frames[1:]):
        if frame <= f1:
            if f1 == f0:
                return v1
            return v0 + (v1 - v0) * (frame - f0) / (f1 - f0)
    return frames[-1][1]


def _cmd_blend(args) -> int:
    a = _read_view_map(args.vmap_a)
    b = _read_view_map(args.vmap_b)
    if args.common_fov is not None:
        omega = math.radians(args.common_fov)
        a = transform.normalize_fov(a, omega)
        b = transform.normalize_fov(b, omega)

    if ":" in args.opacity:
        frames = _parse_keyframes(args.opacity)
        parts = io.parse_filename(args.out)
        first, last = frames[0][0], frames[-1][0]
        digits = max(4, len(str(last)))
        for frame in range(first, last + 1):
            blended = transform.blend_view_maps(a, b, _opacity_at(frames, frame))
            name = io.format_filename(
                io.LdesFilename(
                    parts.map_type,
                    f"{parts.description}{frame:0{digits}d}",
                    parts.fov_degrees,
                    parts.normalized,
                    parts.extension,
                )
            )
            path = os.path.join(os.path.dirname(args.out), name)
            io.write_map(blended, path)
            print(path)
        return 0

    blended = transform.blend_view_maps(a, b, float(args.opacity))
    io.write_map(blended, args.out)
    print(args.out)
    return 0


def _cmd_bake(args) -> int:
    vmap = _read_view_map(args.vmap)
    fmap = _read_footage_map(args.fmap)
    stmap = resample.bake(
        vmap, fmap, _filter_from_name(args.filter), supersample=args.supersample
    )
    io.write_image(args.out, stmap)
    print(args.out)
    return 0


def _cmd_apply(args) -> int:
    footage = io.read_image(args.footage)
    stmap = io.read_image(args.stmap)
    if args.flip_t:
        data = stmap.data.copy()
        data[:, :, 1] = 1.0 - data[:, :, 1]
        stmap = ImageBuffer(data)
    warped = resample.apply_stmap(footage, stmap, _filter_from_name(args.filter))
    io.write_image(args.out, warped)
    print(args.out)
    return 0


def _cmd_rays(args) -> int:
    vmap = _read_view_map(args.vmap)
    io.write_image(args.out, transform.view_map_to_rays(vmap))
    print(args.out)
    return 0


def _cmd_rotate(args) -> int:
    vmap = _read_view_map(args.vmap)
    rotated = transform.rotate_view_map(
        vmap,
        pan=math.radians(args.pan),
        tilt=math.radians(args.tilt),
        roll=math.radians(args.roll),
    )
    description = args.desc or io.parse_filename(args.vmap).description + "_Rotated"
    path = _write_map_out(rotated, args.out, _sanitize_description(description))
    print(path)
    return 0


def _cmd_vignette(args) -> int:
    footage = io.read_image(args.footage)
    vmap = _read_view_map(args.vmap)
    if args.divide:
        result = resample.vignette_divide(footage, vmap)
    else:
        result = resample.vignette_multiply(footage, vmap)
    io.write_image(args.out, result)
    print(args.out)
    return 0


def _cmd_fit(args) -> int:
    correspondences = calibrate.read_correspondences(args.correspondences)
    seed, description = load_params(args.seed_params)
    config = calibrate.FitConfig(
        free_parameters=tuple(name.strip() for name in args.free.split(",") if name.strip()),
        max_iterations=args.max_iterations,
    )
    fitted, report = calibrate.fit(correspondences, seed, config)
    save_params(args.out, fitted, description)
    text = report.to_text()
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


def _cmd_info(args) -> int:
    parts = io.parse_filename(args.path)
    print(f"type {parts.map_type}")
    print(f"description {parts.description}")
    print(f"fov_degrees {parts.fov_degrees}")
    print(f"normalized {int(parts.normalized)}")
    print(f"extension {parts.extension}")
    if os.path.exists(args.path):
        map_obj = io.read_map(args.path)
        image = map_obj.image
        print(f"size {image.width}x{image.height}")
        print(f"channels {image.channels}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ldes",
        description="Lens distortion encoding toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-view", help="synthesize a view map from a lens model")
    p.add_argument("params", help="lens parameter file")
    p.add_argument("--size", required=True, help="output size, e.g. 1920x1080")
    p.add_argument("--vignette", action="store_true", help="encode vignette in the blue channel")
    p.add_argument("--out", required=True, help="output file or directory")
    p.add_argument("--desc", help="description token for the filename")
    p.set_defaults(func=_cmd_gen_view)

    p = sub.add_parser("gen-footage", help="synthesize or derive a footage map")
    p.add_argument("params", nargs="?", help="lens parameter file")
    p.add_argument("--from-view", help="derive from an existing view map instead")
    p.add_argument("--size", type=int, help="square map size (default: power of two)")
    p.add_argument("--out", required=True, help="output file or directory")
    p.add_argument("--desc", help="description token for the filename")
    p.set_defaults(func=_cmd_gen_footage)

    p = sub.add_parser("blend", help="blend two view maps (optionally keyframed)")
    p.add_argument("vmap_a")
    p.add_argument("vmap_b")
    p.add_argument("--opacity", required=True,
                   help="blend factor in [0,1], or keyframes like 0:0,24:1")
    p.add_argument("--common-fov", type=float,
                   help="normalize both maps to this FOV (degrees) first")
    p.add_argument("--out", required=True, help="output filename (frame number "
                   "is appended to the description for keyframed blends)")
    p.set_defaults(func=_cmd_blend)

    p = sub.add_parser("bake", help="bake view map x footage map into an STMap")
    p.add_argument("vmap")
    p.add_argument("fmap")
    p.add_argument("--filter", default="bilinear", choices=["bilinear", "catmull-rom"])
    p.add_argument("--supersample", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bake)

    p = sub.add_parser("apply", help="warp footage through a baked STMap")
    p.add_argument("footage")
    p.add_argument("stmap")
    p.add_argument("--filter", default="bilinear", choices=["bilinear", "catmull-rom"])
    p.add_argument("--flip-t", action="store_true",
                   help="flip the STMap's vertical coordinate (host compatibility)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_apply)

    p = sub.add_parser("rays", help="export a view map as unit ray vectors")
    p.add_argument("vmap")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_rays)

    p = sub.add_parser("rotate", help="pan/tilt/roll the encoded camera")
    p.add_argument("vmap")
    p.add_argument("--pan", type=float, default=0.0, help="degrees")
    p.add_argument("--tilt", type=float, default=0.0, help="degrees")
    p.add_argument("--roll", type=float, default=0.0, help="degrees")
    p.add_argument("--out", required=True)
    p.add_argument("--desc", help="description token for the filename")
    p.set_defaults(func=_cmd_rotate)

    p = sub.add_parser("vignette", help="divide out or multiply in a map's vignette")
    p.add_argument("footage")
    p.add_argument("vmap")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--divide", action="store_true")
    group.add_argument("--multiply", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_vignette)

    p = sub.add_parser("fit", help="fit lens parameters to correspondences")
    p.add_argument("correspondences", help="text file: s t dir_x dir_y dir_z [weight]")
    p.add_argument("seed_params", help="starting parameter file")
    p.add_argument("--free", required=True,
                   help="comma-separated free parameters, e.g. omega_deg,k,squeeze")
    p.add_argument("--max-iterations", type=int, default=200)
    p.add_argument("--out", required=True, help="fitted parameter file")
    p.add_argument("--report", help="also write the fit report here")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("info", help="print a map file's parsed metadata")
    p.add_argument("path")
    p.set_defaults(func=_cmd_info)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (LdesError, ValueError, OSError) as exc:
        print(f"ldes {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
