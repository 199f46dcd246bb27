"""Command-line front end.

Exit codes: 0 success, 1 bad usage, 2 I/O failure, 3 invalid configuration
or geometry.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from pathlib import Path

from .edges import CannyParams, canny, edge_image, superimpose
from .errors import ConfigError, MalformedFileError, UnsupportedDepthError
from .glcm import GlcmParams
from .imaging import load_image, save_image
from .pipeline import (
    EMIT_CHOICES,
    DiscTruth,
    PipelineConfig,
    analyze,
    generate_phantom,
    run_pipeline,
    write_outputs,
)
from .vq import SplitParams

_CONFIG_SECTION = "pipeline"


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract here is 1
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_block(text: str) -> tuple[int, int]:
    try:
        w_str, h_str = text.lower().split("x")
        w, h = int(w_str), int(h_str)
    except ValueError as exc:
        raise ConfigError(f"block must look like WxH, got {text!r}") from exc
    if w < 1 or h < 1:
        raise ConfigError(f"block dimensions must be positive, got {text!r}")
    return w, h


def _read_config_file(path: str) -> dict[str, str]:
    """INI options for the pipeline; a bare key=value file is accepted too."""
    text = Path(path).read_text()
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError:
        parser = configparser.ConfigParser()
        parser.read_string(f"[{_CONFIG_SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"bad config file {path}: {exc}") from exc
    if not parser.has_section(_CONFIG_SECTION):
        return {}
    return dict(parser.items(_CONFIG_SECTION))


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    """Defaults, overridden by the config file, overridden by flags."""
    values: dict[str, str] = {}
    if getattr(args, "config", None):
        values = _read_config_file(args.config)

    def pick(flag_value, key: str, cast):
        if flag_value is not None:
            return flag_value
        if key in values:
            try:
                return cast(values[key])
            except ValueError as exc:
                raise ConfigError(f"bad config value for {key}: {values[key]!r}") from exc
        return None

    cfg = PipelineConfig()
    v = pick(getattr(args, "codebook_size", None), "codebook_size", int)
    if v is not None:
        cfg.codebook_size = v
    v = pick(getattr(args, "groups", None), "groups", int)
    if v is not None:
        cfg.group_count = v
    v = pick(getattr(args, "block", None), "block", _parse_block)
    if v is not None:
        cfg.block_w, cfg.block_h = v

    window = pick(getattr(args, "window", None), "window", int)
    levels = pick(getattr(args, "levels", None), "levels", int)
    distance = pick(None, "distance", int)
    angle = pick(None, "angle", int)
    glcm_kw = {}
    if window is not None:
        glcm_kw["window"] = window
    if levels is not None:
        glcm_kw["levels"] = levels
    if distance is not None:
        glcm_kw["distance"] = distance
    if angle is not None:
        glcm_kw["angle"] = angle
    if glcm_kw:
        try:
            cfg.glcm = GlcmParams(**glcm_kw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    sigma = pick(getattr(args, "sigma", None), "sigma", float)
    low = pick(getattr(args, "low", None), "low", float)
    high = pick(getattr(args, "high", None), "high", float)
    canny_kw = {}
    if sigma is not None:
        canny_kw["sigma"] = sigma
    if low is not None:
        canny_kw["low"] = low
    if high is not None:
        canny_kw["high"] = high
    if canny_kw:
        try:
            cfg.canny = CannyParams(**canny_kw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    out = pick(getattr(args, "out", None), "out", str)
    if out is not None:
        cfg.output_dir = Path(out)

    emit = getattr(args, "emit", None)
    if emit is None and "emit" in values:
        emit = [e.strip() for e in values["emit"].split(",") if e.strip()]
    if emit:
        cfg.emit = frozenset(emit)

    cfg.validate()
    return cfg


def _parse_truth(text: str | None) -> DiscTruth | None:
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"truth must look like CX,CY,R, got {text!r}")
    try:
        cx, cy, r = (int(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"truth must be three integers, got {text!r}") from exc
    return DiscTruth(cx, cy, r)


def _add_shared_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("-c", "--config", metavar="FILE", help="INI config file")
    sub.add_argument("--codebook-size", type=int, default=None)
    sub.add_argument("--groups", type=int, default=None)
    sub.add_argument("--block", default=None, metavar="WxH")
    sub.add_argument("--window", type=int, default=None)
    sub.add_argument("--levels", type=int, default=None)
    sub.add_argument("--sigma", type=float, default=None)
    sub.add_argument("--low", type=float, default=None)
    sub.add_argument("--high", type=float, default=None)
    sub.add_argument("--out", default=None, metavar="DIR")


def _make_parser() -> _Parser:
    parser = _Parser(prog="vqdemark", description="Texture-based tumor demarcation toolkit")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("pipeline", help="run all methods and write every output")
    p.add_argument("input")
    _add_shared_flags(p)
    p.add_argument("--emit", action="append", choices=sorted(EMIT_CHOICES), default=None)
    p.add_argument("--truth", default=None, metavar="CX,CY,R")

    p = subs.add_parser("vq", help="codebook segmentation with edge overlays")
    p.add_argument("input")
    _add_shared_flags(p)

    p = subs.add_parser("glcm", help="co-occurrence feature maps")
    p.add_argument("input")
    _add_shared_flags(p)

    p = subs.add_parser("watershed", help="gradient watershed with line overlay")
    p.add_argument("input")
    _add_shared_flags(p)

    p = subs.add_parser("canny", help="edge detection on the raw image")
    p.add_argument("input")
    _add_shared_flags(p)
    p.add_argument("--overlay", action="store_true", help="superimpose edges on the input")

    p = subs.add_parser("phantom", help="synthesize a noisy disc test image")
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--cx", type=int, default=64)
    p.add_argument("--cy", type=int, default=64)
    p.add_argument("--radius", type=int, default=15)
    p.add_argument("--bg-mean", type=float, default=60.0)
    p.add_argument("--tumor-mean", type=float, default=200.0)
    p.add_argument("--noise-sigma", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="phantom.pgm", metavar="FILE")

    p = subs.add_parser("compare", help="run all methods, print the report as JSON")
    p.add_argument("input")
    _add_shared_flags(p)
    p.add_argument("--truth", default=None, metavar="CX,CY,R")
    return parser


def _cmd_pipeline(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    report = run_pipeline(cfg, args.input, _parse_truth(args.truth))
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def _run_subset(args: argparse.Namespace, emit: frozenset) -> int:
    cfg = _build_config(args)
    cfg.emit = emit
    img = load_image(args.input)
    art = analyze(img, cfg, None, input_name=str(args.input))
    for path in write_outputs(art, cfg):
        print(path)
    return 0


def _cmd_canny(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    img = load_image(args.input)
    em = canny(img, cfg.canny)
    out = superimpose(img, em) if args.overlay else edge_image(em)
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / ("canny_overlay.pgm" if args.overlay else "canny_edges.pgm")
    save_image(out, path)
    print(path)
    return 0


def _cmd_phantom(args: argparse.Namespace) -> int:
    img = generate_phantom(
        args.width, args.height, args.cx, args.cy, args.radius,
        bg_mean=args.bg_mean, tumor_mean=args.tumor_mean,
        noise_sigma=args.noise_sigma, seed=args.seed,
    )
    save_image(img, args.out)
    print(args.out)
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    img = load_image(args.input)
    art = analyze(img, cfg, _parse_truth(args.truth), input_name=str(args.input))
    print(json.dumps(art.report.to_dict(), indent=2, sort_keys=True))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _make_parser().parse_args(argv)
    try:
        if args.command == "pipeline":
            return _cmd_pipeline(args)
        if args.command == "vq":
            return _run_subset(args, frozenset({"clusters", "edges", "superimposed"}))
        if args.command == "glcm":
            return _run_subset(args, frozenset({"glcm"}))
        if args.command == "watershed":
            return _run_subset(args, frozenset({"watershed"}))
        if args.command == "canny":
            return _cmd_canny(args)
        if args.command == "phantom":
            return _cmd_phantom(args)
        if args.command == "compare":
            return _cmd_compare(args)
        raise AssertionError(f"unhandled command {args.command}")
    except (MalformedFileError, UnsupportedDepthError, OSError) as exc:
        print(f"vqdemark: i/o error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"vqdemark: invalid request: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
