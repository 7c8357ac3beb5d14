"""Command-line front end: ``relcoord <subcommand> ...``.

Exit status is 0 on success, 2 for invalid input (bad flags, malformed
files, violated preconditions) and 1 for other runtime failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from relcoord import analogy, dynamics, image_io, mapping, numerosity, spectral, transfer
from relcoord.errors import FormatError, RelcoordError, ValidationError
from relcoord.patching import PatchConfig

log = logging.getLogger("relcoord")


def _write_text(path, text: str) -> None:
    image_io._atomic_write(path, text.encode("utf-8"))


def _resolve(base: Path, p: str) -> Path:
    path = Path(p)
    return path if path.is_absolute() else base / path


def _config(args) -> PatchConfig:
    return PatchConfig(args.patch_size, args.stride)


def _add_patch_flags(p, default_size=4, default_stride=None):
    p.add_argument("--patch-size", type=int, default=default_size)
    p.add_argument("--stride", type=int, default=default_stride)
    p.add_argument("--include-sums", action="store_true", help="append eigenvector sums to sampler vectors")


def _finish_stride(args):
    if args.stride is None:
        args.stride = args.patch_size


def cmd_learn(args) -> int:
    _finish_stride(args)
    manifest_path = Path(args.pairs)
    manifest = json.loads(manifest_path.read_text())
    entries = manifest["pairs"] if isinstance(manifest, dict) else manifest
    base = manifest_path.parent
    pairs = []
    for e in entries:
        src, tgt = (e["source"], e["target"]) if isinstance(e, dict) else e
        pairs.append((image_io.load_any(_resolve(base, src)), image_io.load_any(_resolve(base, tgt))))
    config = _config(args)
    m = mapping.learn_mapping(pairs, config, args.include_sums, args.strategy)
    doc = m.to_json()
    doc["patch_config"] = {"patch_size": config.patch_size, "stride": config.stride}
    _write_text(args.out, json.dumps(doc))
    log.info("learned %dx%d mapping from %d pairs", m.rows, m.cols, len(pairs))
    return 0


def _load_mapping(path) -> tuple[mapping.MappingMatrix, dict]:
    doc = json.loads(Path(path).read_text())
    try:
        return mapping.MappingMatrix.from_json(doc), doc.get("patch_config", {})
    except (KeyError, TypeError, IndexError) as exc:
        raise FormatError(f"{path}: not a mapping matrix file ({exc})") from exc


def cmd_apply(args) -> int:
    m, stored = _load_mapping(args.map)
    size = args.patch_size or stored.get("patch_size", 4)
    stride = args.stride or stored.get("stride", size)
    config = PatchConfig(size, stride)
    test = image_io.load_any(args.inp)
    pred = transfer.apply_mapping(m, test, config, orient=not args.no_orient)
    image_io.save_pgm(pred, args.out)
    return 0


def cmd_raven(args) -> int:
    _finish_stride(args)
    task_path = Path(args.task)
    task = json.loads(task_path.read_text())
    base = task_path.parent
    load = lambda p: image_io.load_any(_resolve(base, p))  # noqa: E731
    idx, scores = analogy.solve_raven(
        load(task["a"]), load(task["b"]), load(task["c"]),
        [load(p) for p in task["candidates"]], _config(args), args.include_sums,
    )
    result = {"index": idx, "scores": scores}
    if args.out:
        _write_text(args.out, json.dumps(result))
    print(json.dumps(result))
    return 0


def cmd_count(args) -> int:
    img = image_io.load_any(args.inp)
    zeros = numerosity.zero_eigenvalues(img, args.threshold, args.eig_tol, args.neighborhood)
    print(json.dumps({"count": len(zeros), "eigenvalues_near_zero": zeros.tolist()}))
    return 0


def cmd_simulate(args) -> int:
    img = image_io.load_any(args.inp)
    if args.crop:
        r, c, k = (int(v) for v in args.crop.split(","))
        img = img[r : r + k, c : c + k]
        if img.shape != (k, k):
            raise ValidationError(f"crop {args.crop} falls outside the image")
    config = dynamics.DynamicsConfig(args.gamma, args.order, args.dt, args.t_end)
    lap = spectral.patch_laplacian(img)
    if args.analytic:
        sig = dynamics.analytic_response(spectral.sampler_vector(img, include_sums=True), config)
    else:
        sig = dynamics.simulate(lap, config)
    if args.out:
        text = sig.to_csv() if str(args.out).endswith(".csv") else json.dumps(sig.to_json())
        _write_text(args.out, text)
    summary = {"samples": len(sig), "dt": sig.dt, "h0": float(sig.samples[0]), "h_end": float(sig.samples[-1])}
    if args.frequencies:
        freqs, complete = dynamics.recover_frequencies(sig, args.frequencies)
        summary.update(frequencies=freqs.tolist(), complete=complete)
    print(json.dumps(summary))
    return 0


def cmd_augment(args) -> int:
    img = image_io.load_any(args.inp)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.deform_angle is None:
        images = image_io.augment(img, args.max_shift, args.max_angle, args.noise, args.n, args.seed)
        for i, a in enumerate(images):
            image_io.save_pgm(a, out_dir / f"aug_{i:03d}.pgm")
        return 0
    spec = image_io.DeformSpec.rotation(args.deform_angle)
    pairs = image_io.augment_pairs(
        img, spec, args.max_shift, args.max_angle, args.noise, args.n, args.seed, args.target_noise
    )
    entries = []
    for i, (s, t) in enumerate(pairs):
        image_io.save_pgm(s, out_dir / f"source_{i:03d}.pgm")
        image_io.save_pgm(t, out_dir / f"target_{i:03d}.pgm")
        entries.append({"source": f"source_{i:03d}.pgm", "target": f"target_{i:03d}.pgm"})
    _write_text(out_dir / "pairs.json", json.dumps({"pairs": entries}, indent=1))
    return 0


def cmd_mnist_extract(args) -> int:
    data = image_io.load_idx(args.images, args.labels)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    idx = np.arange(len(data))
    if args.digit is not None:
        if data.labels is None:
            raise ValidationError("--digit needs --labels")
        idx = idx[data.labels == args.digit]
    for i in idx[args.start : args.start + args.count]:
        image_io.save_pgm(data.images[i], out_dir / f"img_{i:05d}.pgm")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relcoord", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", help="learn a mapping matrix from image pairs")
    p.add_argument("--pairs", required=True, help="JSON manifest of source/target image paths")
    p.add_argument("--out", required=True)
    p.add_argument("--strategy", choices=["vote", "average_vectors"], default="vote")
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; learning is deterministic")
    _add_patch_flags(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("apply", help="apply a learned mapping to a new image")
    p.add_argument("--map", required=True)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--patch-size", type=int, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--no-orient", action="store_true", help="place patches without the learned symmetry")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("raven", help="solve an A:B :: C:? task")
    p.add_argument("--task", required=True, help="JSON with paths a, b, c and candidates")
    p.add_argument("--out")
    _add_patch_flags(p, default_stride=1)
    p.set_defaults(func=cmd_raven)

    p = sub.add_parser("count", help="count objects via zero-eigenvalue multiplicity")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--eig-tol", type=float, default=1e-8)
    p.add_argument("--neighborhood", type=int, choices=[4, 8], default=8)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("simulate", help="run the sampler dynamics on a patch")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--crop", help="row,col,size of the patch to use (default: whole image)")
    p.add_argument("--gamma", type=float, default=0.2)
    p.add_argument("--order", choices=["first", "second"], default="second")
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--t-end", type=float, default=2.0)
    p.add_argument("--analytic", action="store_true", help="closed-form response instead of integration")
    p.add_argument("--frequencies", type=int, default=0, help="report this many spectral peaks")
    p.add_argument("--out", help=".csv or .json signal export")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("augment", help="write jittered copies, or covarying training pairs")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--max-shift", type=int, default=1)
    p.add_argument("--max-angle", type=float, default=0.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--target-noise", type=float, default=0.0)
    p.add_argument("--deform-angle", type=float, default=None, help="also write rotated targets and pairs.json")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("mnist-extract", help="export IDX images as PGM files")
    p.add_argument("--images", required=True)
    p.add_argument("--labels")
    p.add_argument("--digit", type=int)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_mnist_extract)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ValidationError, FormatError, json.JSONDecodeError, KeyError) as exc:
        print(f"relcoord: error: {exc}", file=sys.stderr)
        return 2
    except (RelcoordError, OSError) as exc:
        print(f"relcoord: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
