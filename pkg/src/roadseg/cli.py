"""Command-line entry point: ``roadseg <subcommand> ...``."""
from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import io as rio
from .core import RoadMask
from .errors import RoadSegError
from .evaluation import (bench, pixel_metrics, sigma, sweep_delta_theta, to_csv,
                         to_text)
from .io import FORMATS
from .segmentation import clean_mask, segment
from .solver import estimate
from .synth import KAPPA_GRID, benchmark_suite, generate, load_config, to_config
from .transform import parse_delta, transform_map

log = logging.getLogger("roadseg")


@dataclass
class RunConfig:
    command: str
    inputs: list[Path] = field(default_factory=list)
    mask: Path | None = None
    fmt: str | None = None
    out: Path = Path("out")
    kappa: list[float] = field(default_factory=list)
    seed: int = 0
    delta: str = "auto"
    polarity: str = "below"
    min_area: int = 0
    repeats: int = 5
    truth: Path | None = None
    spec: Path | None = None
    figures: bool = True


def _nonneg_int(text):
    val = int(text)
    if val < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {val}")
    return val


def _pos_int(text):
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {val}")
    return val


def _kappa(text):
    val = float(text)
    if not (val >= 0 and math.isfinite(val)):
        raise argparse.ArgumentTypeError(f"kappa must be a finite value >= 0, got {text}")
    return val


def _delta(text):
    try:
        parse_delta(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = argparse.ArgumentParser(prog="roadseg", formatter_class=fmt,
                                description="Roll-angle aware road disparity transformation and damage segmentation.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def io_flags(sp, need_input=True):
        sp.add_argument("--input", nargs="+", type=Path, required=need_input, default=None,
                        help="disparity map file(s)")
        sp.add_argument("--mask", type=Path, default=None,
                        help="road mask (8-bit PGM or PNG, nonzero = road); whole image if omitted")
        sp.add_argument("--format", choices=FORMATS, default=None,
                        help="disparity file format; inferred from the suffix if omitted")
        sp.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        sp.add_argument("--no-figures", action="store_true", help="skip matplotlib figures")

    sp = sub.add_parser("synth", formatter_class=fmt, help="write the synthetic roll-angle suite")
    sp.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    sp.add_argument("--kappa", type=_kappa, default=0.0, help="noise scale (uniform noise kappa*[-1, 1])")
    sp.add_argument("--seed", type=int, default=0, help="base random seed")
    sp.add_argument("--spec", type=Path, default=None,
                    help="key = value config for a single map instead of the 51-map suite")
    sp.add_argument("--format", choices=FORMATS, default="binary-f64-grid", help="disparity file format")

    sp = sub.add_parser("transform", formatter_class=fmt, help="estimate the road model and flatten the map")
    io_flags(sp)
    sp.add_argument("--delta", type=_delta, default="auto", help="offset policy: auto or fixed:X")

    sp = sub.add_parser("segment", formatter_class=fmt, help="transform and segment road damage")
    io_flags(sp)
    sp.add_argument("--delta", type=_delta, default="auto", help="offset policy: auto or fixed:X")
    sp.add_argument("--polarity", choices=("below", "above"), default="below",
                    help="damage lies below (potholes) or above the threshold")
    sp.add_argument("--min-area", type=_nonneg_int, default=0,
                    help="drop damage components smaller than this many pixels")
    sp.add_argument("--truth", type=Path, default=None,
                    help="ground-truth damage mask; enables metric output (single input only)")

    sp = sub.add_parser("evaluate", formatter_class=fmt, help="roll-angle error sweep over the synthetic suite")
    sp.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    sp.add_argument("--kappa", type=_kappa, nargs="+", default=list(KAPPA_GRID), help="noise scales to sweep")
    sp.add_argument("--seed", type=int, default=0, help="base random seed")
    sp.add_argument("--no-figures", action="store_true", help="skip matplotlib figures")

    sp = sub.add_parser("bench", formatter_class=fmt, help="closed form vs. GSS vs. GD: sigma and runtime")
    io_flags(sp, need_input=False)
    sp.add_argument("--kappa", type=_kappa, default=0.0, help="noise scale of the synthetic suite (no --input)")
    sp.add_argument("--seed", type=int, default=0, help="base random seed (no --input)")
    sp.add_argument("--repeats", type=_pos_int, default=5, help="timed repeats per method")
    return p


def parse_config(argv=None) -> RunConfig:
    """Parse and validate every flag; raises SystemExit on bad input."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    kappa = ns.kappa if isinstance(getattr(ns, "kappa", None), list) else [getattr(ns, "kappa", 0.0)]
    cfg = RunConfig(
        command=ns.command,
        inputs=list(getattr(ns, "input", None) or []),
        mask=getattr(ns, "mask", None),
        fmt=getattr(ns, "format", None),
        out=ns.out,
        kappa=kappa,
        seed=getattr(ns, "seed", 0),
        delta=getattr(ns, "delta", "auto"),
        polarity=getattr(ns, "polarity", "below"),
        min_area=getattr(ns, "min_area", 0),
        repeats=getattr(ns, "repeats", 5),
        truth=getattr(ns, "truth", None),
        spec=getattr(ns, "spec", None),
        figures=not getattr(ns, "no_figures", False),
    )
    missing = [p for p in [*cfg.inputs, cfg.mask, cfg.truth, cfg.spec] if p is not None and not p.exists()]
    if missing:
        parser.error("no such file: " + ", ".join(map(str, missing)))
    if cfg.truth is not None and len(cfg.inputs) != 1:
        parser.error("--truth needs exactly one --input")
    if ns.verbose:
        logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    return cfg


# -- helpers ----------------------------------------------------------------------

def _write_manifest(out: Path, rows: list[dict]) -> None:
    if not rows:
        return
    with open(out / "manifest.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def _load(cfg: RunConfig, path: Path):
    dmap = rio.read_disparity(path, cfg.fmt)
    mask = rio.read_mask(cfg.mask) if cfg.mask else RoadMask.full(*dmap.shape)
    return dmap, mask


def _model_report(tm, sig) -> dict:
    m = tm.model
    return {
        "theta_deg": f"{m.theta_deg:.6f}",
        "a0": repr(m.a0),
        "a1": repr(m.a1),
        "e_min": repr(m.e_min),
        "delta": repr(tm.delta),
        "sigma": repr(sig.sigma),
        "n_pixels": m.n_pixels,
        "method": m.method,
    }


def _write_kv(path: Path, d: dict) -> None:
    width = max(len(k) for k in d)
    path.write_text("".join(f"{k.ljust(width)} : {v}\n" for k, v in d.items()))


# -- subcommands ------------------------------------------------------------------

def cmd_synth(cfg: RunConfig) -> int:
    cfg.out.mkdir(parents=True, exist_ok=True)
    if cfg.spec is not None:
        specs = [("map_000", load_config(cfg.spec))]
    else:
        specs = [(f"map_{i:03d}", s) for i, s in enumerate(benchmark_suite(cfg.kappa[0], cfg.seed))]
    ext = {"uint16-png-div256": ".png", "pgm16-div256": ".pgm", "csv-real": ".csv",
           "binary-f64-grid": ".dspf"}[cfg.fmt or "binary-f64-grid"]
    rows = []
    for name, spec in specs:
        dmap, mask, truth = generate(spec)
        d = cfg.out / name
        d.mkdir(exist_ok=True)
        rio.write_disparity(dmap, d / f"disparity{ext}", cfg.fmt or "binary-f64-grid")
        rio.write_mask(mask, d / "mask.pgm")
        rio.write_mask(truth.damage, d / "truth.pgm")
        (d / "spec.cfg").write_text(to_config(spec))
        rows.append({
            "name": name,
            "theta_deg": f"{math.degrees(spec.theta):.6f}",
            "a0": repr(truth.a0),
            "a1": repr(truth.a1),
            "kappa": spec.kappa,
            "seed": spec.seed,
            "potholes": len(spec.potholes),
            "disparity": f"{name}/disparity{ext}",
        })
    _write_manifest(cfg.out, rows)
    print(f"wrote {len(rows)} map(s) to {cfg.out}")
    return 0


def _transform_one(cfg: RunConfig, path: Path):
    dmap, mask = _load(cfg, path)
    model = estimate(dmap, mask)
    tm = transform_map(dmap, mask, model, cfg.delta)
    return dmap, mask, tm


def cmd_transform(cfg: RunConfig) -> int:
    cfg.out.mkdir(parents=True, exist_ok=True)
    rows = []
    for path in cfg.inputs:
        dmap, mask, tm = _transform_one(cfg, path)
        d = cfg.out / path.stem
        d.mkdir(exist_ok=True)
        rio.write_disparity(tm.map, d / "transformed.dspf", "binary-f64-grid")
        report = {"input": str(path), **_model_report(tm, sigma(tm))}
        _write_kv(d / "report.txt", report)
        if cfg.figures:
            from .plotting import plot_transform
            plot_transform(dmap, tm, d / "transform.png", mask)
        rows.append({"name": path.stem, **report})
        print(f"{path}: theta = {report['theta_deg']} deg, a0 = {tm.model.a0:.6f}, "
              f"a1 = {tm.model.a1:.6f}, delta = {tm.delta:.6f}, sigma = {float(report['sigma']):.6f}")
    _write_manifest(cfg.out, rows)
    return 0


def cmd_segment(cfg: RunConfig) -> int:
    cfg.out.mkdir(parents=True, exist_ok=True)
    rows = []
    for path in cfg.inputs:
        dmap, mask, tm = _transform_one(cfg, path)
        seg = clean_mask(segment(tm, cfg.polarity), cfg.min_area)
        d = cfg.out / path.stem
        d.mkdir(exist_ok=True)
        rio.write_disparity(tm.map, d / "transformed.dspf", "binary-f64-grid")
        rio.write_segmentation(seg, d / "overlay.png", mask_path=d / "damage.pgm")
        report = {"input": str(path), **_model_report(tm, sigma(tm)),
                  "threshold": repr(seg.threshold), "n_damaged": seg.n_damaged,
                  "n_undamaged": seg.n_undamaged, "degenerate": seg.degenerate}
        print(f"{path}: threshold = {seg.threshold:.6f}, damaged = {seg.n_damaged}, "
              f"undamaged = {seg.n_undamaged}" + (" (no damage distinguishable)" if seg.degenerate else ""))
        if cfg.truth is not None:
            truth = rio.read_mask(cfg.truth)
            met = pixel_metrics(seg.damage, truth.member, seg.region)
            (d / "metrics.csv").write_text(to_csv([met]))
            (d / "metrics.txt").write_text(to_text([met]))
            report.update({k: v for k, v in asdict(met).items()})
            print(f"precision = {met.precision:.6f}, recall = {met.recall:.6f}, f_score = {met.f_score:.6f}, "
                  f"iou = {met.iou:.6f}, accuracy = {met.accuracy:.6f}")
        _write_kv(d / "report.txt", report)
        if cfg.figures:
            from .plotting import plot_segmentation
            plot_segmentation(tm, seg, d / "segmentation.png")
        rows.append({"name": path.stem, **report})
    _write_manifest(cfg.out, rows)
    return 0


def cmd_evaluate(cfg: RunConfig) -> int:
    cfg.out.mkdir(parents=True, exist_ok=True)
    angles, kappas, errors = sweep_delta_theta(cfg.kappa, cfg.seed)
    with open(cfg.out / "delta_theta_grid.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta_deg"] + [f"kappa={k:g}" for k in kappas])
        for a, row in zip(angles, errors):
            w.writerow([f"{a:.6f}"] + [f"{e:.6f}" for e in row])
    summary = [{"kappa": float(k), "max_delta_theta_deg": float(errors[:, j].max()),
                "mean_delta_theta_deg": float(errors[:, j].mean())} for j, k in enumerate(kappas)]
    (cfg.out / "delta_theta_summary.csv").write_text(to_csv(summary))
    text = to_text(summary)
    (cfg.out / "delta_theta_summary.txt").write_text(text)
    if cfg.figures:
        from .plotting import plot_delta_theta
        plot_delta_theta(angles, kappas, errors, cfg.out / "delta_theta.png")
    print(text, end="")
    return 0


def cmd_bench(cfg: RunConfig) -> int:
    cfg.out.mkdir(parents=True, exist_ok=True)
    if cfg.inputs:
        items = [(p.stem, *_load(cfg, p)) for p in cfg.inputs]
    else:
        items = []
        for i, spec in enumerate(benchmark_suite(cfg.kappa[0], cfg.seed)):
            dmap, mask, _ = generate(spec)
            items.append((f"map_{i:03d}", dmap, mask))
    rows = []
    for name, dmap, mask in items:
        for r in bench(dmap, mask, cfg.repeats):
            rows.append({"map": name, **asdict(r)})
    (cfg.out / "bench.csv").write_text(to_csv(rows))
    summary = []
    for meth in ("closed-form", "gd", "gss"):
        sel = [r for r in rows if r["method"] == meth]
        summary.append({
            "method": meth,
            "sigma_mean": float(np.mean([r["sigma"] for r in sel])),
            "elapsed_ms": 1e3 * float(np.median([r["elapsed"] for r in sel])),
            "solve_us": 1e6 * float(np.median([r["solve_elapsed"] for r in sel])),
            "evaluations": float(np.mean([r["evaluations"] for r in sel])),
        })
    text = to_text(summary)
    (cfg.out / "bench_summary.csv").write_text(to_csv(summary))
    (cfg.out / "bench.txt").write_text(text)
    if cfg.figures:
        from .plotting import plot_bench
        from .evaluation import BenchRow
        plot_bench([BenchRow(s["method"], 0.0, s["sigma_mean"], s["elapsed_ms"] / 1e3,
                             s["solve_us"] / 1e6, int(round(s["evaluations"]))) for s in summary],
                   cfg.out / "bench.png")
    print(text, end="")
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "transform": cmd_transform,
    "segment": cmd_segment,
    "evaluate": cmd_evaluate,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    cfg = parse_config(argv)
    try:
        return COMMANDS[cfg.command](cfg)
    except (RoadSegError, OSError) as exc:
        print(f"roadseg {cfg.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
