"""Experiment harness: per-dimension summary statistics and prefix curves.

For each (dimension, trial) a Gaussian-blob cloud is generated, its
zeroth moments computed, and the prefix curve of hull volume and
magnitude recorded for points taken in descending moment order. I90 is
the smallest prefix size whose hull reaches the configured fraction
(default 90%) of the full hull volume.

Every trial is fully determined by (dim, trial seed): rerunning an
identical config reproduces every record bit-exactly.
"""

from __future__ import annotations

import json
import os
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .datagen import DatasetSpec, generate
from .errors import MagnitudeError
from .hull_exact import convex_hull
from .hull_filter import moment_prefix_curve
from .moments import gauss_laguerre_rule, zeroth_moments

FLOAT_FMT = "%.17g"

#: Cooperative per-trial wall-clock budget in seconds.
TRIAL_BUDGET = 120.0


@dataclass(frozen=True)
class ExperimentConfig:
    dims: tuple = (2, 3, 4, 5)
    trials_per_dim: int = 20
    points_per_trial: int = 1000
    dataset: dict = field(
        default_factory=lambda: {"kind": "gaussian-blobs", "params": {}}
    )
    quadrature_order: int = 64
    volume_fraction: float = 0.9
    seeds: tuple = ()
    threads: int = 1

    def __post_init__(self):
        if not 0 < self.volume_fraction < 1:
            raise ValueError("volume_fraction must be in (0, 1)")
        if self.trials_per_dim < 1:
            raise ValueError("trials_per_dim must be >= 1")
        seeds = tuple(self.seeds) or tuple(range(self.trials_per_dim))
        if len(seeds) != self.trials_per_dim:
            raise ValueError("seeds must have one entry per trial")
        object.__setattr__(self, "seeds", seeds)
        object.__setattr__(self, "dims", tuple(self.dims))

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        raw = json.loads(text)
        return cls(
            dims=tuple(raw.get("dims", (2, 3, 4, 5))),
            trials_per_dim=raw.get("trialsPerDim", 20),
            points_per_trial=raw.get("pointsPerTrial", 1000),
            dataset=raw.get("datasetSpec", {"kind": "gaussian-blobs", "params": {}}),
            quadrature_order=raw.get("quadratureOrder", 64),
            volume_fraction=raw.get("volumeFraction", 0.9),
            seeds=tuple(raw.get("seeds", ())),
            threads=raw.get("threads", 1),
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "dims": list(self.dims),
                "trialsPerDim": self.trials_per_dim,
                "pointsPerTrial": self.points_per_trial,
                "datasetSpec": self.dataset,
                "quadratureOrder": self.quadrature_order,
                "volumeFraction": self.volume_fraction,
                "seeds": list(self.seeds),
                "threads": self.threads,
            },
            indent=2,
        )


@dataclass(frozen=True)
class TrialRecord:
    dim: int
    seed: int
    i90: int
    hull_vertex_count: int
    full_volume: float
    prefix_curve: tuple
    wall_time: float


def trial_seed(base: int, dim: int) -> int:
    """Stream-splitting rule: one PCG64 seed per (trial seed, dim) pair."""
    return int(np.random.SeedSequence(entropy=[int(base), int(dim)]).generate_state(1)[0])


def run_trial(config: ExperimentConfig, dim: int, base_seed: int) -> TrialRecord:
    start = time.perf_counter()
    spec = DatasetSpec(
        kind=config.dataset.get("kind", "gaussian-blobs"),
        count=config.points_per_trial,
        dim=dim,
        seed=trial_seed(base_seed, dim),
        params=config.dataset.get("params", {}),
    )
    cloud = generate(spec)
    rule = gauss_laguerre_rule(config.quadrature_order)
    moments = zeroth_moments(
        cloud, rule, threads=config.threads, estimate_error=False
    )
    _check_budget(start)
    curve = moment_prefix_curve(cloud, moments)
    _check_budget(start)
    full_volume = curve[-1][1]
    target = config.volume_fraction * full_volume
    i90 = next(i for i, vol, _ in curve if vol >= target)
    vertex_count = convex_hull(cloud).vertex_count
    return TrialRecord(
        dim=dim,
        seed=base_seed,
        i90=i90,
        hull_vertex_count=vertex_count,
        full_volume=full_volume,
        prefix_curve=tuple(curve),
        wall_time=time.perf_counter() - start,
    )


def _check_budget(start: float):
    if time.perf_counter() - start > TRIAL_BUDGET:
        raise TimeoutError(f"trial exceeded {TRIAL_BUDGET:.0f} s budget")


def run_table1(config: ExperimentConfig, out_dir=None) -> list[tuple]:
    """Summary rows (dim, mean I90, std I90, mean vertices, std vertices).

    Failed trials are excluded from the statistics with a warning; they
    are never silently dropped. Per-trial records go to trials.jsonl when
    an output directory is given.
    """
    records: list[TrialRecord] = []
    failures: list[dict] = []
    for dim in config.dims:
        for base_seed in config.seeds:
            try:
                records.append(run_trial(config, dim, base_seed))
            except (MagnitudeError, TimeoutError) as exc:
                warnings.warn(f"trial dim={dim} seed={base_seed} failed: {exc}")
                failures.append({"dim": dim, "seed": base_seed, "error": str(exc)})
    records.sort(key=lambda r: (r.dim, r.seed))
    rows = []
    for dim in config.dims:
        sub = [r for r in records if r.dim == dim]
        if not sub:
            continue
        i90 = np.array([r.i90 for r in sub], dtype=float)
        verts = np.array([r.hull_vertex_count for r in sub], dtype=float)
        rows.append(
            (
                dim,
                float(i90.mean()),
                float(i90.std(ddof=1)) if len(sub) > 1 else 0.0,
                float(verts.mean()),
                float(verts.std(ddof=1)) if len(sub) > 1 else 0.0,
            )
        )
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        _atomic_write(
            os.path.join(out_dir, "summary.csv"), _summary_csv(rows)
        )
        lines = []
        for r in records:
            lines.append(
                json.dumps(
                    {
                        "dim": r.dim,
                        "seed": r.seed,
                        "I90": r.i90,
                        "hullVertexCount": r.hull_vertex_count,
                        "fullVolume": r.full_volume,
                        "wallTime": r.wall_time,
                    }
                )
            )
        for f in failures:
            lines.append(json.dumps({"failure": f}))
        _atomic_write(os.path.join(out_dir, "trials.jsonl"), "\n".join(lines) + "\n")
    return rows


def _summary_csv(rows) -> str:
    out = ["dim,mean_i90,std_i90,mean_vertices,std_vertices"]
    for dim, mi, si, mv, sv in rows:
        out.append(
            f"{dim}," + ",".join(FLOAT_FMT % v for v in (mi, si, mv, sv))
        )
    return "\n".join(out) + "\n"


def run_prefix_curves(config: ExperimentConfig, out_dir) -> list[str]:
    """Per-trial prefix-curve CSVs and SVG plots with the 90% marker.

    Returns the list of written file paths.
    """
    curves_dir = os.path.join(out_dir, "curves")
    os.makedirs(curves_dir, exist_ok=True)
    written = []
    for dim in config.dims:
        for base_seed in config.seeds:
            record = run_trial(config, dim, base_seed)
            stem = f"dim{dim}_seed{base_seed}"
            csv_path = os.path.join(curves_dir, stem + ".csv")
            lines = ["i,vol,mag"]
            for i, vol, mag in record.prefix_curve:
                lines.append(f"{i},{FLOAT_FMT % vol},{FLOAT_FMT % mag}")
            _atomic_write(csv_path, "\n".join(lines) + "\n")
            svg_path = os.path.join(curves_dir, stem + ".svg")
            _atomic_write(
                svg_path,
                _curve_svg(record.prefix_curve, config.volume_fraction),
            )
            written.extend([csv_path, svg_path])
    return written


def _curve_svg(curve, fraction, width=640, height=400, margin=40) -> str:
    """Hand-emitted SVG: volume and magnitude polylines, a horizontal rule
    where the volume reaches the target fraction, and axis ticks."""
    n = curve[-1][0]
    full_vol = curve[-1][1] or 1.0
    full_mag = curve[-1][2] or 1.0

    def x(i):
        return margin + (width - 2 * margin) * (i - 1) / max(n - 1, 1)

    def y(frac):
        return height - margin - (height - 2 * margin) * frac

    vol_pts = " ".join(f"{x(i):.2f},{y(v / full_vol):.2f}" for i, v, _ in curve)
    mag_pts = " ".join(f"{x(i):.2f},{y(m / full_mag):.2f}" for i, _, m in curve)
    rule_y = y(fraction)
    ticks = []
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        ticks.append(
            f'<line x1="{margin - 4}" y1="{y(frac):.2f}" x2="{margin}" '
            f'y2="{y(frac):.2f}" stroke="black"/>'
            f'<text x="4" y="{y(frac) + 4:.2f}" font-size="10">{frac:.2f}</text>'
        )
    for i in np.linspace(1, n, 5).astype(int):
        ticks.append(
            f'<line x1="{x(i):.2f}" y1="{height - margin}" x2="{x(i):.2f}" '
            f'y2="{height - margin + 4}" stroke="black"/>'
            f'<text x="{x(i) - 8:.2f}" y="{height - margin + 16}" font-size="10">{i}</text>'
        )
    return f"""<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">
<rect width="{width}" height="{height}" fill="white"/>
<polyline points="{vol_pts}" fill="none" stroke="blue" stroke-width="1.5"/>
<polyline points="{mag_pts}" fill="none" stroke="orange" stroke-width="1.5"/>
<line x1="{margin}" y1="{rule_y:.2f}" x2="{width - margin}" y2="{rule_y:.2f}" stroke="black" stroke-dasharray="4 3"/>
<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>
<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>
{''.join(ticks)}
</svg>
"""


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)
