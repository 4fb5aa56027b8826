"""Benchmark harness: scenario files, random-configuration generation,
batch depth queries with CSV rows and summary statistics."""

from __future__ import annotations

import argparse
import math
import statistics
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import oracle, pipeline, proximity, seeding
from .bvh import Body
from .mesh import Pose, TriangleMesh, apply_pose, load_obj
from .pipeline import PdQuery
from .seeding import CoherenceCache

SCENARIO_MAGIC = "pdbench"
SCENARIO_VERSION = 1

CSV_BASE_COLUMNS = [
    "frame", "pd_x", "pd_y", "pd_z", "pd_norm", "iterations", "contacts",
    "n_bv", "n_p", "n_g_total", "seed_time_us", "time_us", "seed_strategy_used",
]
CSV_ORACLE_COLUMNS = ["oracle_pd", "rel_error_pct"]


@dataclass
class Scenario:
    """A batch of depth queries: one movable/static mesh pair and a list of
    poses for the movable body (rotation baked per frame, translation is the
    query origin)."""

    mesh_a: str
    mesh_b: str
    frames: list[Pose] = field(default_factory=list)
    strategy: str = "auto"
    epsilon_scale: float = 1.0
    feature_cap: int = 16
    grid: int = 32
    seed: int = 0
    oracle: bool = False
    oracle_directions: int = 1024
    timing: bool = True


def write_scenario(scn: Scenario, path) -> None:
    lines = [f"{SCENARIO_MAGIC} {SCENARIO_VERSION}"]
    lines.append(f"mesh_a {scn.mesh_a}")
    lines.append(f"mesh_b {scn.mesh_b}")
    lines.append(f"strategy {scn.strategy}")
    lines.append(f"epsilon_scale {scn.epsilon_scale!r}")
    lines.append(f"feature_cap {scn.feature_cap}")
    lines.append(f"grid {scn.grid}")
    lines.append(f"seed {scn.seed}")
    lines.append(f"oracle {int(scn.oracle)}")
    lines.append(f"oracle_directions {scn.oracle_directions}")
    lines.append(f"timing {int(scn.timing)}")
    for pose in scn.frames:
        w, x, y, z = _quat_from_matrix(pose.rotation)
        t = pose.translation
        lines.append("frame " + " ".join(repr(v) for v in (w, x, y, z, t[0], t[1], t[2])))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_scenario(path) -> Scenario:
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path}: empty scenario")
    head = lines[0].split()
    if len(head) != 2 or head[0] != SCENARIO_MAGIC or int(head[1]) != SCENARIO_VERSION:
        raise ValueError(f"{path}: bad header {lines[0]!r}")
    scn = Scenario(mesh_a="", mesh_b="")
    for ln in lines[1:]:
        key, _, rest = ln.partition(" ")
        if key == "mesh_a":
            scn.mesh_a = rest.strip()
        elif key == "mesh_b":
            scn.mesh_b = rest.strip()
        elif key == "strategy":
            scn.strategy = rest.strip()
        elif key == "epsilon_scale":
            scn.epsilon_scale = float(rest)
        elif key == "feature_cap":
            scn.feature_cap = int(rest)
        elif key == "grid":
            scn.grid = int(rest)
        elif key == "seed":
            scn.seed = int(rest)
        elif key == "oracle":
            scn.oracle = bool(int(rest))
        elif key == "oracle_directions":
            scn.oracle_directions = int(rest)
        elif key == "timing":
            scn.timing = bool(int(rest))
        elif key == "frame":
            vals = [float(v) for v in rest.split()]
            if len(vals) != 7:
                raise ValueError(f"{path}: frame needs 7 numbers, got {len(vals)}")
            scn.frames.append(Pose.from_quaternion(*vals[:4], translation=vals[4:]))
        else:
            raise ValueError(f"{path}: unknown record {key!r}")
    if not scn.mesh_a or not scn.mesh_b:
        raise ValueError(f"{path}: mesh paths missing")
    if not scn.frames:
        raise ValueError(f"{path}: no frames")
    return scn


def _quat_from_matrix(r: np.ndarray):
    t = float(np.trace(r))
    if t > 0.0:
        s = math.sqrt(t + 1.0) * 2.0
        return (0.25 * s, (r[2, 1] - r[1, 2]) / s,
                (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s)
    i = int(np.argmax(np.diag(r)))
    j, k = (i + 1) % 3, (i + 2) % 3
    s = math.sqrt(max(0.0, 1.0 + r[i, i] - r[j, j] - r[k, k])) * 2.0
    q = [0.0, 0.0, 0.0, 0.0]
    q[0] = (r[k, j] - r[j, k]) / s
    q[1 + i] = 0.25 * s
    q[1 + j] = (r[j, i] + r[i, j]) / s
    q[1 + k] = (r[k, i] + r[i, k]) / s
    return tuple(q)


def _random_rotation(rng: np.random.Generator) -> tuple[float, float, float, float]:
    """Uniform random unit quaternion (wxyz)."""
    u1, u2, u3 = rng.random(3)
    a = math.sqrt(1.0 - u1)
    b = math.sqrt(u1)
    return (b * math.cos(2 * math.pi * u3), a * math.sin(2 * math.pi * u2),
            a * math.cos(2 * math.pi * u2), b * math.sin(2 * math.pi * u3))


def generate_random_scenario(mesh_path, frames: int, rng_seed: int = 0,
                             **scenario_kwargs) -> Scenario:
    """Random penetrating configurations of a mesh against a copy of itself:
    uniform random orientation, translation of half the bounding-box diagonal
    in a uniform random direction; non-penetrating draws are resampled."""
    if frames < 1:
        raise ValueError("need at least one frame")
    mesh = load_obj(mesh_path)
    body_b = Body.build(mesh)
    diag = float(np.linalg.norm(mesh.aabb_max - mesh.aabb_min))
    rng = np.random.default_rng(rng_seed)
    poses: list[Pose] = []
    while len(poses) < frames:
        w, x, y, z = _random_rotation(rng)
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        t = 0.5 * diag * u
        pose = Pose.from_quaternion(w, x, y, z, translation=t)
        rotated = apply_pose(mesh, Pose(pose.rotation, np.zeros(3)))
        body_a = Body.build(rotated)
        if proximity.classify(body_a, t, body_b) is proximity.CollisionStatus.Penetrating:
            poses.append(pose)
    return Scenario(mesh_a=str(mesh_path), mesh_b=str(mesh_path),
                    frames=poses, seed=rng_seed, **scenario_kwargs)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def run(scn: Scenario, csv_path=None, out=sys.stdout):
    """Execute every frame; returns (rows, summary). Writes CSV when asked
    and prints the summary block."""
    mesh_a = load_obj(scn.mesh_a)
    mesh_b = load_obj(scn.mesh_b) if scn.mesh_b != scn.mesh_a else mesh_a
    body_b = Body.build(mesh_b)
    eps = scn.epsilon_scale * proximity.default_epsilon(mesh_a, mesh_b)

    field_ = None
    if scn.strategy in ("auto", "clearance"):
        sidecar = Path(str(scn.mesh_b) + ".clearance.npz")
        field_ = seeding.load_clearance_field(sidecar, mesh_b)
        if field_ is None or field_.resolution != (scn.grid,) * 3:
            field_ = seeding.build_clearance_field(body_b, scn.grid)
            try:
                seeding.save_clearance_field(field_, sidecar)
            except OSError:
                pass  # read-only mesh location: preprocess just isn't cached

    cache = CoherenceCache()
    columns = list(CSV_BASE_COLUMNS)
    if scn.oracle:
        columns += CSV_ORACLE_COLUMNS
    columns.append("error")
    rows: list[dict] = []
    for idx, pose in enumerate(scn.frames):
        row = dict.fromkeys(columns, "")
        row["frame"] = idx
        try:
            rotated = apply_pose(mesh_a, Pose(pose.rotation, np.zeros(3)))
            body_a = Body.build(rotated)
            query = PdQuery(
                body_a=body_a, origin=pose.translation, body_b=body_b,
                cache=cache, clearance=field_, strategy=scn.strategy,
                rng=np.random.default_rng((scn.seed, idx)),
                epsilon=eps, feature_cap=scn.feature_cap)
            res = pipeline.compute_pd(query)
            row.update(
                pd_x=float(res.d[0]), pd_y=float(res.d[1]), pd_z=float(res.d[2]),
                pd_norm=float(res.magnitude), iterations=res.iterations,
                contacts=res.contact_count, n_bv=res.n_bv, n_p=res.n_p,
                n_g_total=res.n_g,
                seed_time_us=float(res.seed_time_us) if scn.timing else 0.0,
                time_us=float(res.time_us) if scn.timing else 0.0,
                seed_strategy_used=res.seed_strategy or "")
            if scn.oracle:
                ref = oracle.sampled_pd(rotated, pose.translation, mesh_b,
                                        directions=scn.oracle_directions)
                err = oracle.relative_error(res.magnitude, ref.magnitude,
                                            rotated, mesh_b)
                row["oracle_pd"] = float(ref.magnitude)
                row["rel_error_pct"] = 100.0 * err
        except Exception as exc:  # keep the batch going, record the failure
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)

    if csv_path is not None:
        with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(row[c]) for c in columns) + "\n")

    summary = summarize(rows)
    _print_summary(summary, out)
    return rows, summary


def summarize(rows) -> dict:
    ok = [r for r in rows if not r.get("error")]
    summary = {"frames": len(rows), "failed": len(rows) - len(ok)}
    # the first frame pays compilation and cache warmup: keep it out of the
    # timing statistics (it stays in every other statistic)
    timed = [r for r in ok if r["frame"] != 0] or ok
    for key, pool in (("time_us", timed), ("seed_time_us", timed),
                      ("contacts", ok), ("iterations", ok)):
        vals = [float(r[key]) for r in pool if r.get(key) != ""]
        if vals:
            summary[f"mean_{key}"] = statistics.fmean(vals)
            summary[f"median_{key}"] = statistics.median(vals)
    errs = [float(r["rel_error_pct"]) for r in ok
            if r.get("rel_error_pct") not in ("", None)]
    if errs:
        summary["mean_rel_error_pct"] = statistics.fmean(errs)
        summary["median_rel_error_pct"] = statistics.median(errs)
    return summary


def _print_summary(summary: dict, out) -> None:
    print("# summary", file=out)
    for k, v in summary.items():
        print(f"{k} {_fmt(v)}", file=out)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pendepth",
        description="Penetration-depth benchmark harness for triangle soups")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario file")
    p_run.add_argument("scenario")
    p_run.add_argument("--csv", default=None, help="write per-frame CSV here")
    p_run.add_argument("--oracle", nargs="?", const=1024, default=None, type=int,
                       metavar="DIRECTIONS",
                       help="compare against the sampling oracle")
    p_run.add_argument("--strategy", choices=seeding.STRATEGIES, default=None)
    p_run.add_argument("--grid", type=int, default=None,
                       help="clearance grid resolution per axis")
    p_run.add_argument("--feature-cap", type=int, default=None)
    p_run.add_argument("--epsilon-scale", type=float, default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--no-timing", action="store_true",
                       help="zero the timing columns for reproducible output")

    p_gen = sub.add_parser("gen-random",
                           help="generate a random penetrating-configuration scenario")
    p_gen.add_argument("mesh")
    p_gen.add_argument("--frames", type=int, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", default=None,
                       help="scenario output path (default <mesh>.scenario)")

    args = parser.parse_args(argv)
    if args.command == "run":
        scn = read_scenario(args.scenario)
        if args.oracle is not None:
            scn.oracle = True
            scn.oracle_directions = args.oracle
        if args.strategy is not None:
            scn.strategy = args.strategy
        if args.grid is not None:
            scn.grid = args.grid
        if args.feature_cap is not None:
            scn.feature_cap = args.feature_cap
        if args.epsilon_scale is not None:
            scn.epsilon_scale = args.epsilon_scale
        if args.seed is not None:
            scn.seed = args.seed
        if args.no_timing:
            scn.timing = False
        run(scn, csv_path=args.csv)
        return 0
    if args.command == "gen-random":
        scn = generate_random_scenario(args.mesh, frames=args.frames,
                                       rng_seed=args.seed)
        out_path = args.out or (str(args.mesh) + ".scenario")
        write_scenario(scn, out_path)
        print(f"wrote {len(scn.frames)} frames to {out_path}")
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
