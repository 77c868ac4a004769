"""Command-line entry point: ``phtkan {sample,extend,distance,verify,net}``.

Exit codes: 0 success, 1 a bound or coherence check failed, 2 usage or
configuration error, 3 corrupt diagram data.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import re
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .barcodes import Barcode, bottleneck, decompose
from .bounds import (check_directionwise, check_global, check_lipschitz, reports_to_csv, reports_to_json,
                     BoundReport)
from .geometry import Coords, DirectionSet, SphereMetric, angle_direction, generate_net, hausdorff_to_sphere
from .homology import direction_barcode
from .kan import FLAVORS, CorruptDiagram, VectDiagram, atomic_write_text, check_coherence, \
    default_query_grid, extend_module, sample_pht
from .meshio import load_mesh
from .spacetime import SampleGrid

OK, CHECK_FAILED, USAGE, CORRUPT = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    mesh: str | None = None
    coords: str = "theta"
    metric: str | None = None
    field: int = 2
    directions: str = "6"
    grid: str = "7"
    degree: str = "0"
    flavor: str = "left"
    query: str | None = None
    query_grid: str | None = None
    tests: int = 360
    out: str = "out"
    seed: int = 0
    workers: int = dataclasses.field(default_factory=lambda: os.cpu_count() or 1)

    @property
    def coord_system(self) -> Coords:
        try:
            return Coords(self.coords)
        except ValueError:
            raise UsageError(f"unknown coordinate system {self.coords!r}") from None

    @property
    def sphere_metric(self) -> SphereMetric:
        coords = self.coord_system
        if self.metric is None:
            return coords.metric
        try:
            m = SphereMetric(self.metric)
        except ValueError:
            raise UsageError(f"unknown metric {self.metric!r}") from None
        if m is not coords.metric:
            raise UsageError(f"config invariant: {coords.value} coordinates require the "
                             f"{coords.metric.value} metric, got {m.value}")
        return m

    @property
    def degrees(self) -> list:
        return [int(x) for x in _split(self.degree)]

    @property
    def flavors(self) -> list:
        out = _split(self.flavor)
        for f in out:
            if f not in FLAVORS + ("true",):
                raise UsageError(f"unknown flavor {f!r}")
        return out


def _split(s) -> list:
    return [x.strip() for x in str(s).split(",") if x.strip()]


_PI = re.compile(r"^([+-]?)(\d*\.?\d*)\*?pi(?:/(\d*\.?\d+))?$")


def parse_number(s: str) -> float:
    """Floats, or multiples of pi such as ``-5pi/6``, ``pi/2`` or ``-2*pi/3``."""
    s = s.strip().replace(" ", "")
    try:
        return float(s)
    except ValueError:
        pass
    m = _PI.match(s)
    if not m:
        raise UsageError(f"cannot parse number {s!r}")
    sign = -1.0 if m.group(1) == "-" else 1.0
    coef = float(m.group(2)) if m.group(2) else 1.0
    den = float(m.group(3)) if m.group(3) else 1.0
    return sign * coef * math.pi / den


def parse_grid(spec: str, coords: Coords) -> np.ndarray:
    """A point count (uniform grid over X) or explicit comma-separated values;
    sup X is always appended."""
    spec = str(spec).strip()
    if re.fullmatch(r"\d+", spec):
        count = int(spec)
        if count < 1:
            raise UsageError("grid needs at least one point")
        vals = np.linspace(coords.inf, coords.sup, count) if count > 1 else np.array([coords.sup])
    else:
        vals = np.array([parse_number(x) for x in _split(spec)])
    if not coords.contains(vals):
        raise UsageError("grid values leave the parameter interval")
    vals = np.unique(np.append(vals, coords.sup))
    keep = np.concatenate([[True], np.diff(vals) > 1e-9])
    vals = vals[keep]
    vals[-1] = coords.sup
    return vals


def parse_directions(spec: str, dim: int, metric: SphereMetric) -> DirectionSet:
    """A count (uniform net), ``angles:a,b,...`` for planar angles, or explicit
    vectors separated by ``;`` with comma-separated coordinates."""
    spec = str(spec).strip()
    try:
        if re.fullmatch(r"\d+", spec):
            return generate_net(int(spec), dim, metric)
        if spec.startswith("angles:"):
            vecs = [angle_direction(parse_number(a)) for a in _split(spec[7:])]
        else:
            vecs = [[parse_number(x) for x in _split(v)] for v in spec.split(";") if v.strip()]
        vecs = np.asarray(vecs, float)
        if vecs.ndim != 2 or vecs.shape[1] != dim:
            raise UsageError(f"directions must have {dim} coordinates")
        norms = np.linalg.norm(vecs, axis=1)
        if np.any(np.abs(norms - 1) > 1e-12):
            print("warning: direction(s) not unit length; normalizing", file=sys.stderr)
        return DirectionSet(vecs, metric)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def read_config(path) -> dict:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {n}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def build_config(args) -> RunConfig:
    names = {f.name: f for f in fields(RunConfig)}
    values = read_config(args.config) if getattr(args, "config", None) else {}
    unknown = set(values) - set(names)
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for name in names:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    cfg = RunConfig()
    for name, val in values.items():
        kind = type(getattr(cfg, name))
        try:
            setattr(cfg, name, int(val) if kind is int else val)
        except ValueError:
            raise UsageError(f"bad value for {name}: {val!r}") from None
    cfg.sphere_metric  # validates the coordinate/metric pairing early
    return cfg


def _mesh(cfg: RunConfig):
    if not cfg.mesh:
        raise UsageError("a mesh is required (--mesh)")
    try:
        return load_mesh(cfg.mesh)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _sample_grid(cfg: RunConfig, k) -> SampleGrid:
    coords = cfg.coord_system
    dirs = parse_directions(cfg.directions, k.ambient_dim, cfg.sphere_metric)
    try:
        return SampleGrid(dirs, parse_grid(cfg.grid, coords), coords)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _write_json(path: Path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=1, sort_keys=True) + "\n")


def cmd_sample(cfg: RunConfig) -> int:
    k = _mesh(cfg)
    g = _sample_grid(cfg, k)
    out = Path(cfg.out)
    for n in cfg.degrees:
        d = sample_pht(k, g, n, cfg.field)
        d.meta.update(seed=cfg.seed, mesh=str(Path(cfg.mesh).resolve()))
        js, _ = d.save(out, f"diagram_n{n}")
        print(f"wrote {js} (dims {d.dims.min()}..{d.dims.max()})")
    return OK


def _diagrams(cfg: RunConfig, explicit) -> list:
    paths = [Path(p) for p in explicit] if explicit else sorted(Path(cfg.out).glob("diagram_n*.json"))
    if not paths:
        raise UsageError("no diagram manifests found")
    return [VectDiagram.load(p) for p in paths]


def _queries(cfg: RunConfig, d: VectDiagram) -> DirectionSet:
    spec = cfg.query or ("angles:pi/2" if d.grid.directions.dim == 2 else "0,0,1")
    return parse_directions(spec, d.grid.directions.dim, d.grid.metric)


def _query_grid(cfg: RunConfig, d: VectDiagram) -> np.ndarray:
    if cfg.query_grid:
        return parse_grid(cfg.query_grid, d.grid.coords)
    return default_query_grid(d.grid.params)


def _write_barcode(out: Path, stem: str, bc: Barcode) -> None:
    _write_json(out / f"{stem}.json", bc.to_json())
    atomic_write_text(out / f"{stem}.csv", bc.to_csv())


def cmd_extend(cfg: RunConfig, diagrams=None) -> int:
    flavors = cfg.flavors
    if not flavors:
        return OK
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for d in _diagrams(cfg, diagrams):
        queries = _queries(cfg, d)
        qgrid = _query_grid(cfg, d)
        mesh = None
        if "true" in flavors:
            mesh = _mesh(RunConfig(mesh=cfg.mesh or d.meta.get("mesh")))
        for qi, w in enumerate(queries):
            for fl in flavors:
                if fl == "true":
                    bc = direction_barcode(mesh, w, d.degree, qgrid, d.grid.coords, d.p)
                else:
                    bc = decompose(extend_module(w, qgrid, d, fl))
                stem = f"barcode_q{qi}_n{d.degree}_{fl}"
                _write_barcode(out, stem, bc)
                print(f"{stem}: {len(bc)} bars")
    return OK


def _load_barcode(path) -> Barcode:
    try:
        return Barcode.from_json(json.loads(Path(path).read_text()))
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot read barcode {path}: {exc}") from exc


def cmd_distance(a, b, capped: bool = True) -> int:
    ba, bb = _load_barcode(a), _load_barcode(b)
    if ba.coords is not bb.coords:
        raise UsageError("barcodes use different coordinate systems")
    dist = bottleneck(ba, bb, capped=capped)
    print("inf" if math.isinf(dist) else f"{dist:.9f}")
    return OK


def cmd_verify(cfg: RunConfig, corrupt: bool = False) -> int:
    k = _mesh(cfg)
    g = _sample_grid(cfg, k)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    flavors = [f for f in cfg.flavors if f != "true"] or ["left"]
    for n in cfg.degrees:
        d = sample_pht(k, g, n, cfg.field).fill()
        if corrupt:
            key = next(key for key in sorted(d.chain) if d.chain[key].size)
            d.corrupt("chain", key, d.chain[key] + 1)
        bad = check_coherence(d)
        reports.append(BoundReport("coherence", float(len(bad)), 0.0, 0.0,
                                   {"degree": n, "violations": [list(map(list, t)) for t in bad[:20]]}))
        if bad:
            continue
        qgrid = _query_grid(cfg, d)
        for fl in flavors:
            for w in _queries(cfg, d):
                reports.append(check_directionwise(k, g, w, n, fl, qgrid, diagram=d, p=cfg.field))
            if cfg.tests > 0:
                tests = generate_net(cfg.tests, k.ambient_dim, g.metric, offset=_offset(cfg.seed, cfg.tests))
                reports.append(check_global(k, g, n, tests, fl, qgrid, workers=cfg.workers,
                                            diagram=d, p=cfg.field))
        reports.append(check_lipschitz(d))
    for r in reports:
        r.context["seed"] = cfg.seed
    atomic_write_text(out / "reports.json", reports_to_json(reports) + "\n")
    atomic_write_text(out / "reports.csv", reports_to_csv(reports))
    failed = [r for r in reports if not r.passed]
    for r in reports:
        print(r)
    if failed:
        print(f"{len(failed)} check(s) failed", file=sys.stderr)
        for r in failed:
            print(json.dumps(r.to_json(), default=float), file=sys.stderr)
        return CHECK_FAILED
    return OK


def _offset(seed: int, count: int) -> float:
    """Rotation of the test net off the sample lattice, drawn from the seed."""
    rng = np.random.default_rng(seed)
    return float((math.sqrt(2) / 2 + rng.uniform(0, 0.1)) * 2 * math.pi / count)


def cmd_net(cfg: RunConfig, dim: int, path=None) -> int:
    net = parse_directions(cfg.directions, dim, cfg.sphere_metric)
    haus = hausdorff_to_sphere(net)
    obj = {"metric": net.metric.value, "directions": net.vectors.tolist(),
           "hausdorff": haus.value, "exact": haus.exact, "samples": haus.samples}
    text = json.dumps(obj, indent=1, sort_keys=True)
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        atomic_write_text(Path(path), text + "\n")
    print(text)
    return OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--mesh")
    p.add_argument("--coords", choices=["theta", "euclidean"])
    p.add_argument("--metric", choices=["geodesic", "euclidean"])
    p.add_argument("--directions", help="count, 'angles:a,b,..' or 'x,y;x,y;..'")
    p.add_argument("--grid", help="point count or comma-separated values (pi allowed)")
    p.add_argument("--degree", help="comma-separated homology degrees")
    p.add_argument("--flavor", help="comma-separated: left,right,center,true")
    p.add_argument("--query", help="query directions, same syntax as --directions")
    p.add_argument("--query-grid", dest="query_grid")
    p.add_argument("--tests", type=int, help="number of test directions for global checks")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--field", type=int, help="prime field characteristic")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phtkan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("sample", help="sample the transform and save the diagram"))
    ext = sub.add_parser("extend", help="Kan-extend saved diagrams at query directions")
    _common(ext)
    ext.add_argument("--diagram", action="append", help="diagram manifest (repeatable)")
    dist = sub.add_parser("distance", help="bottleneck distance between two barcode files")
    dist.add_argument("a")
    dist.add_argument("b")
    dist.add_argument("--uncapped", action="store_true", help="treat cap bars as finite bars")
    ver = sub.add_parser("verify", help="run the bound checks")
    _common(ver)
    ver.add_argument("--corrupt-arrow", action="store_true", help=argparse.SUPPRESS)
    net = sub.add_parser("net", help="generate a direction net and its covering radius")
    _common(net)
    net.add_argument("--dim", type=int, default=2)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "distance":
            return cmd_distance(args.a, args.b, capped=not args.uncapped)
        cfg = build_config(args)
        if args.command == "sample":
            return cmd_sample(cfg)
        if args.command == "extend":
            return cmd_extend(cfg, args.diagram)
        if args.command == "verify":
            return cmd_verify(cfg, corrupt=args.corrupt_arrow)
        return cmd_net(cfg, args.dim, args.out)
    except CorruptDiagram as exc:
        print(f"error: corrupt diagram: {exc}", file=sys.stderr)
        return CORRUPT
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
