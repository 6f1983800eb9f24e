"""Command-line entry point: ``affine-ifs {analyze,chaos,measure,fibre,verify}``.

Exit status: 0 on success, 1 when a check fails or an orbit diverges,
2 on usage or parse errors.
"""

import argparse
import json
import sys

from . import catalog
from .affine import spectral_norms
from .config import load_config
from .errors import (
    AddressParseError,
    DivergedOrbit,
    GridMismatch,
    IfsError,
    MissingProbabilities,
    NoThreshold,
    NotInvariant,
    ParseError,
    SizeLimit,
)
from .fibres import (
    COLLINEARITY_TOL,
    POINT_TOL,
    classify_fibre,
    fibre_sequence,
    fibre_table,
    parse_address,
)
from .geometry import box
from .ifs import average_contractivity, critical_probability, find_contractive_word, min_average_contractive_k
from .measures import (
    escape_free_bounds,
    iterate_to_invariance,
    point_mass,
    total_variation,
    uniform_on_bounds,
    uniform_on_polygon,
    write_mass_csv,
    write_pgm,
)
from .sets import OrbitConfig, chaos_game, write_csv
from .verify import verify_all

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _point(text: str):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}") from None
    return x, y


def _bounds(text: str):
    try:
        b = tuple(float(v) for v in text.split(","))
    except ValueError:
        b = ()
    if len(b) != 4 or not (b[0] < b[1] and b[2] < b[3]):
        raise argparse.ArgumentTypeError(f"expected 'xmin,xmax,ymin,ymax', got {text!r}")
    return b


def _emit(text: str, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


# -- analyze -----------------------------------------------------------------


def analyze(cfg, max_k: int) -> dict:
    s = cfg.system
    note = None
    if s.probs is None:
        s = s.uniform()
        note = "no probabilities in config; uniform weights assumed"
    out = {"maps": s.n_maps, "lipschitz": spectral_norms(s.linears).tolist()}
    if note:
        out["note"] = note
    out["average_contractivity"] = {str(k): average_contractivity(s, k) for k in range(1, max_k + 1)}
    out["min_contractive_k"] = min_average_contractive_k(s, max_k)
    found = find_contractive_word(s, max_k)
    out["contractive_word"] = None if found is None else {"word": list(found[0]), "lipschitz": found[1]}
    if s.n_maps == 2:
        crit = {}
        for k in range(1, max_k + 1):
            try:
                crit[str(k)] = critical_probability(s, k)
            except NoThreshold as exc:
                crit[str(k)] = None
                crit.setdefault("notes", {})[str(k)] = str(exc)
        out["critical_p1"] = crit
        k0 = out["min_contractive_k"]
        out["threshold"] = crit.get(str(k0)) if k0 is not None else None
    return out


def _analyze_text(r: dict) -> str:
    lines = [f"maps: {r['maps']}"]
    if "note" in r:
        lines.append(f"note: {r['note']}")
    for i, lip in enumerate(r["lipschitz"], start=1):
        lines.append(f"Lip(f_{i}) = {lip:.12g}")
    for k, v in r["average_contractivity"].items():
        lines.append(f"average contractivity, iterate {k}: {v:.12g}")
    k0 = r["min_contractive_k"]
    lines.append(f"min average-contractive k: {k0 if k0 is not None else 'none found up to max k'}")
    w = r["contractive_word"]
    lines.append("contractive word: " + ("none found" if w is None else f"{''.join(map(str, w['word']))} (Lip {w['lipschitz']:.12g})"))
    if "critical_p1" in r:
        for k, v in r["critical_p1"].items():
            if k == "notes":
                continue
            lines.append(f"critical p1, iterate {k}: " + ("no threshold" if v is None else f"{v:.10f}"))
    return "\n".join(lines)


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    r = analyze(cfg, args.max_k)
    _emit(json.dumps(r, indent=2) if args.json else _analyze_text(r), args.out)
    return EXIT_OK


# -- chaos -------------------------------------------------------------------


def cmd_chaos(args) -> int:
    cfg = load_config(args.config)
    s = cfg.system if cfg.system.probs is not None else cfg.system.uniform()
    start = args.start
    if start is None:
        start = tuple(cfg.hint.centroid) if cfg.hint is not None else (0.0, 0.0)
    orbit = OrbitConfig(burn_in=args.burn_in, samples=args.n, rng_seed=args.seed, chunk_count=args.chunks)
    cloud = chaos_game(s, start, orbit, resolution=args.resolution)
    write_csv(cloud, args.out)
    print(f"wrote {len(cloud)} points to {args.out}", file=sys.stderr)
    return EXIT_OK


# -- measure -----------------------------------------------------------------


def cmd_measure(args) -> int:
    cfg = load_config(args.config)
    s = cfg.system
    if s.probs is None:
        raise MissingProbabilities("measure needs a probability for every map")
    if args.bounds is not None:
        bounds = args.bounds
    elif cfg.bounds is not None:
        bounds = cfg.bounds
    else:
        bounds = escape_free_bounds(s, cfg.hint if cfg.hint is not None else box(*catalog.DEFAULT_BOUNDS))
    m = args.grid
    if args.start is not None:
        mu0, init = point_mass(bounds, m, args.start), f"point mass at {args.start}"
    elif cfg.hint is not None:
        mu0, init = uniform_on_polygon(cfg.hint, bounds, m), "uniform on invariant_hint"
    else:
        mu0, init = uniform_on_bounds(bounds, m), "uniform on bounds"
    mu, rep = iterate_to_invariance(s, mu0, tol=args.tol, max_iters=args.iters)
    log = {"bounds": list(bounds), "grid": m, "initial": init, "escaped": mu.escaped, **rep.to_dict()}
    if cfg.hint is not None:
        log["tv_to_uniform_on_hint"] = total_variation(mu, uniform_on_polygon(cfg.hint, bounds, m))
    if args.probe is not None:
        log["probe"] = {"point": list(args.probe), "radius": args.radius, "mass": mu.mass_within(args.probe, args.radius)}
    write_pgm(mu, f"{args.out}.pgm")
    write_mass_csv(mu, f"{args.out}.csv")
    with open(f"{args.out}.log.json", "w") as fh:
        json.dump(log, fh, indent=2)
        fh.write("\n")
    summary = {k: v for k, v in log.items() if k != "residuals"}
    print(json.dumps(summary, indent=2))
    return EXIT_OK


# -- fibre -------------------------------------------------------------------


def cmd_fibre(args) -> int:
    cfg = load_config(args.config)
    if cfg.hint is None:
        raise UsageError("fibre needs an invariant_hint polygon in the config")
    addr = parse_address(args.address)
    seq = fibre_sequence(cfg.system, cfg.hint, addr, args.depth)
    cls = classify_fibre(seq, args.point_tol, args.collinearity_tol)
    report = {
        "address": str(addr),
        "depth": len(seq),
        "class": cls.to_dict(),
        "final_vertices": seq[-1].polygon.vertices.tolist(),
        "table": fibre_table(seq),
    }
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    lines = [f"address {addr}, depth {len(seq)}: {cls.kind}"]
    if cls.kind == "point":
        lines.append(f"point {cls.location}")
    elif cls.kind == "segment":
        lines.append(f"segment {cls.endpoints[0]} -- {cls.endpoints[1]}")
    last = seq[-1]
    lines.append(f"final area {last.area:.6e}, diameter {last.diameter:.6e}")
    print("\n".join(lines))
    return EXIT_OK


# -- verify ------------------------------------------------------------------


def cmd_verify(args) -> int:
    report = verify_all(args.scale)
    _emit(report.to_json() if args.json else report.to_text(), args.out)
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="affine-ifs", description="Analyse non-contractive affine iterated function systems.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="Lipschitz constants, average contractivity, thresholds")
    p.add_argument("config")
    p.add_argument("--max-k", type=int, default=3)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("chaos", help="chaos-game point cloud to CSV")
    p.add_argument("config")
    p.add_argument("--start", type=_point)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--burn-in", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--chunks", type=int, default=1)
    p.add_argument("--resolution", type=float, default=0.0, help="dedup lattice spacing (0 = exact duplicates only)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_chaos)

    p = sub.add_parser("measure", help="iterate the Markov operator on a grid")
    p.add_argument("config")
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--bounds", type=_bounds)
    p.add_argument("--start", type=_point, help="start from a point mass instead of a uniform measure")
    p.add_argument("--probe", type=_point, help="report the mass near this point")
    p.add_argument("--radius", type=float, default=0.05)
    p.add_argument("--out", required=True, help="output prefix for .pgm, .csv and .log.json")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("fibre", help="nested fibre approximations for one address")
    p.add_argument("config")
    p.add_argument("--address", required=True, help="digits, e.g. '1222' or 'prefix:tail'")
    p.add_argument("--depth", type=int, default=40)
    p.add_argument("--point-tol", type=float, default=POINT_TOL)
    p.add_argument("--collinearity-tol", type=float, default=COLLINEARITY_TOL)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fibre)

    p = sub.add_parser("verify", help="run the regression suite")
    p.add_argument("--scale", choices=("quick", "full"), default="quick")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DivergedOrbit as exc:
        print(f"error: diverged orbit: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ParseError, NotInvariant, AddressParseError, SizeLimit, MissingProbabilities, GridMismatch, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IfsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
