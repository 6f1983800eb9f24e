"""JSON configuration files describing a probabilistic IFS.

Schema::

    {
      "maps": [{"A": [[a11, a12], [a21, a22]], "b": [b1, b2], "p": 0.5}, ...],
      "invariant_hint": [[x, y], ...],          # optional convex polygon
      "bounds": [xmin, xmax, ymin, ymax]        # optional grid box
    }

Either every map has ``p`` or none does.
"""

import json
import math
from dataclasses import dataclass
from numbers import Real
from typing import Optional, Tuple

import numpy as np

from .errors import NotInvariant, ParseError
from .fibres import check_invariant_polygon
from .geometry import ConvexPolygon
from .ifs import PROB_SUM_TOL, IfsSystem

PROB_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class IfsConfig:
    system: IfsSystem
    hint: Optional[ConvexPolygon] = None
    bounds: Optional[Tuple[float, float, float, float]] = None


def _number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, Real):
        raise ParseError(f"{where}: expected a number, got {json.dumps(v)}")
    x = float(v)
    if not math.isfinite(x):
        raise ParseError(f"{where}: must be finite")
    return x


def _vector(v, n: int, where: str):
    if not isinstance(v, list) or len(v) != n:
        raise ParseError(f"{where}: expected a list of {n} numbers")
    return [_number(x, f"{where}[{i}]") for i, x in enumerate(v)]


def parse_config(obj) -> IfsConfig:
    if not isinstance(obj, dict):
        raise ParseError("top level: expected an object")
    unknown = set(obj) - {"maps", "invariant_hint", "bounds"}
    if unknown:
        raise ParseError(f"top level: unknown field(s) {sorted(unknown)}")
    maps = obj.get("maps")
    if not isinstance(maps, list) or not maps:
        raise ParseError("maps: expected a nonempty list")
    linears, offsets, probs = [], [], []
    for k, entry in enumerate(maps):
        where = f"maps[{k}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: expected an object with A, b and optional p")
        extra = set(entry) - {"A", "b", "p"}
        if extra:
            raise ParseError(f"{where}: unknown field(s) {sorted(extra)}")
        if "A" not in entry:
            raise ParseError(f"{where}.A: missing")
        if "b" not in entry:
            raise ParseError(f"{where}.b: missing")
        a = entry["A"]
        if not isinstance(a, list) or len(a) != 2:
            raise ParseError(f"{where}.A: expected a 2x2 row-major array")
        linears.append([_vector(row, 2, f"{where}.A[{i}]") for i, row in enumerate(a)])
        offsets.append(_vector(entry["b"], 2, f"{where}.b"))
        if "p" in entry:
            p = _number(entry["p"], f"{where}.p")
            if p < 0:
                raise ParseError(f"{where}.p: must be >= 0")
            probs.append(p)
    if probs and len(probs) != len(maps):
        raise ParseError("maps[].p: give a probability for every map or for none")
    p_arr = None
    if probs:
        total = math.fsum(probs)
        if abs(total - 1.0) > PROB_TOL:
            raise ParseError(f"maps[].p: probabilities sum to {total!r}, expected 1")
        p_arr = np.array(probs)
        if abs(total - 1.0) > PROB_SUM_TOL:
            # within the file tolerance but not the system's; renormalise
            p_arr = p_arr / total
    system = IfsSystem(linears, offsets, p_arr)

    hint = None
    if obj.get("invariant_hint") is not None:
        raw = obj["invariant_hint"]
        if not isinstance(raw, list) or len(raw) < 3:
            raise ParseError("invariant_hint: expected a list of at least 3 [x, y] vertices")
        verts = [_vector(v, 2, f"invariant_hint[{i}]") for i, v in enumerate(raw)]
        try:
            hint = ConvexPolygon(verts)
        except Exception as exc:
            raise ParseError(f"invariant_hint: {exc}") from None
        if not check_invariant_polygon(system, hint):
            raise NotInvariant("invariant_hint: some map sends the polygon outside itself")

    bounds = None
    if obj.get("bounds") is not None:
        b = _vector(obj["bounds"], 4, "bounds")
        if not (b[0] < b[1] and b[2] < b[3]):
            raise ParseError("bounds: need xmin < xmax and ymin < ymax")
        bounds = tuple(b)
    return IfsConfig(system, hint, bounds)


def load_config(path) -> IfsConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    return loads_config(text, str(path))


def loads_config(text: str, name: str = "<config>") -> IfsConfig:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{name}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(obj)


def _num(x: float) -> str:
    return format(float(x), ".17g")


def dumps_config(cfg: IfsConfig) -> str:
    """Serialise with 17 significant digits so values re-parse bit-for-bit."""
    s = cfg.system
    lines = ["{", '  "maps": [']
    rows = []
    for i in range(s.n_maps):
        a = s.linears[i]
        parts = [
            f'"A": [[{_num(a[0, 0])}, {_num(a[0, 1])}], [{_num(a[1, 0])}, {_num(a[1, 1])}]]',
            f'"b": [{_num(s.offsets[i, 0])}, {_num(s.offsets[i, 1])}]',
        ]
        if s.probs is not None:
            parts.append(f'"p": {_num(s.probs[i])}')
        rows.append("    {" + ", ".join(parts) + "}")
    lines.append(",\n".join(rows))
    tail = ["  ]"]
    if cfg.hint is not None:
        verts = ", ".join(f"[{_num(x)}, {_num(y)}]" for x, y in cfg.hint.vertices)
        tail.append(f'  "invariant_hint": [{verts}]')
    if cfg.bounds is not None:
        tail.append('  "bounds": [' + ", ".join(_num(v) for v in cfg.bounds) + "]")
    lines.append(",\n".join(tail))
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_config(cfg: IfsConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_config(cfg))
