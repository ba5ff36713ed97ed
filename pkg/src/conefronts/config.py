"""INI-style scenario configuration.

Sections and keys (defaults in brackets)::

    [model]     model = sandpile_1 | sandpile_2 | molding
    [geometry]  shape = disk | rounded_square | ellipse | two_disks   [disk]
                radius [1.0]  side [2.0]  fillet [0.1]  a [1.0]  b [0.6]
                r1 [1.0]  r2 [1.0]  separation [1.6]
    [time]      t_start [1.0]  t_end [2.0]
    [numerics]  n_markers [256]  cfl [0.25]  dt_max [none]
    [verify]    identities [auto]  n_test_functions [6]  n_lipschitz [100]
                n_states [10]  seed [0]
    [output]    dir [out]  stride [1]  frame_stride [1]  stroke_width [1.0]
"""

from __future__ import annotations

import configparser
import math
import dataclasses
import re
from dataclasses import dataclass, field

from . import shapes
from .errors import ConeFrontsError, ConfigError
from .evolution import Model, Scenario

SHAPES = ("disk", "rounded_square", "ellipse", "two_disks")
# marker spacings per quarter-circle fillet below which the velocity jump at the
# fillet/edge junction folds the front (sandpile fails below about 3.5)
MIN_FILLET_MARKERS = {True: 4.0, False: 2.0}
IDENTITIES = ("mass_balance", "subdifferential_gap", "molding_balance", "spacetime", "expansion")

# section -> key -> (type, default)
SCHEMA: dict[str, dict[str, tuple[type, object]]] = {
    "model": {"model": (str, None)},
    "geometry": {
        "shape": (str, "disk"),
        "radius": (float, 1.0),
        "side": (float, 2.0),
        "fillet": (float, 0.1),
        "a": (float, 1.0),
        "b": (float, 0.6),
        "r1": (float, 1.0),
        "r2": (float, 1.0),
        "separation": (float, 1.6),
    },
    "time": {"t_start": (float, 1.0), "t_end": (float, 2.0)},
    "numerics": {"n_markers": (int, 256), "cfl": (float, 0.25), "dt_max": (float, None)},
    "verify": {
        "identities": (str, "auto"),
        "n_test_functions": (int, 6),
        "n_lipschitz": (int, 100),
        "n_states": (int, 10),
        "seed": (int, 0),
    },
    "output": {
        "dir": (str, "out"),
        "stride": (int, 1),
        "frame_stride": (int, 1),
        "stroke_width": (float, 1.0),
    },
}


@dataclass
class VerifyOptions:
    identities: tuple[str, ...] = ("auto",)
    n_test_functions: int = 6
    n_lipschitz: int = 100
    n_states: int = 10
    seed: int = 0

    def resolved(self, model: Model) -> tuple[str, ...]:
        if self.identities != ("auto",):
            return self.identities
        if model is Model.SANDPILE_1:
            return ("mass_balance", "subdifferential_gap")
        if model is Model.SANDPILE_2:
            return ("expansion",)
        return ("molding_balance", "spacetime")


@dataclass
class PlotOptions:
    frame_stride: int = 1
    stroke_width: float = 1.0


@dataclass
class Config:
    model: Model
    shape: str = "disk"
    shape_params: dict = field(default_factory=dict)
    t_start: float = 1.0
    t_end: float = 2.0
    n_markers: int = 256
    cfl: float = 0.25
    dt_max: float | None = None
    output_stride: int = 1
    out_dir: str = "out"
    verify: VerifyOptions = field(default_factory=VerifyOptions)
    plot: PlotOptions = field(default_factory=PlotOptions)

    def initial_fronts(self):
        p = self.shape_params
        n = self.n_markers
        if self.shape == "disk":
            return (shapes.disk(p["radius"], n),)
        if self.shape == "rounded_square":
            return (shapes.rounded_square_uniform(p["side"], p["fillet"], n),)
        if self.shape == "ellipse":
            return (shapes.ellipse(p["a"], p["b"], n),)
        return shapes.two_disks(p["r1"], p["r2"], p["separation"], n)

    def scenario(self) -> Scenario:
        return Scenario(self.model, self.initial_fronts(), self.t_start, self.t_end, n_markers=self.n_markers,
                        cfl=self.cfl, output_stride=self.output_stride, dt_max=self.dt_max)

    def describe(self) -> dict:
        """Plain-data summary stored next to the trajectory."""
        d = dataclasses.asdict(self)
        d["model"] = self.model.value
        d["verify"]["identities"] = list(self.verify.identities)
        return d


def _line_numbers(text: str) -> dict[tuple[str, str], int]:
    lines: dict[tuple[str, str], int] = {}
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            lines[(section, "")] = no
            continue
        m = re.match(r"([^=:]+)[=:]", s)
        if m and section is not None:
            lines[(section, m.group(1).strip().lower())] = no
    return lines


def _convert(typ, raw: str, key: str, line):
    try:
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot read {raw!r} as {typ.__name__}", line=line, key=key) from None
    return raw.strip()


def parse_config(text: str) -> Config:
    """Parse and validate configuration text; unknown sections or keys are rejected."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside any section", line=exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", line=exc.lineno) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option}", line=exc.lineno, key=exc.option) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("cannot parse line", line=line) from None

    lines = _line_numbers(text)
    values: dict[str, dict[str, object]] = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]", line=lines.get((section, "")), key=section)
        for key, raw in cp.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]", line=lines.get((section, key)), key=key)
            typ, _ = SCHEMA[section][key]
            values.setdefault(section, {})[key] = _convert(typ, raw, key, lines.get((section, key)))

    def get(section, key):
        return values.get(section, {}).get(key, SCHEMA[section][key][1])

    def fail(msg, section, key):
        raise ConfigError(msg, line=lines.get((section, key)), key=key)

    model_name = get("model", "model")
    if model_name is None:
        fail("missing key model in [model]", "model", "model")
    try:
        model = Model(model_name)
    except ValueError:
        fail(f"model must be one of {[m.value for m in Model]}", "model", "model")

    shape = get("geometry", "shape")
    if shape not in SHAPES:
        fail(f"shape must be one of {list(SHAPES)}", "geometry", "shape")
    if (shape == "two_disks") != (model is Model.SANDPILE_2):
        fail("two_disks goes with sandpile_2 and only with it", "geometry", "shape")
    params = {k: get("geometry", k) for k in SCHEMA["geometry"] if k != "shape"}
    for k, v in params.items():
        if not v > 0.0:
            fail(f"{k} must be positive", "geometry", k)
    if shape == "rounded_square" and not params["fillet"] < 0.5 * params["side"]:
        fail("fillet must be smaller than side/2", "geometry", "fillet")
    n_markers = get("numerics", "n_markers")
    if shape == "rounded_square" and n_markers >= 32:
        side, fil = params["side"], params["fillet"]
        perimeter = 4.0 * (side - 2.0 * fil) + 2.0 * math.pi * fil
        per_arc = 0.5 * math.pi * fil / (perimeter / n_markers)
        need = MIN_FILLET_MARKERS[model.is_sandpile]
        if per_arc < need:
            fail(f"fillet is resolved by {per_arc:.2f} marker spacings per corner, need at least {need:g}"
                 " (raise fillet or n_markers)", "geometry", "fillet")

    t_start, t_end = get("time", "t_start"), get("time", "t_end")
    if model.is_sandpile and not t_start > 0.0:
        fail("sandpile requires t_start > 0", "time", "t_start")
    if t_start < 0.0:
        fail("t_start must be nonnegative", "time", "t_start")
    if not t_end > t_start:
        fail("t_end must exceed t_start", "time", "t_end")

    if n_markers < 32:
        fail("n_markers must be at least 32", "numerics", "n_markers")
    cfl = get("numerics", "cfl")
    if not 0.0 < cfl < 1.0:
        fail("cfl must lie in (0, 1)", "numerics", "cfl")
    dt_max = get("numerics", "dt_max")
    if dt_max is not None and not dt_max > 0.0:
        fail("dt_max must be positive", "numerics", "dt_max")

    ids = tuple(s.strip() for s in str(get("verify", "identities")).split(",") if s.strip())
    if ids != ("auto",):
        bad = [s for s in ids if s not in IDENTITIES]
        if bad or not ids:
            fail(f"identities must be 'auto' or a list from {list(IDENTITIES)}", "verify", "identities")
    for key in ("n_test_functions", "n_lipschitz", "n_states"):
        if get("verify", key) < 1:
            fail(f"{key} must be positive", "verify", key)
    if get("verify", "seed") < 0:
        fail("seed must be nonnegative", "verify", "seed")
    for key in ("stride", "frame_stride"):
        if get("output", key) < 1:
            fail(f"{key} must be positive", "output", key)
    if not get("output", "stroke_width") > 0.0:
        fail("stroke_width must be positive", "output", "stroke_width")

    cfg = Config(
        model=model,
        shape=shape,
        shape_params=params,
        t_start=t_start,
        t_end=t_end,
        n_markers=n_markers,
        cfl=cfl,
        dt_max=dt_max,
        output_stride=get("output", "stride"),
        out_dir=get("output", "dir"),
        verify=VerifyOptions(ids, get("verify", "n_test_functions"), get("verify", "n_lipschitz"),
                             get("verify", "n_states"), get("verify", "seed")),
        plot=PlotOptions(get("output", "frame_stride"), get("output", "stroke_width")),
    )
    try:
        cfg.scenario()
    except ConeFrontsError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path) -> Config:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def help_text() -> str:
    rows = []
    for section, keys in SCHEMA.items():
        items = ", ".join(f"{k}={'required' if d is None and section == 'model' else d}" for k, (_, d) in keys.items())
        rows.append(f"[{section}] {items}")
    return "\n".join(rows)
