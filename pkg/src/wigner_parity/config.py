"""Run configuration: INI-style sections of ``key = value`` pairs.

Example::

    [potential]
    family = gaussian
    amplitude = 1.0
    width_a = 1.0

    [domain]
    l = 10
    M = 200

    [velocity]
    K = 64
    dv = 0.15

    [moments]
    N = 8

    [boundary]
    preset = left-maxwellian
    temperature = 1.0

    [run]
    mode = general
    seed = 0
    output_dir = out/gaussian-barrier
"""

from __future__ import annotations

import configparser
import os
from dataclasses import asdict, dataclass, field, replace
from io import StringIO
from pathlib import Path

import numpy as np

from .bvp import BoundaryData
from .exceptions import ContractError
from .grid import SpaceGrid, VelocityGrid
from .potential import PotentialSpec, load_potential_csv

OUTPUT_ROOT_ENV = "WIGNER_PARITY_OUTPUT_ROOT"
RUN_MODES = ("general", "symmetric_shortcut", "oracle", "compare")
BOUNDARY_PRESETS = ("left-maxwellian", "two-sided-maxwellian", "zero")

DEFAULT_TOLERANCES = {
    "inflow": 1e-6,
    "condition": 1e12,
    "bound_slack": 0.05,
    "quadrature": 1e-8,
    "truncation": 1e-12,
}


class ConfigError(ContractError):
    """Invalid or incomplete run configuration."""


@dataclass(frozen=True)
class RunConfig:
    potential: dict = field(default_factory=lambda: {"family": "zero"})
    l: float = 10.0
    M: int = 200
    K: int = 64
    dv: float = 0.15
    N: int = 8
    boundary: dict = field(default_factory=lambda: {"preset": "left-maxwellian"})
    mode: str = "general"
    seed: int = 0
    output_dir: str = "out"
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    base_dir: str = "."

    def validate(self):
        for name in ("l", "dv"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive", field=_FIELD_OF[name])
        for name in ("M", "K", "N"):
            val = getattr(self, name)
            if int(val) != val or val < 1:
                raise ConfigError(f"{name} must be a positive integer", field=_FIELD_OF[name])
        if self.mode not in RUN_MODES:
            raise ConfigError(f"mode must be one of {RUN_MODES}", field="run.mode")
        for key, val in self.tolerances.items():
            if not val > 0:
                raise ConfigError(f"tolerance {key} must be positive", field=f"tolerances.{key}")
        b = self.boundary
        if "preset" in b:
            if b["preset"] not in BOUNDARY_PRESETS:
                raise ConfigError(f"unknown boundary preset {b['preset']!r}", field="boundary.preset")
            if not float(b.get("temperature", 1.0)) > 0:
                raise ConfigError("temperature must be positive", field="boundary.temperature")
        else:
            for key in ("f_L", "f_R"):
                if key in b and not self.resolve(b[key]).is_file():
                    raise ConfigError(f"boundary file not found: {b[key]}", field=f"boundary.{key}")
            if "f_L" not in b and "f_R" not in b:
                raise ConfigError("boundary needs a preset or f_L/f_R files", field="boundary")
        samples = self.potential.get("samples")
        if samples is not None and not self.resolve(samples).is_file():
            raise ConfigError(f"potential samples not found: {samples}", field="potential.samples")
        self.potential_spec()
        return self

    def resolve(self, path):
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def output_path(self):
        root = os.environ.get(OUTPUT_ROOT_ENV)
        p = Path(self.output_dir)
        if p.is_absolute():
            return p
        return Path(root) / p if root else self.resolve(p)

    def potential_spec(self):
        p = dict(self.potential)
        family = p.pop("family", "zero")
        try:
            if family == "tabulated":
                if "samples" not in p:
                    raise ConfigError("tabulated potential needs a samples file", field="potential.samples")
                return load_potential_csv(self.resolve(p["samples"]), amplitude=float(p.get("amplitude", 1.0)),
                                          y_max=_opt_float(p.get("y_max")))
            return PotentialSpec(family, amplitude=float(p.get("amplitude", 1.0)),
                                 width_a=float(p.get("width_a", 1.0)), center=float(p.get("center", 0.0)),
                                 y_max=_opt_float(p.get("y_max")))
        except ConfigError:
            raise
        except ContractError as exc:
            raise ConfigError(str(exc), **exc.details) from exc
        except ValueError as exc:
            raise ConfigError(f"bad potential parameter: {exc}", field="potential") from exc

    def grids(self):
        return VelocityGrid(int(self.K), float(self.dv)), SpaceGrid(float(self.l), int(self.M))

    def boundary_data(self, vgrid):
        b = self.boundary
        if "preset" in b:
            T = float(b.get("temperature", 1.0))
            u = float(b.get("drift", 0.0))

            def maxwellian(v):
                return np.exp(-((v - u) ** 2) / (2 * T)) / np.sqrt(2 * np.pi * T)

            name = b["preset"]
            if name == "left-maxwellian":
                return BoundaryData.from_functions(vgrid, maxwellian, None)
            if name == "two-sided-maxwellian":
                return BoundaryData.from_functions(vgrid, maxwellian, maxwellian)
            return BoundaryData.from_functions(vgrid)
        K = vgrid.K
        halves = {}
        for key, sl in (("f_L", slice(K, None)), ("f_R", slice(None, K))):
            if key not in b:
                halves[key] = np.zeros(K)
                continue
            data = np.loadtxt(self.resolve(b[key]), delimiter=",", comments="#", skiprows=1, ndmin=2)
            if data.shape != (K, 2) or not np.allclose(data[:, 0], vgrid.nodes[sl], rtol=1e-12, atol=0):
                raise ConfigError(f"{b[key]}: expected columns (v, value) on the {K} "
                                  f"{'positive' if key == 'f_L' else 'negative'} nodes", field=f"boundary.{key}")
            halves[key] = data[:, 1]
        return BoundaryData(vgrid, halves["f_L"], halves["f_R"])

    def refined(self, level):
        f = 2 ** level
        return replace(self, M=self.M * f, K=self.K * f, dv=self.dv / f)

    def to_dict(self):
        d = asdict(self)
        d.pop("base_dir")
        return d

    def to_ini(self):
        cp = configparser.ConfigParser()
        cp.optionxform = str
        cp["potential"] = {k: str(v) for k, v in self.potential.items()}
        cp["domain"] = {"l": repr(float(self.l)), "M": str(self.M)}
        cp["velocity"] = {"K": str(self.K), "dv": repr(float(self.dv))}
        cp["moments"] = {"N": str(self.N)}
        cp["boundary"] = {k: str(v) for k, v in self.boundary.items()}
        cp["run"] = {"mode": self.mode, "seed": str(self.seed), "output_dir": self.output_dir}
        cp["tolerances"] = {k: repr(float(v)) for k, v in self.tolerances.items()}
        buf = StringIO()
        cp.write(buf)
        return buf.getvalue()


_FIELD_OF = {"l": "domain.l", "M": "domain.M", "K": "velocity.K", "dv": "velocity.dv", "N": "moments.N"}


def _opt_float(v):
    return None if v in (None, "") else float(v)


def _num(section, key, kind, default):
    raw = section.get(key)
    if raw is None:
        return default
    try:
        val = float(raw)
        if kind is int:
            if val != int(val):
                raise ValueError
            return int(val)
        return val
    except ValueError:
        raise ConfigError(f"{section.name}.{key} must be a number, got {raw!r}",
                          field=f"{section.name}.{key}") from None


def parse_config(text, base_dir="."):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    known = {"potential", "domain", "velocity", "moments", "boundary", "run", "tolerances"}
    unknown = set(cp.sections()) - known
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}", field=sorted(unknown)[0])
    get = lambda name: cp[name] if cp.has_section(name) else cp[configparser.DEFAULTSECT]  # noqa: E731
    run = get("run")
    tol = dict(DEFAULT_TOLERANCES)
    if cp.has_section("tolerances"):
        for key in cp["tolerances"]:
            tol[key] = _num(cp["tolerances"], key, float, None)
    potential = dict(cp["potential"]) if cp.has_section("potential") else {"family": "zero"}
    for key in ("amplitude", "width_a", "center", "y_max"):
        if key in potential:
            _num(cp["potential"], key, float, None)
    boundary = dict(cp["boundary"]) if cp.has_section("boundary") else {"preset": "left-maxwellian"}
    cfg = RunConfig(
        potential=potential,
        l=_num(get("domain"), "l", float, 10.0),
        M=_num(get("domain"), "M", int, 200),
        K=_num(get("velocity"), "K", int, 64),
        dv=_num(get("velocity"), "dv", float, 0.15),
        N=_num(get("moments"), "N", int, 8),
        boundary=boundary,
        mode=run.get("mode", "general"),
        seed=_num(run, "seed", int, 0),
        output_dir=run.get("output_dir", "out"),
        tolerances=tol,
        base_dir=str(base_dir),
    )
    return cfg


PRESETS = {
    "free-stream": """\
[potential]
family = zero

[domain]
l = 10.0
M = 200

[velocity]
K = 64
dv = 0.15

[moments]
N = 8

[boundary]
preset = two-sided-maxwellian
temperature = 1.0
drift = 0.5

[run]
mode = general
seed = 0
output_dir = out/free-stream
""",
    "gaussian-barrier": """\
[potential]
family = gaussian
amplitude = 1.0
width_a = 1.0

[domain]
l = 10.0
M = 200

[velocity]
K = 64
dv = 0.15

[moments]
N = 8

[boundary]
preset = left-maxwellian
temperature = 1.0

[run]
mode = general
seed = 0
output_dir = out/gaussian-barrier
""",
}
PRESETS["gaussian-barrier-compare"] = PRESETS["gaussian-barrier"].replace(
    "mode = general", "mode = compare").replace("out/gaussian-barrier", "out/gaussian-barrier-compare")


def load_config(path_or_preset):
    """Parse a config file, or a preset name when no such file exists."""
    p = Path(path_or_preset)
    if p.is_file():
        return parse_config(p.read_text(), base_dir=p.parent)
    if str(path_or_preset) in PRESETS:
        return parse_config(PRESETS[str(path_or_preset)])
    raise ConfigError(f"no config file or preset named {path_or_preset!r}", field="config")
