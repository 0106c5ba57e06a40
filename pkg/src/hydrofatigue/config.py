"""Run configuration: JSON schema, defaults, and object construction.

A run is described by a single JSON document with a ``scenario`` kind and
per-block settings (material, environment, load, mesh, solver, output).
``parse_config`` validates the document against a versioned schema,
applies defaults, and performs the semantic checks that the schema cannot
express (preset resolution, refinement-band resolution h <= ell/5).  The
resolved document round-trips: ``parse_config(emit_config(cfg))`` equals
``cfg``.

Shipped preset files cover the standard studies; ``preset_names`` and
``load_preset`` expose them to the command line.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from importlib import resources

import jsonschema

from .material import (Environment, FatigueLaw, MaterialParams,
                       MATERIAL_PRESETS, Split)
from .mesh import (BarSpec, PlateSpec, build_boundary_layer_mesh,
                   build_notched_bar_mesh, build_plate_mesh)
from .solver import (CyclicLoad, Scenario, SolverConfig, Waveform,
                     boundary_layer_scenario, notched_bar_scenario,
                     plate_scenario)
from .homog import SmoothSpecimenSpec

SCHEMA_VERSION = 1

KINDS = ("plate", "boundary_layer_stationary", "boundary_layer_growth",
         "notched_bar", "smooth_sn")


class ConfigError(ValueError):
    """Invalid run configuration (syntax, schema, or semantics)."""


# ---------------------------------------------------------------------------
# schema

def _obj(props, required=()):
    return {"type": "object", "properties": props,
            "required": list(required), "additionalProperties": False}


_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_NULL_POS = {"type": ["number", "null"], "exclusiveMinimum": 0}
_GROWTH = {"type": "number", "exclusiveMinimum": 1}
_FRAC = {"type": "number", "exclusiveMinimum": 0, "maximum": 1}


def _int_min(lo):
    return {"type": "integer", "minimum": lo}


_MATERIAL = _obj({
    "preset": {"enum": sorted(MATERIAL_PRESETS)},
    "E": _POS,
    "nu": {"type": "number", "minimum": 0, "exclusiveMaximum": 0.5},
    "Gc": _POS,
    "ell": _POS,
    "D": _NONNEG,
    "T": _POS,
    "chi": {"type": "number", "minimum": 0, "maximum": 1},
    "dgb0": {"type": "number"},
    "VH": _NONNEG,
    "alphaT": _NULL_POS,
    "kappa": _POS,
    "fatigue_law": {"enum": ["asymptotic", "logarithmic"]},
    "split": {"enum": ["nosplit", "voldev", "spectral"]},
})

_ENVIRONMENT = _obj({
    "preset": {"enum": ["air", "h2-gas"]},
    "Cenv": _NONNEG,
    "precharged": {"type": "boolean"},
    "pressure": {"type": ["number", "null"], "minimum": 0},
    "abel_noble_b": _NONNEG,
    "S0": _NULL_POS,
    "Es": _NULL_POS,
    "sievert_calibration": _POS,
    "C0": {"type": ["number", "null"], "minimum": 0},
})

_LOAD_FE = _obj({
    "amplitude": _POS,
    "R": {"type": "number", "minimum": -1, "exclusiveMaximum": 1},
    "freq": _POS,
    "waveform": {"enum": ["triangle", "sine"]},
    "increments_per_cycle": _int_min(20),
    "n_cycles": _int_min(1),
}, required=["amplitude"])

_LOAD_SN = _obj({
    "stress_amplitude": _POS,
    "R": {"type": "number", "minimum": -1, "exclusiveMaximum": 1},
    "increments_per_cycle": _int_min(8),
    "n_cycles": _int_min(1),
}, required=["stress_amplitude"])

_MESH = {
    "plate": _obj({
        "h_fine": _POS, "width": _POS, "height": _POS,
        "crack_length": _POS, "crack_y": _POS,
        "band_halfwidth": _NULL_POS,
        "band_x0": {"type": ["number", "null"]},
        "band_x1": {"type": ["number", "null"]},
        "growth": _GROWTH, "h_coarse": _NULL_POS,
    }, required=["h_fine"]),
    "boundary_layer": _obj({
        "h_fine": _POS, "radius": _POS, "r_core": _NULL_POS,
        "r_band": _NULL_POS, "growth": _GROWTH,
        "theta_coarse": _NULL_POS,
    }, required=["h_fine"]),
    "notched_bar": _obj({
        "h_fine": _POS, "R_gross": _POS, "R_net": _POS,
        "root_radius": _POS, "flank_slope": _POS, "length": _POS,
        "band_depth": _NULL_POS, "band_z": _NULL_POS, "growth": _GROWTH,
    }, required=["h_fine"]),
}

_SOLVER = _obj({
    "stag_tol": _POS,
    "stag_max_iters": _int_min(1),
    "k_reg": _NONNEG,
    "k_pen_dt": _POS,
    "phi_penalty_threshold": _FRAC,
    "max_dt_halvings": _int_min(0),
    "linear_solver": {"enum": ["direct", "iterative"]},
    "lu_dc_tol": _POS,
    "ligament_fraction": _FRAC,
    "reaction_drop": _FRAC,
    "crack_phi_threshold": _FRAC,
})


def _output(probes):
    props = {
        "directory": {"type": ["string", "null"]},
        "snapshot_every": _int_min(0),
        "checkpoint_every": _int_min(0),
        "stop_delta_a": _NULL_POS,
    }
    if probes:
        props["probe_radii"] = {"type": "array", "items": _POS}
    return _obj(props)


def _top(kind, load, mesh, output):
    props = {
        "version": {"const": SCHEMA_VERSION},
        "scenario": {"const": kind},
        "description": {"type": "string"},
        "material": _MATERIAL,
        "environment": _ENVIRONMENT,
        "load": load,
        "output": output,
    }
    required = ["version", "scenario", "material", "load"]
    if mesh is not None:
        props["mesh"] = mesh
        props["solver"] = _SOLVER
        required.append("mesh")
    return _obj(props, required=required)


SCHEMAS = {
    "plate": _top("plate", _LOAD_FE, _MESH["plate"], _output(False)),
    "boundary_layer_stationary": _top(
        "boundary_layer_stationary", _LOAD_FE, _MESH["boundary_layer"],
        _output(True)),
    "boundary_layer_growth": _top(
        "boundary_layer_growth", _LOAD_FE, _MESH["boundary_layer"],
        _output(True)),
    "notched_bar": _top("notched_bar", _LOAD_FE, _MESH["notched_bar"],
                        _output(False)),
    "smooth_sn": _top("smooth_sn", _LOAD_SN, None,
                      _obj({"directory": {"type": ["string", "null"]}})),
}


# ---------------------------------------------------------------------------
# defaults

def _solver_defaults():
    skip = {"checkpoint_every", "snapshot_every"}
    return {f.name: f.default for f in dataclasses.fields(SolverConfig)
            if f.name not in skip}


_ENV_DEFAULTS = {"Cenv": 0.0, "precharged": True, "pressure": None,
                 "abel_noble_b": 15840.0, "S0": None, "Es": None,
                 "sievert_calibration": 1.0, "C0": None}

_OUT_DEFAULTS = {"directory": None, "snapshot_every": 0,
                 "checkpoint_every": 0, "stop_delta_a": None}


def _defaults(kind):
    if kind == "smooth_sn":
        return {
            "environment": dict(_ENV_DEFAULTS),
            "load": {"R": -1.0, "increments_per_cycle": 40,
                     "n_cycles": 2_000_000},
            "output": {"directory": None},
        }
    mesh = {
        "plate": {"width": 1.0, "height": 1.0, "crack_length": 0.5,
                  "crack_y": 0.5, "band_halfwidth": None, "band_x0": None,
                  "band_x1": None, "growth": 1.2, "h_coarse": None},
        "boundary_layer_stationary": {
            "radius": 0.4, "r_core": None, "r_band": None, "growth": 1.15,
            "theta_coarse": None},
        "notched_bar": {"R_gross": 4.0, "R_net": 3.0, "root_radius": 0.2533,
                        "flank_slope": 1.7320508075688772, "length": 12.0,
                        "band_depth": None, "band_z": None, "growth": 1.2},
    }
    mesh["boundary_layer_growth"] = dict(mesh["boundary_layer_stationary"])
    out = dict(_OUT_DEFAULTS)
    if kind.startswith("boundary_layer"):
        out["probe_radii"] = []
    return {
        "environment": dict(_ENV_DEFAULTS),
        "load": {"R": 0.0, "freq": 1.0, "waveform": "triangle",
                 "increments_per_cycle": 20, "n_cycles": 100},
        "mesh": mesh[kind],
        "solver": _solver_defaults(),
        "output": out,
    }


def _merge(base, user):
    out = dict(base)
    for k, v in user.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


# ---------------------------------------------------------------------------
# parsing

@dataclass(frozen=True)
class ScenarioConfig:
    """A validated run configuration with all defaults resolved."""

    kind: str
    data: dict

    # -- constructors ------------------------------------------------------

    def material_params(self) -> MaterialParams:
        m = dict(self.data["material"])
        preset = m.pop("preset", None)
        if "fatigue_law" in m:
            m["fatigue_law"] = FatigueLaw[m["fatigue_law"].upper()]
        if "split" in m:
            m["split"] = Split[m["split"].upper()]
        try:
            if preset is not None:
                params = MATERIAL_PRESETS[preset][0]
                return params.with_(**m) if m else params
            missing = [k for k in ("E", "nu", "Gc", "ell") if k not in m]
            if missing:
                raise ConfigError(
                    "material: %s required when no preset is named"
                    % ", ".join(missing))
            return MaterialParams(**m)
        except ValueError as e:
            raise ConfigError(f"material: {e}") from e

    def environment(self) -> Environment:
        e = dict(self.data["environment"])
        e.pop("C0", None)
        preset = e.pop("preset", None)
        try:
            if preset is not None:
                mat = self.data["material"].get("preset")
                if mat is None:
                    raise ConfigError(
                        "environment.preset requires material.preset")
                env = MATERIAL_PRESETS[mat][1 if preset == "air" else 2]
                return dataclasses.replace(env, **e) if e else env
            return Environment(**e)
        except ValueError as e_:
            raise ConfigError(f"environment: {e_}") from e_

    def initial_concentration(self):
        """Initial lattice concentration; None defers to env.Cenv."""
        return self.data["environment"].get("C0")

    def cyclic_load(self) -> CyclicLoad:
        ld = self.data["load"]
        try:
            return CyclicLoad(
                amplitude=ld["amplitude"], R=ld["R"], freq=ld["freq"],
                waveform=Waveform[ld["waveform"].upper()],
                increments_per_cycle=ld["increments_per_cycle"],
                n_cycles_max=ld["n_cycles"])
        except ValueError as e:
            raise ConfigError(f"load: {e}") from e

    def build_mesh(self):
        mb = dict(self.data["mesh"])
        h = mb.pop("h_fine")
        kw = {k: v for k, v in mb.items() if v is not None}
        if self.kind == "plate":
            return build_plate_mesh(PlateSpec(**kw), h)
        if self.kind == "notched_bar":
            return build_notched_bar_mesh(BarSpec(**kw), h)
        radius = kw.pop("radius")
        return build_boundary_layer_mesh(radius, h, **kw)

    def solver_config(self) -> SolverConfig:
        out = self.data["output"]
        return SolverConfig(snapshot_every=out["snapshot_every"],
                            checkpoint_every=out["checkpoint_every"],
                            **self.data["solver"])

    def make_scenario(self, mesh=None) -> Scenario:
        mesh = self.build_mesh() if mesh is None else mesh
        params = self.material_params()
        env = self.environment()
        load = self.cyclic_load()
        C0 = self.initial_concentration()
        if self.kind == "plate":
            return plate_scenario(mesh, params, env, load, C0=C0)
        if self.kind == "notched_bar":
            return notched_bar_scenario(mesh, params, env, load, C0=C0)
        return boundary_layer_scenario(
            mesh, params, env, load, C0=C0,
            probe_radii=tuple(self.data["output"].get("probe_radii", ())),
            freeze_phase=self.kind == "boundary_layer_stationary")

    def smooth_spec(self) -> SmoothSpecimenSpec:
        ld = self.data["load"]
        try:
            return SmoothSpecimenSpec(
                params=self.material_params(), env=self.environment(),
                stress_amplitude=ld["stress_amplitude"], R=ld["R"],
                increments_per_cycle=ld["increments_per_cycle"],
                n_cycles_max=ld["n_cycles"])
        except ValueError as e:
            raise ConfigError(f"load: {e}") from e


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a JSON run configuration.

    Returns the resolved configuration (defaults applied).  Raises
    ConfigError with a line- or field-precise message on any problem.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"line {e.lineno} column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a JSON object")
    kind = doc.get("scenario")
    if kind not in KINDS:
        raise ConfigError(
            "scenario: expected one of %s, got %r" % (", ".join(KINDS), kind))
    if doc.get("version") != SCHEMA_VERSION:
        raise ConfigError(
            f"version: expected {SCHEMA_VERSION}, got {doc.get('version')!r}")

    validator = jsonschema.Draft202012Validator(SCHEMAS[kind])
    errors = sorted(validator.iter_errors(doc),
                    key=jsonschema.exceptions.relevance)
    if errors:
        e = errors[-1]
        raise ConfigError(f"{e.json_path}: {e.message}")

    defaults = _defaults(kind)
    if "preset" in doc.get("environment", {}):
        # a named environment carries its own gas/charging values; block
        # defaults would silently overwrite them in the replace() below
        defaults.pop("environment")
    data = _merge(defaults, doc)
    cfg = ScenarioConfig(kind=kind, data=data)
    _semantic_checks(cfg)
    return cfg


def _semantic_checks(cfg: ScenarioConfig):
    params = cfg.material_params()
    env = cfg.environment()
    if env.pressure is not None and (env.S0 is None or env.Es is None):
        raise ConfigError(
            "environment: gas exposure needs S0 and Es with pressure")
    if cfg.kind == "smooth_sn":
        cfg.smooth_spec()
        return
    cfg.cyclic_load()
    cfg.solver_config()
    # the refinement band must resolve the regularisation length; with a
    # frozen phase field there is no profile to resolve, so the
    # stationary transport study is exempt
    h = cfg.data["mesh"]["h_fine"]
    h_max = params.ell / 5.0
    if cfg.kind != "boundary_layer_stationary" and h > h_max * (1 + 1e-9):
        raise ConfigError(
            f"mesh.h_fine: {h:g} exceeds ell/5 = {h_max:g}; refine the "
            "band or enlarge ell")
    if cfg.kind == "plate":
        mb = cfg.data["mesh"]
        if not mb["crack_length"] < mb["width"]:
            raise ConfigError("mesh.crack_length: must be below width")


def emit_config(cfg: ScenarioConfig) -> str:
    """Serialise a resolved configuration to canonical JSON text."""
    return json.dumps(cfg.data, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# shipped presets

def _preset_dir():
    return resources.files(__package__) / "presets"


def preset_names():
    return sorted(p.name[:-5] for p in _preset_dir().iterdir()
                  if p.name.endswith(".json"))


def load_preset(name: str) -> str:
    path = _preset_dir() / f"{name}.json"
    try:
        return path.read_text()
    except (FileNotFoundError, OSError):
        raise ConfigError(
            "unknown preset %r; available: %s"
            % (name, ", ".join(preset_names()))) from None
