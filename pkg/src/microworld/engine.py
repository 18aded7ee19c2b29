"""Run orchestration: scenario documents, the behavior-choice catalog,
tick scheduling, metrics, canonical state hashing, and log replay.

A scenario is a JSON document validated against a strict schema (unknown
keys are errors, every enum is checked, a schema_version field is
mandatory). The engine owns one model run: config, model state, the random
stream, per-tick metrics, and an append-only command log. Everything the
model consumed as input goes through the log, so
replay(config, log) always reproduces the live run's final state hash.

Menu choices restart the run from tick 0 with the same seed; the log keeps
a session-global step counter that never resets, so entries stay ordered
across restarts.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import ants as ants_mod
from . import fire as fire_mod
from .ants import (
    AntsParams,
    AntsState,
    AntsVariant,
    ExitPolicy,
    Following,
    Homing,
    Motion,
    food_census,
    init_ants,
    step_ants,
)
from .fire import (
    FireState,
    FireVariant,
    Humidity,
    Ignition,
    Spread,
    Wind,
    init_fire,
    percent_burned,
    step_fire,
)
from .grid import WorldGrid, new_grid
from .rng import Rng

SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    """Malformed or semantically invalid scenario document."""


class ChoiceError(ValueError):
    """Unknown menu or option, or option not applicable to the model."""


class ReplayError(ValueError):
    """Out-of-order or malformed command log."""


# ---------------------------------------------------------------------------
# scenario documents

_TOP_KEYS = {
    "schema_version", "model", "width", "height", "seed",
    "max_ticks", "tick_rate_hz", "variant", "params",
}
_FIRE_VARIANT_KEYS = {"spread", "ignition", "wind", "humidity", "flame_heading"}
_WIND_KEYS = {"direction", "strength"}
_FIRE_PARAM_KEYS = {"density"}
_ANTS_VARIANT_KEYS = {"motion", "homing", "following", "exit_policy"}
_ANTS_PARAM_KEYS = {
    "n_ants", "nest", "nest_radius", "food",
    "wiggle", "drop_amount", "evaporation_rate", "diffusion_share",
    "visibility_threshold",
}


def _require(cond: bool, msg: str):
    if not cond:
        raise ScenarioError(msg)


def _enum(cls, value, fieldname: str):
    try:
        return cls(value)
    except ValueError:
        valid = ", ".join(m.value for m in cls)
        raise ScenarioError(f"{fieldname}: {value!r} is not one of: {valid}") from None


def _reject_unknown(doc: dict, allowed: set, where: str):
    unknown = set(doc) - allowed
    if unknown:
        raise ScenarioError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


@dataclass(frozen=True)
class ScenarioConfig:
    model: str
    width: int
    height: int
    seed: int
    max_ticks: int
    tick_rate_hz: float
    # fire
    fire_variant: FireVariant | None = None
    density: float | None = None
    # ants
    ants_variant: AntsVariant | None = None
    ants_params: AntsParams | None = None
    n_ants: int | None = None
    nest_pos: tuple[int, int] | None = None
    nest_radius: int | None = None
    food_layout: tuple = ()
    # normalized source document, defaults filled in
    doc: dict = field(default_factory=dict, compare=False, repr=False)


def parse_scenario(doc: dict) -> ScenarioConfig:
    """Validate a scenario document and fill documented defaults."""
    _require(isinstance(doc, dict), "scenario must be a JSON object")
    _reject_unknown(doc, _TOP_KEYS, "scenario")
    _require("schema_version" in doc, "schema_version is mandatory")
    _require(doc["schema_version"] == SCHEMA_VERSION,
             f"schema_version: expected {SCHEMA_VERSION}, got {doc['schema_version']}")
    model = doc.get("model")
    _require(model in ("fire", "ants"), f"model: expected 'fire' or 'ants', got {model!r}")

    width = doc.get("width", 251 if model == "fire" else 71)
    height = doc.get("height", 251 if model == "fire" else 71)
    _require(isinstance(width, int) and isinstance(height, int),
             "width/height must be integers")
    _require(width >= 3 and height >= 3, f"grid must be at least 3x3, got {width}x{height}")

    _require("seed" in doc, "seed is mandatory (runs never take implicit entropy)")
    seed = doc["seed"]
    _require(isinstance(seed, int), f"seed must be an integer, got {seed!r}")

    max_ticks = doc.get("max_ticks", 10 * (width + height))
    _require(isinstance(max_ticks, int) and max_ticks >= 1,
             f"max_ticks must be a positive integer, got {max_ticks!r}")
    tick_rate = doc.get("tick_rate_hz", 10)
    _require(isinstance(tick_rate, (int, float)) and 1 <= tick_rate <= 60,
             f"tick_rate_hz must be in [1, 60], got {tick_rate!r}")

    variant_doc = doc.get("variant", {}) or {}
    params_doc = doc.get("params", {}) or {}
    _require(isinstance(variant_doc, dict), "variant must be an object")
    _require(isinstance(params_doc, dict), "params must be an object")

    kwargs: dict[str, Any] = dict(
        model=model, width=width, height=height, seed=seed,
        max_ticks=max_ticks, tick_rate_hz=float(tick_rate),
    )

    if model == "fire":
        _reject_unknown(variant_doc, _FIRE_VARIANT_KEYS, "variant")
        _reject_unknown(params_doc, _FIRE_PARAM_KEYS, "params")
        wind_doc = variant_doc.get("wind")
        wind = None
        if wind_doc is not None:
            _require(isinstance(wind_doc, dict), "variant.wind must be an object or null")
            _reject_unknown(wind_doc, _WIND_KEYS, "variant.wind")
            strength = wind_doc.get("strength", 0.0)
            _require(isinstance(strength, (int, float)) and 0 <= strength <= 1,
                     f"variant.wind.strength must be in [0, 1], got {strength!r}")
            wind = Wind(float(wind_doc.get("direction", 0.0)) % 360.0, float(strength))
        flame_heading = variant_doc.get("flame_heading", 0)
        _require(flame_heading in (0, 90, 180, 270),
                 f"variant.flame_heading must be one of 0, 90, 180, 270, got {flame_heading!r}")
        fire_variant = FireVariant(
            spread=_enum(Spread, variant_doc.get("spread", "baseline4"), "variant.spread"),
            ignition=_enum(Ignition, variant_doc.get("ignition", "leftEdgeColumn"),
                           "variant.ignition"),
            wind=wind,
            humidity=_enum(Humidity, variant_doc.get("humidity", "low"), "variant.humidity"),
            flame_heading=flame_heading,
        )
        _require("density" in params_doc, "params.density is mandatory for fire scenarios")
        density = params_doc["density"]
        _require(isinstance(density, (int, float)) and 0.0 <= density <= 1.0,
                 f"params.density must be in [0, 1], got {density!r}")
        kwargs.update(fire_variant=fire_variant, density=float(density))
    else:
        _reject_unknown(variant_doc, _ANTS_VARIANT_KEYS, "variant")
        _reject_unknown(params_doc, _ANTS_PARAM_KEYS, "params")
        ants_variant = AntsVariant(
            motion=_enum(Motion, variant_doc.get("motion", "randomWalk"), "variant.motion"),
            homing=_enum(Homing, variant_doc.get("homing", "nestScentGradient"),
                         "variant.homing"),
            following=_enum(Following, variant_doc.get("following", "thresholdTurn"),
                            "variant.following"),
            exit_policy=_enum(ExitPolicy, variant_doc.get("exit_policy", "immediate"),
                              "variant.exit_policy"),
        )
        n_ants = params_doc.get("n_ants", 5)
        _require(isinstance(n_ants, int) and n_ants >= 1,
                 f"params.n_ants must be a positive integer, got {n_ants!r}")
        nest = tuple(params_doc.get("nest", (width // 2, height // 2)))
        _require(len(nest) == 2 and all(isinstance(v, int) for v in nest),
                 f"params.nest must be [x, y], got {params_doc.get('nest')!r}")
        _require(0 <= nest[0] < width and 0 <= nest[1] < height,
                 f"params.nest {nest} is outside the grid")
        nest_radius = params_doc.get("nest_radius", 2)
        _require(isinstance(nest_radius, int) and nest_radius >= 0,
                 f"params.nest_radius must be a non-negative integer, got {nest_radius!r}")
        food_doc = params_doc.get("food", [])
        _require(isinstance(food_doc, list), "params.food must be a list of piles")
        food_layout = []
        for i, pile in enumerate(food_doc):
            _require(isinstance(pile, dict), f"params.food[{i}] must be an object")
            _reject_unknown(pile, {"pos", "amount"}, f"params.food[{i}]")
            _require("pos" in pile and "amount" in pile,
                     f"params.food[{i}] needs pos and amount")
            pos = tuple(pile["pos"])
            _require(len(pos) == 2 and 0 <= pos[0] < width and 0 <= pos[1] < height,
                     f"params.food[{i}].pos {pile['pos']!r} is outside the grid")
            amount = pile["amount"]
            _require(isinstance(amount, int) and amount >= 1,
                     f"params.food[{i}].amount must be a positive integer, got {amount!r}")
            from .grid import chebyshev
            _require(chebyshev(pos, nest) > nest_radius,
                     f"params.food[{i}] at {pos} lies inside the nest radius")
            food_layout.append({"pos": pos, "amount": amount})
        try:
            ants_params = AntsParams(
                wiggle=float(params_doc.get("wiggle", 40.0)),
                drop_amount=float(params_doc.get("drop_amount", 60.0)),
                evaporation_rate=float(params_doc.get("evaporation_rate", 0.1)),
                diffusion_share=float(params_doc.get("diffusion_share", 0.5)),
                visibility_threshold=float(params_doc.get("visibility_threshold", 0.05)),
            )
        except ants_mod.AntsError as exc:
            raise ScenarioError(f"params: {exc}") from None
        kwargs.update(
            ants_variant=ants_variant, ants_params=ants_params, n_ants=n_ants,
            nest_pos=nest, nest_radius=nest_radius, food_layout=tuple(
                (p["pos"], p["amount"]) for p in food_layout
            ),
        )

    return ScenarioConfig(doc=normalized_doc(kwargs), **kwargs)


def normalized_doc(kwargs: dict) -> dict:
    """Canonical JSON form of a parsed config, defaults spelled out."""
    doc: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "model": kwargs["model"],
        "width": kwargs["width"],
        "height": kwargs["height"],
        "seed": kwargs["seed"],
        "max_ticks": kwargs["max_ticks"],
        "tick_rate_hz": kwargs["tick_rate_hz"],
    }
    if kwargs["model"] == "fire":
        fv: FireVariant = kwargs["fire_variant"]
        doc["variant"] = {
            "spread": fv.spread.value,
            "ignition": fv.ignition.value,
            "wind": None if fv.wind is None else
                    {"direction": fv.wind.direction, "strength": fv.wind.strength},
            "humidity": fv.humidity.value,
            "flame_heading": fv.flame_heading,
        }
        doc["params"] = {"density": kwargs["density"]}
    else:
        av: AntsVariant = kwargs["ants_variant"]
        ap: AntsParams = kwargs["ants_params"]
        doc["variant"] = {
            "motion": av.motion.value,
            "homing": av.homing.value,
            "following": av.following.value,
            "exit_policy": av.exit_policy.value,
        }
        doc["params"] = {
            "n_ants": kwargs["n_ants"],
            "nest": list(kwargs["nest_pos"]),
            "nest_radius": kwargs["nest_radius"],
            "food": [{"pos": list(pos), "amount": amt} for pos, amt in kwargs["food_layout"]],
            "wiggle": ap.wiggle,
            "drop_amount": ap.drop_amount,
            "evaporation_rate": ap.evaporation_rate,
            "diffusion_share": ap.diffusion_share,
            "visibility_threshold": ap.visibility_threshold,
        }
    return doc


def load_scenario(text: str) -> ScenarioConfig:
    """Parse and validate a scenario document from JSON text."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"not valid JSON: {exc}") from None
    return parse_scenario(doc)


def set_doc_path(doc: dict, path: str, value) -> None:
    """Assign into a config document by dotted key path (e.g. params.density).

    Only existing keys can be assigned; intermediate nodes must be objects.
    """
    keys = path.split(".")
    node = doc
    for k in keys[:-1]:
        if not isinstance(node, dict) or k not in node:
            raise ScenarioError(f"unknown config path {path!r} (no key {k!r})")
        node = node[k]
        if node is None:
            raise ScenarioError(f"config path {path!r} passes through a null value at {k!r}")
    if not isinstance(node, dict) or keys[-1] not in node:
        raise ScenarioError(f"unknown config path {path!r} (no key {keys[-1]!r})")
    node[keys[-1]] = value


def get_doc_path(doc: dict, path: str):
    node = doc
    for k in path.split("."):
        if not isinstance(node, dict) or k not in node:
            raise ScenarioError(f"unknown config path {path!r} (no key {k!r})")
        node = node[k]
    return node


# ---------------------------------------------------------------------------
# choice menus

@dataclass(frozen=True)
class ChoiceOption:
    option_id: str
    label: str
    effect: dict  # dotted config path -> value


@dataclass(frozen=True)
class ChoiceMenu:
    menu_id: str
    model: str
    label: str
    options: tuple[ChoiceOption, ...]


MENU_CATALOG: tuple[ChoiceMenu, ...] = (
    ChoiceMenu("QF3", "fire", "Flame movement rule", (
        ChoiceOption("a", "Move forward one patch regardless of what is ahead",
                     {"variant.spread": "studentA_forward1"}),
        ChoiceOption("b", "Spread to whichever of the three patches ahead are green",
                     {"variant.spread": "studentB_forward3"}),
        ChoiceOption("c", "Spread to whichever of the five neighbouring patches are green",
                     {"variant.spread": "studentC_forward5"}),
    )),
    ChoiceMenu("QF4", "fire", "Make the forest fire more realistic", (
        ChoiceOption("center_spark", "Start the fire in the center of the world",
                     {"variant.ignition": "centerPoint"}),
        ChoiceOption("wind_on", "Wind pushes the fire (eastward, strength 0.8)",
                     {"variant.wind": {"direction": 0.0, "strength": 0.8}}),
        ChoiceOption("wind_off", "No wind",
                     {"variant.wind": None}),
        ChoiceOption("humidity_low", "Low humidity",
                     {"variant.humidity": "low"}),
        ChoiceOption("humidity_medium", "Medium humidity",
                     {"variant.humidity": "medium"}),
        ChoiceOption("humidity_high", "High humidity",
                     {"variant.humidity": "high"}),
    )),
    ChoiceMenu("QA2", "ants", "How should an ant move after leaving the nest", (
        ChoiceOption("a", "Walk straight out, but turn to pheromone appearing nearby",
                     {"variant.motion": "radialPheromoneInterrupt"}),
        ChoiceOption("b", "Walk randomly until meeting a food carrier, then walk its back-trail",
                     {"variant.motion": "randomUntilCarrierMet"}),
    )),
    ChoiceMenu("QA3", "ants", "What guides a loaded ant back to the nest", (
        ChoiceOption("nest_scent", "The nest emits a scent the ant climbs",
                     {"variant.homing": "nestScentGradient"}),
        ChoiceOption("turn180", "The ant turns 180 degrees and walks straight",
                     {"variant.homing": "turn180"}),
    )),
    ChoiceMenu("QA5", "ants", "Improve foraging and communication", (
        ChoiceOption("a", "Ants wait in the nest until the first loaded ant returns",
                     {"variant.exit_policy": "gatedOnFirstReturn"}),
        ChoiceOption("b", "After delivering, re-exit 180 degrees from the entry direction",
                     {"variant.exit_policy": "reverseReentry"}),
        ChoiceOption("c", "Pheromone adds up; always turn to the richest neighbouring patch",
                     {"variant.following": "accumulateMax"}),
    )),
)


def menus_for(model: str) -> list[ChoiceMenu]:
    return [m for m in MENU_CATALOG if m.model == model]


def find_option(menu_id: str, option_id: str) -> tuple[ChoiceMenu, ChoiceOption]:
    for menu in MENU_CATALOG:
        if menu.menu_id == menu_id:
            for opt in menu.options:
                if opt.option_id == option_id:
                    return menu, opt
            raise ChoiceError(f"menu {menu_id} has no option {option_id!r}")
    raise ChoiceError(f"unknown menu {menu_id!r}")


# ---------------------------------------------------------------------------
# engine

FIRE_METRICS = ("percent_burned", "burning_count")
ANTS_METRICS = ("delivered", "total_pheromone", "out_ants")


@dataclass
class TickReport:
    tick: int
    global_step: int
    metrics: dict[str, float]
    changed_cells: list[tuple]
    agent_positions: list[dict]
    food_changes: list[tuple] = field(default_factory=list)
    finished: bool = False
    noop: bool = False


class EngineInstance:
    """One model run: config, state, rng, metrics history, command log."""

    def __init__(self, config: ScenarioConfig | dict):
        if isinstance(config, dict):
            config = parse_scenario(config)
        self.config = config
        self.global_step = 0
        self.command_log: list[dict] = []
        self._init_state()

    # -- lifecycle -----------------------------------------------------

    def _init_state(self):
        cfg = self.config
        self.grid: WorldGrid = new_grid(cfg.width, cfg.height, wrap=False)
        self.rng = Rng(cfg.seed)
        self.tick_count = 0
        self.metrics_history: list[dict[str, float]] = []
        if cfg.model == "fire":
            try:
                self.state: FireState | AntsState = init_fire(
                    self.grid, cfg.density, cfg.fire_variant, self.rng)
            except fire_mod.FireError as exc:
                raise ScenarioError(str(exc)) from None
        else:
            try:
                self.state = init_ants(
                    self.grid, cfg.n_ants,
                    [{"pos": pos, "amount": amt} for pos, amt in cfg.food_layout],
                    cfg.nest_pos, cfg.ants_variant, cfg.ants_params, self.rng,
                    nest_radius=cfg.nest_radius)
            except ants_mod.AntsError as exc:
                raise ScenarioError(str(exc)) from None
            self._prev_pher_bytes = self._pheromone_bytes()

    @property
    def model_done(self) -> bool:
        if self.config.model == "fire":
            return self.state.quiescent
        return self.state.delivered >= self.state.initial_food

    @property
    def finished(self) -> bool:
        return self.model_done or self.tick_count >= self.config.max_ticks

    # -- stepping ------------------------------------------------------

    def tick(self, steering: dict[int, dict] | None = None) -> TickReport:
        """Advance one tick. Ticking a finished engine is a no-op (the
        session-global step still advances so logs stay aligned)."""
        if self.finished:
            self.global_step += 1
            return TickReport(
                tick=self.tick_count, global_step=self.global_step,
                metrics=self._metrics(), changed_cells=[], agent_positions=[],
                finished=True, noop=True)
        if steering:
            self.command_log.append({
                "t": "cmds", "g": self.global_step,
                "cmds": {str(aid): dict(action) for aid, action in sorted(steering.items())},
            })
        if self.config.model == "fire":
            report = step_fire(self.state, self.config.fire_variant, self.rng)
            changed = [(x, y, int(fire_mod.Cell.BURNING)) for x, y in report.ignited]
            changed += [(x, y, int(fire_mod.Cell.BURNED)) for x, y in report.burned_out]
            agents = [{"x": fl.x, "y": fl.y, "heading": fl.heading} for fl in self.state.flames]
            food_changes = []
        else:
            report = step_ants(self.state, self.config.ants_variant,
                               self.config.ants_params, self.rng, steering=steering)
            cur = self._pheromone_bytes()
            diff = cur != self._prev_pher_bytes
            ys, xs = np.nonzero(diff)
            changed = [(int(x), int(y), int(cur[y, x])) for y, x in zip(ys, xs)]
            self._prev_pher_bytes = cur
            food_changes = [
                (ev[2][0], ev[2][1], self.state.food.get(ev[2], 0))
                for ev in report.events if ev[0] == "pickup"
            ]
            agents = self._agent_list()
        self.global_step += 1
        self.tick_count = self.state.tick
        metrics = self._metrics()
        self.metrics_history.append(metrics)
        return TickReport(
            tick=self.tick_count, global_step=self.global_step, metrics=metrics,
            changed_cells=changed, agent_positions=agents,
            food_changes=food_changes, finished=self.finished, noop=False)

    def run(self) -> None:
        while not self.finished:
            self.tick()

    # -- choices -------------------------------------------------------

    def apply_choice(self, menu_id: str, option_id: str) -> None:
        """Apply a menu option and restart the run from tick 0, same seed."""
        menu, opt = find_option(menu_id, option_id)
        if menu.model != self.config.model:
            raise ChoiceError(
                f"menu {menu_id} applies to {menu.model} runs, this run is {self.config.model}")
        doc = json.loads(json.dumps(self.config.doc))
        for path, value in opt.effect.items():
            set_doc_path(doc, path, value)
        self.config = parse_scenario(doc)
        self.command_log.append(
            {"t": "choice", "g": self.global_step, "menu": menu_id, "option": option_id})
        self._init_state()

    # -- reporting -----------------------------------------------------

    def _metrics(self) -> dict[str, float]:
        if self.config.model == "fire":
            return {
                "percent_burned": percent_burned(self.state),
                "burning_count": float((self.state.cells == fire_mod.Cell.BURNING).sum()),
            }
        return {
            "delivered": float(self.state.delivered),
            "total_pheromone": self.state.pheromone_total,
            "out_ants": float(sum(1 for a in self.state.ants if not a.in_nest)),
        }

    def _agent_list(self) -> list[dict]:
        return [
            {"id": a.id, "x": a.x, "y": a.y, "heading": round(a.heading, 4),
             "carrying": a.carrying}
            for a in self.state.ants if not a.in_nest
        ]

    def _pheromone_bytes(self) -> np.ndarray:
        scale = self.config.ants_params.drop_amount or 1.0
        levels = np.clip(self.state.pheromone * (255.0 / scale), 0, 255)
        return levels.astype(np.uint8)

    def snapshot(self) -> dict:
        """Full redrawable state, used on join and for resyncs."""
        base = {
            "model": self.config.model,
            "config": self.config.doc,
            "tick": self.tick_count,
            "n": self.global_step,
            "width": self.config.width,
            "height": self.config.height,
            "metrics": self._metrics(),
            "finished": self.finished,
        }
        if self.config.model == "fire":
            base["cells"] = [int(v) for v in self.state.cells.ravel()]
            base["agents"] = [
                {"x": fl.x, "y": fl.y, "heading": fl.heading} for fl in self.state.flames]
        else:
            base["pheromone"] = [int(v) for v in self._pheromone_bytes().ravel()]
            base["food"] = [[x, y, c] for (x, y), c in sorted(self.state.food.items())]
            base["nest"] = list(self.state.nest_pos)
            base["nest_radius"] = self.state.nest_radius
            base["agents"] = self._agent_list()
        return base

    def export_metrics(self) -> list[tuple[int, str, float]]:
        """One row per metric per executed tick of the current run."""
        names = FIRE_METRICS if self.config.model == "fire" else ANTS_METRICS
        rows = []
        for i, metrics in enumerate(self.metrics_history, start=1):
            for name in names:
                rows.append((i, name, metrics[name]))
        return rows

    # -- hashing -------------------------------------------------------

    def state_hash(self) -> int:
        """64-bit digest of the canonical state serialization.

        Canonical order: patches row-major, then agents by id, then the rng
        position. Equal states hash equal; the digest is the first 8 bytes
        of a sha256 over packed little-endian fields.
        """
        h = hashlib.sha256()
        st = self.state
        h.update(struct.pack("<III", self.config.width, self.config.height, st.tick))
        if self.config.model == "fire":
            h.update(st.cells.tobytes())
            h.update(st.initial_trees.tobytes())
            h.update(struct.pack("<I", len(st.flames)))
            for fl in st.flames:
                h.update(struct.pack("<iii", fl.x, fl.y, int(fl.heading)))
            h.update(struct.pack("<I", st.initial_tree_count))
        else:
            h.update(st.pheromone.tobytes())
            h.update(struct.pack("<I", len(st.food)))
            for (x, y), count in sorted(st.food.items()):
                h.update(struct.pack("<iiq", x, y, count))
            h.update(struct.pack("<iii", st.nest_pos[0], st.nest_pos[1], st.nest_radius))
            for a in st.ants:
                flags = (a.carrying | a.in_nest << 1 | a.returned << 2
                         | a.met_carrier << 3 | a.halted << 4)
                h.update(struct.pack(
                    "<iiidddB", a.id, a.x, a.y, a.heading,
                    a.exit_heading, a.entry_heading, flags))
            h.update(struct.pack(
                "<qB d", st.delivered, st.first_return_seen, st.first_return_heading))
        seed, pos = self.rng.state()
        h.update(struct.pack("<Qq", seed, pos))
        return int.from_bytes(h.digest()[:8], "big")

    def state_hash_hex(self) -> str:
        return f"{self.state_hash():016x}"

    # -- logs ----------------------------------------------------------

    def log_entries(self, include_final: bool = True) -> list[dict]:
        entries = [{"t": "config", "config": self.config.doc}]
        entries.extend(self.command_log)
        if include_final:
            entries.append({"t": "final", "g": self.global_step,
                            "hash": self.state_hash_hex()})
        return entries


def replay(config: ScenarioConfig | dict, entries: list[dict]) -> int:
    """Re-execute a command log headlessly and return the final state hash.

    Entries must be ordered by their session-global step. A final entry, if
    present, fixes how many steps to run; without one the engine runs to
    completion like a plain headless run.
    """
    engine = EngineInstance(config)
    last_g = -1
    saw_final = False
    for e in entries:
        t = e.get("t")
        if t == "config":
            continue
        g = e.get("g")
        if not isinstance(g, int) or g < last_g:
            raise ReplayError(f"log entry out of order at g={g!r}")
        last_g = g
        if saw_final:
            raise ReplayError("log has entries after the final record")
        if t == "cmds":
            while engine.global_step < g:
                engine.tick()
            steering = {int(k): v for k, v in e["cmds"].items()}
            engine.tick(steering=steering)
        elif t == "choice":
            while engine.global_step < g:
                engine.tick()
            engine.apply_choice(e["menu"], e["option"])
        elif t == "final":
            while engine.global_step < g:
                engine.tick()
            saw_final = True
        else:
            raise ReplayError(f"unknown log entry type {t!r}")
    if not saw_final:
        engine.run()
    return engine.state_hash()


def final_hash_claim(entries: list[dict]) -> str | None:
    for e in entries:
        if e.get("t") == "final" and "hash" in e:
            return e["hash"]
    return None
