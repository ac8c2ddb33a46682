"""Compile circuits onto a velocity-zone architecture.

Atoms sit either in static traps or at the intersections of AOD x-tones and
y-tones. Motion is along x only: each x-tone carries one trajectory, and a
velocity-selective operation accelerates whole x-tones into the zone whose
Doppler shift the global beam is tuned to. The addressing beams propagate
along -x, so an atom moving at ``+v`` is resonant at detuning ``+|k| v``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CompileError, InvalidArgumentError
from .kinematics import (Trajectory, make_constant_velocity, make_hold, make_rest_to_rest_move,
                         make_velocity_ramp, rest_to_rest_jerk, sample, zone_transfer_cost)
from .pulsephysics import (LAMBDA_CLOCK, LAMBDA_FS, TWO_PI, spectator_pi_pulse_infidelity,
                           zero_infidelity_velocity)

SELECTIVE_ROLES = ("prep", "readout", "reset")
OP_KINDS = ("prep", "global_rot", "local_z", "cz", "flyby_cz", "measure", "reset", "move")


@dataclass(frozen=True)
class Limits:
    jerk: float = 1.5e8
    v_max: float = 0.3
    min_separation: float = 1.5e-6
    max_zones: int = 4
    reset_velocity: float | None = None


@dataclass(frozen=True)
class Transition:
    rabi: float
    wavelength: float

    @property
    def k(self) -> float:
        return TWO_PI / self.wavelength


DEFAULT_TRANSITIONS = {
    "prep": Transition(TWO_PI * 40e3, LAMBDA_CLOCK),
    "readout": Transition(TWO_PI * 40e3, LAMBDA_CLOCK),
    "reset": Transition(TWO_PI * 40e3, LAMBDA_CLOCK),
    "fs": Transition(TWO_PI * 120e3, LAMBDA_FS),
}
RYDBERG_GATE_TIME = 2.4726e-7
FLYBY_VELOCITY = 0.1
RESET_PULSES = 3
RESET_WAIT = 40e-6


@dataclass
class ArrayGeometry:
    """Static sites plus an AOD grid; ``tone_atoms[i] = (x-tone, y-tone)`` of tweezer atom i.

    Atom ids run over static sites first, then tweezer atoms.
    """

    static_sites: list = field(default_factory=list)
    x_tones: list = field(default_factory=list)
    y_tones: list = field(default_factory=list)
    tone_atoms: list = field(default_factory=list)

    def __post_init__(self):
        self.static_sites = [tuple(map(float, s)) for s in self.static_sites]
        self.x_tones = [float(x) for x in self.x_tones]
        self.y_tones = [float(y) for y in self.y_tones]
        self.tone_atoms = [tuple(map(int, t)) for t in self.tone_atoms]
        if len(set(self.static_sites)) != len(self.static_sites):
            raise InvalidArgumentError("static sites must be distinct")
        for tones in (self.x_tones, self.y_tones):
            if any(b <= a for a, b in zip(tones, tones[1:])):
                raise InvalidArgumentError("tone positions must be strictly increasing")
        for ix, iy in self.tone_atoms:
            if not (0 <= ix < len(self.x_tones) and 0 <= iy < len(self.y_tones)):
                raise InvalidArgumentError(f"tone atom ({ix}, {iy}) outside the grid")

    @property
    def n_atoms(self) -> int:
        return len(self.static_sites) + len(self.tone_atoms)

    def tone_of(self, atom: int):
        """x-tone index of ``atom`` or ``None`` for a static atom."""
        k = atom - len(self.static_sites)
        if atom < 0 or atom >= self.n_atoms:
            raise CompileError(f"atom {atom} does not exist")
        return None if k < 0 else self.tone_atoms[k][0]

    def atoms_on_tone(self, tone: int) -> list:
        s = len(self.static_sites)
        return [s + i for i, (ix, _) in enumerate(self.tone_atoms) if ix == tone]

    def initial_position(self, atom: int) -> np.ndarray:
        s = len(self.static_sites)
        if atom < s:
            return np.array(self.static_sites[atom])
        ix, iy = self.tone_atoms[atom - s]
        return np.array([self.x_tones[ix], self.y_tones[iy]])

    def to_json_obj(self) -> dict:
        return {"static_sites": [list(s) for s in self.static_sites], "x_tones": self.x_tones,
                "y_tones": self.y_tones, "tone_atoms": [list(t) for t in self.tone_atoms]}

    @classmethod
    def from_json_obj(cls, d) -> "ArrayGeometry":
        return cls(d.get("static_sites", []), d.get("x_tones", []), d.get("y_tones", []),
                   d.get("tone_atoms", []))


@dataclass(frozen=True)
class VelocityZone:
    name: str
    velocity: float
    detuning: float
    role: str


@dataclass(frozen=True)
class IROp:
    kind: str
    targets: tuple = ()
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in OP_KINDS:
            raise InvalidArgumentError(f"unknown IR op {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))


@dataclass
class CircuitIR:
    ops: list = field(default_factory=list)

    def roles(self) -> list:
        """Velocity-selective roles used, in order of first appearance."""
        out = []
        for op in self.ops:
            role = _role(op)
            if role and role not in out:
                out.append(role)
        return out

    def to_json_obj(self):
        return {"ops": [{"kind": o.kind, "targets": list(o.targets), "params": o.params} for o in self.ops]}

    @classmethod
    def from_json_obj(cls, d) -> "CircuitIR":
        return cls([IROp(o["kind"], tuple(o.get("targets", ())), dict(o.get("params", {})))
                    for o in d["ops"]])


def _role(op: IROp):
    if op.kind == "prep" and op.params.get("method", "velocity") == "velocity":
        return "prep"
    if op.kind == "measure" and op.params.get("velocity_selective", False):
        return "readout"
    if op.kind == "reset":
        return "reset"
    if op.kind == "move" and "zone" in op.params:
        return op.params["zone"]
    return None


# zones --------------------------------------------------------------------------------

def assign_velocity_zones(ir: CircuitIR, transitions: dict | None = None,
                          limits: Limits | None = None) -> dict:
    """Velocity table: storage at rest plus one zone per velocity-selective role.

    Each role takes the lowest zero-infidelity order whose velocity keeps at
    least one first-zero spacing from every zone already assigned.
    """
    transitions = {**DEFAULT_TRANSITIONS, **(transitions or {})}
    limits = limits or Limits()
    zones = {"storage": VelocityZone("storage", 0.0, 0.0, "storage")}
    for role in ir.roles():
        if role not in SELECTIVE_ROLES:
            continue
        tr = transitions[role]
        spacing = zero_infidelity_velocity(tr.rabi, tr.wavelength, 1)
        if role == "reset" and limits.reset_velocity is not None:
            candidates = [limits.reset_velocity]
        else:
            candidates = (zero_infidelity_velocity(tr.rabi, tr.wavelength, k) for k in range(1, 100))
        chosen = None
        for v in candidates:
            if v > limits.v_max:
                break
            if all(abs(v - z.velocity) >= spacing * (1 - 1e-12) for z in zones.values()):
                chosen = v
                break
        if chosen is None:
            raise CompileError(f"no feasible velocity below v_max={limits.v_max} m/s", role)
        zones[role] = VelocityZone(role, chosen, tr.k * chosen, role)
        if len(zones) > limits.max_zones:
            raise CompileError(f"more than {limits.max_zones} zones requested", role)
    return zones


# schedule -----------------------------------------------------------------------------

@dataclass
class Schedule:
    events: list
    x_tones: list
    y_tones: list
    duration: float
    geometry: ArrayGeometry
    zones: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {"events": self.events,
                "tones": {"x": [t.to_json_obj() for t in self.x_tones],
                          "y": [t.to_json_obj() for t in self.y_tones]},
                "duration_s": self.duration,
                "geometry": self.geometry.to_json_obj(),
                "zones": {k: {"velocity": z.velocity, "detuning": z.detuning, "role": z.role}
                          for k, z in self.zones.items()}}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Schedule":
        d = json.loads(text)
        return cls(d["events"],
                   [Trajectory.from_json_obj(t, f"x{i}") for i, t in enumerate(d["tones"]["x"])],
                   [Trajectory.from_json_obj(t, f"y{i}") for i, t in enumerate(d["tones"]["y"])],
                   d["duration_s"], ArrayGeometry.from_json_obj(d["geometry"]),
                   {k: VelocityZone(k, z["velocity"], z["detuning"], z["role"])
                    for k, z in d.get("zones", {}).items()})

    def atom_state(self, atom: int, t: float):
        """(position, velocity) of ``atom`` at time ``t``."""
        geo = self.geometry
        tone = geo.tone_of(atom)
        x0 = geo.initial_position(atom)
        if tone is None:
            return x0, np.zeros(2)
        st = sample(self.x_tones[tone], t)
        iy = geo.tone_atoms[atom - len(geo.static_sites)][1]
        sy = sample(self.y_tones[iy], t) if self.y_tones else None
        y = sy.x[0] if sy is not None else x0[1]
        vy = sy.v[0] if sy is not None else 0.0
        return np.array([st.x[0], y]), np.array([st.v[0], vy])

    def pulses(self) -> list:
        return [e for e in self.events if e["type"] == "pulse"]


class _Builder:
    def __init__(self, geometry: ArrayGeometry, zones, transitions, limits):
        self.geo = geometry
        self.zones = zones
        self.tr = transitions
        self.lim = limits
        self.t = 0.0
        self.events = []
        self.tones = [Trajectory([], f"x{i}") for i in range(len(geometry.x_tones))]
        self.tone_x0 = list(geometry.x_tones)

    # tone bookkeeping
    def tone_end(self, i):
        traj = self.tones[i]
        if not traj.segments:
            return self.tone_x0[i], 0.0, 0.0
        st = traj.end_state()
        return float(st.x[0]), float(st.v[0]), traj.t_end

    def _raw_append(self, i, piece: Trajectory):
        x, _, t_end = self.tone_end(i)
        if not self.tones[i].segments:
            segs = [s.shifted(t_end - piece.t_start, (x, 0.0)) for s in piece.segments]
            self.tones[i] = Trajectory(segs, f"x{i}")
        else:
            self.tones[i] = self.tones[i].then(piece)

    def pad(self, i):
        x, v, t_end = self.tone_end(i)
        if t_end < self.t - 1e-15 or (not self.tones[i].segments and self.t == 0.0):
            self._raw_append(i, make_constant_velocity(v, max(self.t - t_end, 0.0)) if v
                             else make_hold(max(self.t - t_end, 0.0)))

    def append(self, i, piece: Trajectory):
        self.pad(i)
        self._raw_append(i, piece)

    def hold_all(self):
        for i in range(len(self.tones)):
            self.pad(i)

    def event(self, etype, t, **params):
        self.events.append({"t": t, "type": etype, "params": params})

    def barrier(self, op_index):
        self.hold_all()
        self.event("barrier", self.t, op=op_index)

    def tones_for(self, targets, op_index):
        tones = []
        for a in targets:
            tone = self.geo.tone_of(a)
            if tone is None:
                raise CompileError(f"atom {a} sits in a static trap and cannot move", f"op{op_index}")
            if tone not in tones:
                tones.append(tone)
        for tone in tones:
            extra = set(self.geo.atoms_on_tone(tone)) - set(targets)
            if extra:
                raise CompileError(f"x-tone {tone} also carries non-target atoms {sorted(extra)}",
                                   f"op{op_index}")
        return sorted(tones)

    def ramp(self, tones, dv, op_index):
        if dv == 0:
            return 0.0
        T, _ = zone_transfer_cost(dv, self.lim.jerk)
        for tone in tones:
            _, v, _ = self.tone_end(tone)
            if abs(v + dv) > self.lim.v_max * (1 + 1e-12):
                raise CompileError(f"velocity {v + dv:.4g} m/s exceeds v_max", f"op{op_index}")
            self.append(tone, make_velocity_ramp(dv, self.lim.jerk, v0=v))
            self.event("ramp", self.t, tone=tone, dv=dv, duration=T, op=op_index)
        self.t += T
        return T

    def cruise(self, tones, duration):
        for tone in tones:
            _, v, _ = self.tone_end(tone)
            self.append(tone, make_constant_velocity(v, duration) if v else make_hold(duration))
        self.t += duration
        self.hold_all()


def _pulse_params(transition, tr: Transition, angle, zone, selective, targets, tones, op, phase=0.0):
    det = zone.detuning if zone is not None else 0.0
    return dict(transition=transition, rabi=tr.rabi, wavelength=tr.wavelength, angle=angle,
                phase=phase, duration=angle / tr.rabi, detuning=det,
                zone=zone.name if zone is not None else "storage", selective=selective,
                targets=list(targets), tones=list(tones), op=op)


def compile_ir(ir: CircuitIR, geometry: ArrayGeometry, zones: dict | None = None,
               limits: Limits | None = None, transitions: dict | None = None) -> Schedule:
    """Lower ``ir`` to a timed schedule of pulses and per-tone trajectories."""
    limits = limits or Limits()
    transitions = {**DEFAULT_TRANSITIONS, **(transitions or {})}
    zones = zones if zones is not None else assign_velocity_zones(ir, transitions, limits)
    b = _Builder(geometry, zones, transitions, limits)
    for i, op in enumerate(ir.ops):
        for a in op.targets:
            geometry.tone_of(a)
        name = f"op{i}:{op.kind}"
        role = _role(op)
        if op.kind in ("prep", "measure", "reset") and role in SELECTIVE_ROLES:
            if role not in zones:
                raise CompileError(f"no zone assigned for role {role!r}", name)
            zone = zones[role]
            tones = b.tones_for(op.targets, i)
            b.ramp(tones, zone.velocity, i)
            tr = transitions[role]
            n_pulses = RESET_PULSES if role == "reset" else 1
            for k in range(n_pulses):
                b.event("pulse", b.t, **_pulse_params(role, tr, math.pi, zone, True, op.targets, tones, i))
                b.cruise(tones, math.pi / tr.rabi + (RESET_WAIT if role == "reset" else 0.0))
            b.ramp(tones, -zone.velocity, i)
            if op.kind == "measure":
                b.event("measure", b.t, targets=list(op.targets), basis=op.params.get("basis", "Z"), op=i)
        elif op.kind == "prep":
            b.event("pulse", b.t, **_pulse_params("fs", transitions["fs"], math.pi / 2, None, False,
                                                  op.targets, [], i))
            b.t += 0.5 * math.pi / transitions["fs"].rabi
        elif op.kind == "global_rot":
            angle = float(op.params.get("angle", math.pi / 2))
            tr = transitions["fs"]
            b.event("pulse", b.t, **_pulse_params("fs", tr, angle, None, False, [], [], i,
                                                  float(op.params.get("phase", 0.0))))
            b.t += angle / tr.rabi
        elif op.kind == "local_z":
            _compile_local_z(b, op, i, name)
        elif op.kind == "cz":
            pairs = [list(map(int, p)) for p in op.params.get("pairs", [])]
            b.event("pulse", b.t, transition="rydberg", duration=RYDBERG_GATE_TIME, pairs=pairs,
                    selective=False, op=i)
            b.t += RYDBERG_GATE_TIME
        elif op.kind == "flyby_cz":
            _compile_flyby(b, op, i, name)
        elif op.kind == "measure":
            b.event("measure", b.t, targets=list(op.targets), basis=op.params.get("basis", "Z"), op=i)
        elif op.kind == "move":
            _compile_move(b, op, i, name)
        b.barrier(i)
    schedule = Schedule(b.events, b.tones,
                        [make_hold(b.t, x0=(y, 0.0), label=f"y{j}") for j, y in enumerate(geometry.y_tones)],
                        b.t, geometry, zones)
    violations = validate(schedule, limits)
    if violations:
        v = violations[0]
        where = f"event{v['event']}" if v["event"] >= 0 else "schedule"
        raise CompileError(v["message"], f"{where}:{v['kind']}")
    return schedule


def local_z_displacement(angle: float) -> float:
    """Displacement during the echo pi pulse that imprints a Z rotation ``angle``.

    The drive phase ``k dx`` enters the echo twice, so ``dx = angle lambda_FS / (4 pi)``.
    """
    return angle * LAMBDA_FS / (2 * TWO_PI)


def _move_time(d, limits):
    T = (12.0 * abs(d) / limits.jerk) ** (1.0 / 3.0)
    return max(T, 1.5 * abs(d) / limits.v_max)


def _compile_local_z(b, op, i, name):
    angle = float(op.params["angle"])
    dx = local_z_displacement(angle)
    if abs(dx) > LAMBDA_FS / 2 + 1e-15:
        raise CompileError(f"displacement {dx:.3g} m exceeds lambda_FS/2", name)
    tones = b.tones_for(op.targets, i)
    tr = b.tr["fs"]
    T = _move_time(dx, b.lim)
    b.event("pulse", b.t, **_pulse_params("fs", tr, math.pi / 2, None, False, [], [], i))
    b.t += 0.5 * math.pi / tr.rabi
    b.hold_all()
    for tone in tones:
        b.append(tone, make_rest_to_rest_move(dx, T))
        b.event("move", b.t, tone=tone, dx=dx, duration=T, op=i)
    b.t += T
    b.hold_all()
    b.event("pulse", b.t, **_pulse_params("fs", tr, math.pi, None, False, [], [], i))
    b.t += math.pi / tr.rabi
    b.hold_all()
    for tone in tones:
        b.append(tone, make_rest_to_rest_move(-dx, T))
        b.event("move", b.t, tone=tone, dx=-dx, duration=T, op=i)
    b.t += T
    b.hold_all()
    b.event("pulse", b.t, **_pulse_params("fs", tr, math.pi / 2, None, False, [], [], i))
    b.t += 0.5 * math.pi / tr.rabi
    b.event("local_z", b.t, targets=list(op.targets), angle=angle, displacement=dx, op=i)


def _compile_flyby(b, op, i, name):
    anc = op.targets[0]
    data = list(op.targets[1:]) or list(map(int, op.params.get("data", [])))
    v = float(op.params.get("v", FLYBY_VELOCITY))
    if v <= 0:
        raise CompileError("fly-by velocity must be positive", name)
    tones = b.tones_for([anc], i)
    tone = tones[0]
    b.ramp(tones, v, i)
    x_anc, _, _ = b.tone_end(tone)
    xs = [float(b.geo.initial_position(d)[0]) for d in data]
    if not data or min(xs) <= x_anc:
        raise CompileError("fly-by targets must lie ahead of the ancilla", name)
    t0 = b.t
    order = sorted(range(len(data)), key=lambda j: xs[j])
    pitch_margin = 0.5 * (max(xs) - min(xs)) / max(len(xs) - 1, 1) if len(xs) > 1 else 1e-6
    for j in order:
        tc = t0 + (xs[j] - x_anc) / v
        b.event("pulse", tc - RYDBERG_GATE_TIME / 2, transition="rydberg", duration=RYDBERG_GATE_TIME,
                pairs=[[anc, data[j]]], selective=False, flyby=True, velocity=v, op=i)
    b.cruise(tones, (max(xs) - x_anc + pitch_margin) / v)
    b.events.sort(key=lambda e: e["t"])
    b.ramp(tones, -v, i)


def _compile_move(b, op, i, name):
    tones = b.tones_for(op.targets, i)
    if "zone" in op.params:
        zone = b.zones.get(op.params["zone"])
        if zone is None:
            raise CompileError(f"unknown zone {op.params['zone']!r}", name)
        b.ramp(tones, zone.velocity, i)
        b.cruise(tones, float(op.params.get("duration", 0.0)))
        b.ramp(tones, -zone.velocity, i)
        return
    dx = float(op.params["dx"])
    T = float(op.params.get("duration", _move_time(dx, b.lim)))
    if rest_to_rest_jerk(dx, T) > b.lim.jerk * (1 + 1e-9):
        raise CompileError("move exceeds the jerk limit", name)
    if 1.5 * abs(dx) / T > b.lim.v_max * (1 + 1e-9):
        raise CompileError("move exceeds v_max", name)
    for tone in tones:
        b.append(tone, make_rest_to_rest_move(dx, T))
        b.event("move", b.t, tone=tone, dx=dx, duration=T, op=i)
    b.t += T


# validation ----------------------------------------------------------------------------

def _sample_times(schedule, n=400):
    ts = set(np.linspace(0.0, schedule.duration, n).tolist())
    for traj in schedule.x_tones:
        for s in traj.segments:
            ts.update((s.t0, s.t1, s.t0 + s.duration / 2))
    return np.array(sorted(ts))


def validate(schedule: Schedule, limits: Limits | None = None) -> list:
    """Constraint violations of ``schedule`` as a list of ``{event, kind, message}``."""
    limits = limits or Limits()
    out = []
    geo = schedule.geometry
    ts = _sample_times(schedule)
    if schedule.x_tones:
        xs = np.array([[sample(tr, t).x[0] for tr in schedule.x_tones] for t in ts])
        if xs.shape[1] > 1:
            gaps = np.diff(xs, axis=1)
            bad = np.nonzero(gaps.min(axis=1) <= 0)[0]
            if bad.size:
                out.append({"event": -1, "kind": "tone_crossing",
                            "message": f"x-tones cross at t={ts[bad[0]]:.6g} s"})
        # pairwise atom separation (tweezer atoms against everything)
        s = len(geo.static_sites)
        for t_idx, t in enumerate(ts):
            pos = np.array([schedule.atom_state(a, t)[0] for a in range(geo.n_atoms)])
            if len(pos) < 2:
                break
            d = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
            d[np.arange(len(pos)), np.arange(len(pos))] = np.inf
            d[:s, :s] = np.inf
            if d.min() < limits.min_separation * (1 - 1e-9):
                a, c = np.unravel_index(np.argmin(d), d.shape)
                out.append({"event": -1, "kind": "min_separation",
                            "message": f"atoms {a} and {c} are {d.min():.3g} m apart at t={t:.6g} s"})
                break
        for j, tr in enumerate(schedule.x_tones):
            for seg in tr.segments:
                if abs(seg.jerk()[0]) > limits.jerk * (1 + 1e-6):
                    out.append({"event": -1, "kind": "jerk",
                                "message": f"x-tone {j} exceeds the jerk limit"})
                    break
    for k, e in enumerate(schedule.events):
        p = e["params"]
        if e["type"] != "pulse" or not p.get("selective"):
            continue
        t0, dur = e["t"], p["duration"]
        k_mag = TWO_PI / p["wavelength"]
        zone = schedule.zones.get(p["zone"])
        if zone is not None and abs(zone.detuning - p["detuning"]) > 1e-9 * max(1.0, abs(zone.detuning)):
            out.append({"event": k, "kind": "zone_detuning",
                        "message": f"pulse detuning differs from zone {zone.name!r}"})
        for tone in p["tones"]:
            vs = np.array([sample(schedule.x_tones[tone], t).v[0]
                           for t in np.linspace(t0, t0 + dur, 9)])
            vmean = float(np.mean(vs))
            if vmean == 0 or (vs.max() - vs.min()) > 0.01 * abs(vmean):
                out.append({"event": k, "kind": "velocity_constancy",
                            "message": f"x-tone {tone} velocity not constant during pulse"})
                continue
            if abs(k_mag * vmean - p["detuning"]) > p["rabi"] / 100:
                out.append({"event": k, "kind": "detuning_mismatch",
                            "message": f"x-tone {tone} Doppler shift misses pulse detuning"})
    return out


# crosstalk and architecture comparison ---------------------------------------------------

def crosstalk_events(schedule: Schedule) -> list:
    """Per selective pulse, the spectator infidelity of every non-target atom."""
    out = []
    geo = schedule.geometry
    for k, e in enumerate(schedule.events):
        p = e["params"]
        if e["type"] != "pulse" or not p.get("selective"):
            continue
        tc = e["t"] + p["duration"] / 2
        v_target = np.mean([schedule.atom_state(a, tc)[1][0] for a in p["targets"]])
        t_pi = math.pi / p["rabi"]
        per_atom = {}
        for a in range(geo.n_atoms):
            if a in p["targets"]:
                continue
            dv = abs(v_target - schedule.atom_state(a, tc)[1][0])
            per_atom[a] = float(spectator_pi_pulse_infidelity(dv * t_pi / p["wavelength"]))
        out.append({"event": k, "per_atom": per_atom})
    return out


def crosstalk_report(schedule: Schedule) -> dict:
    """Accumulated spectator infidelity per atom (first-order additive sum)."""
    totals = {a: 0.0 for a in range(schedule.geometry.n_atoms)}
    for ev in crosstalk_events(schedule):
        for a, val in ev["per_atom"].items():
            totals[a] += val
    return totals


def compare_architectures(separation: float, shuttle_time: float, dv: float) -> dict:
    """Spatial-zone shuttle versus a velocity-zone transfer at the same jerk."""
    if separation <= 0 or shuttle_time <= 0 or dv < 0:
        raise InvalidArgumentError("separation and shuttle time must be positive, dv >= 0")
    jerk = rest_to_rest_jerk(separation, shuttle_time)
    t_v, d_v = zone_transfer_cost(dv, jerk)

    def ratio(a, b):
        return math.inf if b == 0 else a / b
    return {"jerk": jerk,
            "spatial": {"time_s": shuttle_time, "distance_m": separation},
            "velocity": {"time_s": t_v, "distance_m": d_v},
            "time_ratio": ratio(shuttle_time, t_v), "distance_ratio": ratio(separation, d_v)}


def comparison_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["metric", "spatial", "velocity", "ratio"])
    w.writerow(["time_s", repr(report["spatial"]["time_s"]), repr(report["velocity"]["time_s"]),
                repr(report["time_ratio"])])
    w.writerow(["distance_m", repr(report["spatial"]["distance_m"]),
                repr(report["velocity"]["distance_m"]), repr(report["distance_ratio"])])
    w.writerow(["jerk_m_s3", repr(report["jerk"]), repr(report["jerk"]), "1.0"])
    return buf.getvalue()


# ready-made layouts ----------------------------------------------------------------------

def flying_ancilla_layout(pitch: float = 4.3e-6, offset: float = 2e-6):
    """Four static data atoms on a row and one tweezer ancilla a row ``offset`` above."""
    geo = ArrayGeometry([(j * pitch, 0.0) for j in range(4)], [-pitch], [offset], [(0, 0)])
    ir = CircuitIR([IROp("prep", (4,)), IROp("flyby_cz", (4, 0, 1, 2, 3), {"v": FLYBY_VELOCITY}),
                    IROp("measure", (4,), {"velocity_selective": True})])
    return ir, geo
