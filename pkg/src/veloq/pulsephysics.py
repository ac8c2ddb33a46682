"""Single-atom light-matter dynamics for atoms moving in tweezers.

Conventions
-----------
Rotating-frame Hamiltonian in the ``(g, e)`` basis, with ``phi(t) = k.x(t) + phase0``::

    H(t) = -detuning |e><e| + rabi/2 (exp(-i phi) |e><g| + h.c.)

An atom at constant velocity ``v`` therefore behaves like a stationary atom with
detuning ``detuning + k.v``; its resonance sits at ``detuning = -k.v``, which is
what :func:`doppler_detuning` returns. An atom moving toward the source (``v``
anti-parallel to ``k``) needs a positive (blue) laser detuning.

With ``detuning = 0`` a pulse of area ``theta`` is
``cos(theta/2) I - i sin(theta/2) [[0, e^{i phi}], [e^{-i phi}, 0]]``, i.e. a
rotation about the equatorial axis ``cos(phi) X - sin(phi) Y``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import curve_fit

from ._core import kernels
from ._kernels_py import NODE_A, NODE_B
from .errors import FitError, InvalidArgumentError, NumericError
from .fitting import fit
from .kinematics import MotionState, Trajectory, make_constant_velocity, make_hold, positions

TWO_PI = 2.0 * math.pi
LAMBDA_CLOCK = 698e-9
LAMBDA_CLOCK_YB = 578e-9
LAMBDA_FS = 17.2e-6
LAMBDA_UV = 317e-9
# three-photon clock route 1S0 -(689 abs)-> 3P1 -(688 abs)-> 3S1 -(679 emit)-> 3P0
LAMBDA_689 = 689e-9
LAMBDA_688 = 688e-9
LAMBDA_679 = 679e-9

MIN_PULSE = 1e-12
STEPS_PER_CYCLE = 200


def wavevector(wavelength: float, direction=(1.0, 0.0)) -> np.ndarray:
    if not wavelength > 0:
        raise InvalidArgumentError(f"wavelength must be positive, got {wavelength}")
    d = np.asarray(direction, dtype=float)
    n = np.linalg.norm(d)
    if n == 0:
        raise InvalidArgumentError("direction must be non-zero")
    return TWO_PI / wavelength * d / n


@dataclass(frozen=True)
class LaserField:
    """A global beam with a rectangular envelope.

    ``start`` and ``duration`` bound the envelope; ``duration=None`` means the
    beam is always on.
    """

    k: np.ndarray
    rabi: float
    detuning: float = 0.0
    phase0: float = 0.0
    start: float = 0.0
    duration: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "k", np.asarray(self.k, dtype=float).reshape(2))
        if self.rabi < 0:
            raise InvalidArgumentError(f"rabi must be >= 0, got {self.rabi}")
        if self.duration is not None and self.duration < 0:
            raise InvalidArgumentError(f"envelope duration must be >= 0, got {self.duration}")

    @classmethod
    def along(cls, wavelength, direction=(1.0, 0.0), **kw) -> "LaserField":
        return cls(wavevector(wavelength, direction), **kw)

    def pulse(self, start: float, duration: float) -> "LaserField":
        return replace(self, start=start, duration=duration)

    @property
    def pi_time(self) -> float:
        return math.pi / self.rabi


@dataclass(frozen=True)
class EffectiveKGeometry:
    """Multi-photon transition; ``beams`` is a list of (wavelength, direction, sign)."""

    beams: tuple

    def k_eff(self) -> np.ndarray:
        k = np.zeros(2)
        for lam, direction, sign in self.beams:
            if sign not in (1, -1):
                raise InvalidArgumentError("beam sign must be +1 (absorb) or -1 (emit)")
            k += sign * wavevector(lam, direction)
        return k

    def effective_wavelength(self) -> float:
        return TWO_PI / float(np.linalg.norm(self.k_eff()))


def three_photon_geometry(axis=(1.0, 0.0), orthogonal=(0.0, 1.0)) -> EffectiveKGeometry:
    """689 and 679 nm beams along ``axis``, 688 nm launched along ``orthogonal``.

    The co-propagating pair nearly cancels, leaving ``k_eff`` close to the
    688 nm wavevector.
    """
    return EffectiveKGeometry(((LAMBDA_689, tuple(axis), 1),
                               (LAMBDA_688, tuple(orthogonal), 1),
                               (LAMBDA_679, tuple(axis), -1)))


@dataclass
class TwoLevelState:
    g: complex = 1.0 + 0j
    e: complex = 0j

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.g, self.e], dtype=np.complex128)

    @classmethod
    def from_vector(cls, vec) -> "TwoLevelState":
        return cls(complex(vec[0]), complex(vec[1]))

    @property
    def p_e(self) -> float:
        return abs(self.e) ** 2

    @property
    def norm(self) -> float:
        return math.sqrt(abs(self.g) ** 2 + abs(self.e) ** 2)


@dataclass(frozen=True)
class ResetParams:
    transfer_prob_per_pulse: float
    n_pulses: int = 3
    wait: float = 40e-6
    decay_branching_to_ground: float = 1.0

    def __post_init__(self):
        for name in ("transfer_prob_per_pulse", "decay_branching_to_ground"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise InvalidArgumentError(f"{name} must lie in [0, 1], got {val}")
        if self.n_pulses < 0:
            raise InvalidArgumentError("n_pulses must be >= 0")


def doppler_detuning(field: LaserField, v) -> float:
    """Atom-frame detuning shift ``-k.v`` in rad/s."""
    return -float(np.dot(field.k, np.asarray(v, dtype=float)))


def spectator_pi_pulse_infidelity(d_over_lambda):
    """Excitation left on a stationary atom by a pulse tuned to a moving one.

    ``d_over_lambda`` is the distance the target travels during its pi-pulse
    in units of the wavelength, so ``detuning / rabi = 2 d / lambda``. The
    result ``(pi^2/4) sinc^2((pi/2) sqrt(1 + (2 d/lambda)^2))`` uses the
    unnormalised ``sinc(x) = sin(x)/x``; its zeros are the exact 2 pi rotations.
    """
    r = np.asarray(d_over_lambda, dtype=float)
    if np.any(r < 0) or np.any(np.isnan(r)):
        raise InvalidArgumentError("d_over_lambda must be >= 0")
    x2 = 1.0 + (2.0 * r) ** 2
    out = np.sin(0.5 * np.pi * np.sqrt(x2)) ** 2 / x2
    out = np.where(r == 0, 1.0, out)
    return float(out) if out.ndim == 0 else out


def spectator_zero(order: int) -> float:
    """``d/lambda`` of the ``order``-th zero, ``sqrt(4 k^2 - 1) / 2``."""
    if order < 1:
        raise InvalidArgumentError(f"order must be >= 1, got {order}")
    return math.sqrt(4 * order * order - 1) / 2.0


def integrated_spectator_infidelity(d_over_lambda: float, rabi: float,
                                    wavelength: float = LAMBDA_CLOCK) -> float:
    """Stationary-atom excitation from integrating a pi pulse tuned to a mover.

    The mover covers ``d_over_lambda`` wavelengths during the pulse; the beam
    sits on its Doppler-shifted resonance, so the stationary atom sees the
    full shift as detuning.
    """
    if d_over_lambda < 0:
        raise InvalidArgumentError("d_over_lambda must be >= 0")
    t_pi = math.pi / rabi
    speed = d_over_lambda * wavelength / t_pi
    field = LaserField.along(wavelength, rabi=rabi, detuning=TWO_PI * speed / wavelength,
                             start=0.0, duration=t_pi)
    u = two_level_propagator(field, make_hold(t_pi), 0.0, t_pi)
    return float(abs(u[1, 0]) ** 2)


def zero_infidelity_velocity(rabi: float, wavelength: float, order: int = 1) -> float:
    """Target speed at which stationary atoms complete exactly ``order`` full turns."""
    if rabi < 0 or not wavelength > 0:
        raise InvalidArgumentError("rabi must be >= 0 and wavelength > 0")
    if order < 1:
        raise InvalidArgumentError(f"order must be >= 1, got {order}")
    return float(math.sqrt(4 * order * order - 1) * rabi * wavelength / TWO_PI)


def _max_doppler(field: LaserField, traj: Trajectory, t0: float, t1: float) -> float:
    ts = np.linspace(t0, t1, 65)
    best = 0.0
    for seg in traj.segments:
        if seg.t1 < t0 or seg.t0 > t1:
            continue
        inside = ts[(ts >= seg.t0) & (ts <= seg.t1)]
        pts = np.concatenate([[max(seg.t0, t0), min(seg.t1, t1)], inside])
        _, v, _ = seg.evaluate(pts)
        best = max(best, float(np.max(np.abs(v @ field.k))))
    if traj.segments and t1 > traj.t_end:
        _, v, _ = traj.segments[-1].evaluate(traj.t_end)
        best = max(best, abs(float(v @ field.k)))
    return best


def _free(detuning: float, dt: float) -> np.ndarray:
    return np.diag([1.0 + 0j, complex(math.cos(detuning * dt), math.sin(detuning * dt))])


def two_level_propagator(field: LaserField, traj: Trajectory, t0: float, t1: float,
                         steps_per_cycle: int = STEPS_PER_CYCLE) -> np.ndarray:
    """2x2 propagator from ``t0`` to ``t1`` for an atom following ``traj``.

    Outside the envelope only the detuning acts. Inside it a fixed-step
    4th-order commutator-free Magnus scheme is used with at least 100 steps
    and ``steps_per_cycle`` steps per generalised Rabi period.
    """
    if t1 < t0:
        raise InvalidArgumentError(f"t1 must be >= t0, got {t0}, {t1}")
    if field.duration is None:
        on0, on1 = t0, t1
    else:
        on0, on1 = max(t0, field.start), min(t1, field.start + field.duration)
    if on1 <= on0 or field.rabi == 0:
        return _free(field.detuning, t1 - t0)
    length = on1 - on0
    if length < MIN_PULSE:
        raise NumericError(f"pulse of {length:.3g} s is below the {MIN_PULSE} s step floor")

    dmax = abs(field.detuning) + _max_doppler(field, traj, on0, on1)
    omega = math.hypot(field.rabi, dmax)
    h_max = min(TWO_PI / (steps_per_cycle * omega), length / 100.0)
    nsteps = int(math.ceil(length / h_max - 1e-9))
    h = length / nsteps
    starts = on0 + h * np.arange(nsteps)
    xa = positions(traj, starts + NODE_A * h)
    xb = positions(traj, starts + NODE_B * h)
    pa = xa @ field.k + field.phase0
    pb = xb @ field.k + field.phase0
    u = kernels.two_level_cf4(float(field.rabi), float(field.detuning), float(h), pa, pb)
    return _free(field.detuning, t1 - on1) @ u @ _free(field.detuning, on0 - t0)


def evolve_two_level(field: LaserField, traj: Trajectory, state: TwoLevelState,
                     t0: float, t1: float, steps_per_cycle: int = STEPS_PER_CYCLE) -> TwoLevelState:
    u = two_level_propagator(field, traj, t0, t1, steps_per_cycle)
    return TwoLevelState.from_vector(u @ state.vector)


def rotation(angle: float, phi: float) -> np.ndarray:
    """Resonant pulse of area ``angle`` with drive phase ``phi`` (see module docstring)."""
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -1j * s * complex(math.cos(phi), math.sin(phi))],
                     [-1j * s * complex(math.cos(phi), -math.sin(phi)), c]], dtype=np.complex128)


def _as_trajectory(motion, t_center: float) -> Trajectory:
    if motion is None:
        return make_hold(0.0, t0=t_center)
    if isinstance(motion, Trajectory):
        return motion
    if isinstance(motion, MotionState):
        x0 = np.asarray(motion.x, dtype=float) - np.asarray(motion.v, dtype=float) * (motion.t - t_center)
        v = np.asarray(motion.v, dtype=float)
        speed = float(np.linalg.norm(v))
        if speed == 0.0:
            return make_hold(0.0, x0=x0, t0=t_center)
        # constant-velocity line through x0 at t_center, valid for one second either side
        return make_constant_velocity(speed, 2.0, direction=v, x0=x0 - v, t0=t_center - 1.0)
    raise InvalidArgumentError(f"unsupported motion {type(motion).__name__}")


def raman_pulse_unitary(field: LaserField, angle: float, motion=None, policy: str = "frozen",
                        t_center: float = 0.0, steps_per_cycle: int = STEPS_PER_CYCLE) -> np.ndarray:
    """Single-qubit unitary of a pulse of area ``angle`` centred at ``t_center``.

    ``policy="frozen"`` evaluates the drive phase at the atom position at the
    pulse centre and ignores the detuning. ``policy="integrate"`` integrates
    the full dynamics of the moving atom with :func:`two_level_propagator`.
    ``motion`` may be ``None`` (atom at the origin), a :class:`MotionState` or
    a :class:`Trajectory`.
    """
    if not 0 < angle <= TWO_PI + 1e-12:
        raise InvalidArgumentError(f"angle must lie in (0, 2 pi], got {angle}")
    traj = _as_trajectory(motion, t_center)
    if policy == "frozen":
        x = positions(traj, np.array([t_center]))[0]
        return rotation(angle, field.phase0 + float(field.k @ x))
    if policy != "integrate":
        raise InvalidArgumentError(f"unknown policy {policy!r}")
    if field.rabi <= 0:
        raise InvalidArgumentError("integrated pulse needs rabi > 0")
    dur = angle / field.rabi
    t0 = t_center - dur / 2
    return two_level_propagator(field.pulse(t0, dur), traj, t0, t0 + dur, steps_per_cycle)


def displacement_phase(k_eff, dx) -> float:
    """Drive-phase change ``k_eff . dx`` picked up by displacing an atom."""
    return float(np.dot(np.asarray(k_eff, dtype=float), np.asarray(dx, dtype=float)))


def dissipative_reset(params: ResetParams) -> float:
    """Ground-state probability after ``n`` pump pulses, each followed by full decay."""
    p = params.transfer_prob_per_pulse * params.decay_branching_to_ground
    return 1.0 - (1.0 - p) ** params.n_pulses


# spectroscopy and Ramsey protocols ------------------------------------------------

def _peak_model(tau):
    def f(delta, amp, center, rabi):
        w2 = rabi * rabi + (delta - center) ** 2
        return amp * rabi * rabi / w2 * np.sin(0.5 * np.sqrt(w2) * tau) ** 2
    return f


def _velocity_vector(field: LaserField, velocity) -> np.ndarray:
    v = np.asarray(velocity, dtype=float)
    if v.ndim == 0:
        return float(v) * field.k / np.linalg.norm(field.k)
    return v.reshape(2)


def excitation_spectrum(template: LaserField, velocity, detunings) -> np.ndarray:
    """Excited population after one pulse of ``template`` versus laser detuning.

    A scalar ``velocity`` is taken along the beam direction; positive values
    move away from the source.
    """
    if template.duration is None or template.duration <= 0:
        raise InvalidArgumentError("template needs a finite pulse duration")
    v = _velocity_vector(template, velocity)
    t0, dur = template.start, template.duration
    speed = float(np.linalg.norm(v))
    traj = (make_constant_velocity(speed, dur, direction=v, t0=t0) if speed > 0
            else make_hold(dur, t0=t0))
    out = np.empty(len(detunings))
    for i, det in enumerate(detunings):
        u = two_level_propagator(replace(template, detuning=float(det)), traj, t0, t0 + dur)
        out[i] = abs(u[1, 0]) ** 2
    return out


def spectroscopy_scan(template: LaserField, velocity, detunings) -> float:
    """Fitted resonance centre (rad/s) of a simulated pulse spectrum.

    Raises :class:`FitError` when no peak is found inside the scanned range.
    """
    det = np.asarray(detunings, dtype=float)
    pe = excitation_spectrum(template, velocity, det)
    i = int(np.argmax(pe))
    if pe[i] < 0.05 or i in (0, len(det) - 1):
        raise FitError("no resonance inside the scanned detuning range")
    model = _peak_model(template.duration)
    try:
        popt, _ = curve_fit(model, det, pe, p0=(pe[i], det[i], template.rabi), maxfev=20000)
    except RuntimeError as exc:
        raise FitError(str(exc)) from exc
    center = float(popt[1])
    if not det[0] <= center <= det[-1]:
        raise FitError("fitted centre lies outside the scanned range")
    return center


def ramsey_displacement_phase(k_eff, displacement, rabi: float, n_phases: int = 16) -> float:
    """Fitted Ramsey fringe phase after moving the atom by ``displacement``.

    The first pi/2 pulse acts at the origin, the second at the displaced
    position while its phase is swept. Both pulses are integrated.
    """
    field = LaserField(np.asarray(k_eff, dtype=float), rabi)
    dur = 0.5 * math.pi / rabi
    first = raman_pulse_unitary(field, math.pi / 2, None, "integrate", t_center=dur / 2)
    here = MotionState(0.0, np.asarray(displacement, dtype=float), np.zeros(2), np.zeros(2))
    phases = np.linspace(0, TWO_PI, n_phases, endpoint=False)
    pe = np.empty(n_phases)
    for i, ph in enumerate(phases):
        u = raman_pulse_unitary(replace(field, phase0=float(ph)), math.pi / 2, here,
                                "integrate", t_center=0.0)
        pe[i] = abs((u @ first)[1, 0]) ** 2
    return fit("sinusoid", phases, pe, freq=1.0)["phase"]


def echo_ramsey_contrast(k_eff, rabi: float, velocity, n_phases: int = 16,
                         policy: str = "integrate") -> float:
    """Fringe contrast of a pi/2 - pi - pi/2 echo whose last pulse acts on a moving atom."""
    field = LaserField(np.asarray(k_eff, dtype=float), rabi)
    v = np.asarray(velocity, dtype=float)
    if v.ndim == 0:
        v = float(v) * field.k / np.linalg.norm(field.k)
    u1 = raman_pulse_unitary(field, math.pi / 2, None, policy)
    u2 = raman_pulse_unitary(field, math.pi, None, policy)
    moving = MotionState(0.0, np.zeros(2), v, np.zeros(2))
    phases = np.linspace(0, TWO_PI, n_phases, endpoint=False)
    pe = np.empty(n_phases)
    for i, ph in enumerate(phases):
        u3 = raman_pulse_unitary(replace(field, phase0=float(ph)), math.pi / 2, moving, policy)
        pe[i] = abs((u3 @ u2 @ u1)[1, 0]) ** 2
    return 2.0 * fit("sinusoid", phases, pe, freq=1.0)["amplitude"]


# curve emission -------------------------------------------------------------------

def write_spectator_curve(path, d_over_lambda) -> None:
    d = np.asarray(d_over_lambda, dtype=float)
    inf = spectator_pi_pulse_infidelity(d)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["d_over_lambda", "infidelity"])
        for a, b in zip(d, np.atleast_1d(inf)):
            w.writerow([repr(float(a)), repr(float(b))])


def write_first_zero_curve(path, rabi_hz, wavelength: float = LAMBDA_CLOCK) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rabi_hz", "v_first_zero_mps"])
        for f in np.asarray(rabi_hz, dtype=float):
            w.writerow([repr(float(f)), repr(zero_infidelity_velocity(TWO_PI * f, wavelength))])
