"""Least-squares fits for the experiment runners.

Models
------
linear          y = slope * x + intercept
sinusoid        y = offset + amplitude * cos(freq * x + phase)
gaussian_decay  y = amplitude * exp(-(x / n0)**2)
rb_decay        y = amplitude * p**x + offset
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .errors import FitError

MODELS = ("linear", "sinusoid", "gaussian_decay", "rb_decay")


@dataclass(frozen=True)
class FitResult:
    model: str
    params: dict
    stderr: dict
    residual_norm: float

    def __getitem__(self, key):
        return self.params[key]


def _linear_lsq(design, ys, names, model):
    coef, _, rank, _ = np.linalg.lstsq(design, ys, rcond=None)
    if rank < design.shape[1]:
        raise FitError(f"{model}: singular design matrix")
    resid = ys - design @ coef
    dof = len(ys) - design.shape[1]
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(design.T @ design)
    err = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return coef, err, cov, float(np.linalg.norm(resid))


def _nonlinear(func, xs, ys, p0, names, model, bounds=(-np.inf, np.inf), sigma=None):
    try:
        popt, pcov = curve_fit(func, xs, ys, p0=p0, bounds=bounds, sigma=sigma, maxfev=20000)
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"{model}: {exc}") from exc
    err = np.sqrt(np.clip(np.diag(pcov), 0.0, None))
    if not np.all(np.isfinite(err)):
        raise FitError(f"{model}: covariance could not be estimated")
    resid = ys - func(xs, *popt)
    return (FitResult(model, dict(zip(names, map(float, popt))),
                      dict(zip(names, map(float, err))), float(np.linalg.norm(resid))))


def _wrap(phase):
    return (phase + math.pi) % (2 * math.pi) - math.pi


def fit(model: str, xs, ys, *, freq: float | None = None, p0=None, sigma=None) -> FitResult:
    """Fit ``ys(xs)`` with one of ``MODELS``.

    For ``sinusoid`` a known ``freq`` makes the fit linear (and exact for
    noiseless data); without it the frequency is seeded from an FFT peak.
    ``sigma`` gives per-point uncertainties for the nonlinear models.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    nparams = {"linear": 2, "sinusoid": 3 if freq is not None else 4,
               "gaussian_decay": 2, "rb_decay": 3}
    if model not in nparams:
        raise FitError(f"unknown model {model!r}")
    if len(xs) != len(ys) or len(xs) < nparams[model] + 1:
        raise FitError(f"{model}: need at least {nparams[model] + 1} points, got {len(xs)}")

    if model == "linear":
        design = np.column_stack([xs, np.ones_like(xs)])
        coef, err, _, rn = _linear_lsq(design, ys, ("slope", "intercept"), model)
        return FitResult(model, {"slope": float(coef[0]), "intercept": float(coef[1])},
                         {"slope": float(err[0]), "intercept": float(err[1])}, rn)

    if model == "sinusoid":
        if freq is None:
            return _sinusoid_free(xs, ys)
        design = np.column_stack([np.ones_like(xs), np.cos(freq * xs), np.sin(freq * xs)])
        coef, err, cov, rn = _linear_lsq(design, ys, None, model)
        c, s = coef[1], coef[2]
        amp = math.hypot(c, s)
        # y = off + c cos + s sin = off + amp cos(f x + phase), phase = atan2(-s, c)
        phase = math.atan2(-s, c)
        if amp > 0:
            j = np.array([c, s]) / amp
            amp_err = math.sqrt(max(j @ cov[1:, 1:] @ j, 0.0))
            jp = np.array([s, -c]) / amp**2
            phase_err = math.sqrt(max(jp @ cov[1:, 1:] @ jp, 0.0))
        else:
            amp_err, phase_err = float(err[1]), math.inf
        return FitResult(model,
                         {"offset": float(coef[0]), "amplitude": amp, "phase": phase,
                          "freq": float(freq)},
                         {"offset": float(err[0]), "amplitude": amp_err, "phase": phase_err,
                          "freq": 0.0}, rn)

    if model == "gaussian_decay":
        def f(x, amplitude, n0):
            return amplitude * np.exp(-(x / n0) ** 2)
        if p0 is None:
            amp0 = float(ys[np.argmin(np.abs(xs))]) or float(np.max(ys))
            target = amp0 / math.e
            below = np.nonzero(ys < target)[0]
            n0 = float(xs[below[0]]) if below.size else float(np.max(np.abs(xs)))
            p0 = (amp0, n0 or 1.0)
        return _nonlinear(f, xs, ys, p0, ("amplitude", "n0"), model, sigma=sigma)

    def g(x, amplitude, p, offset):
        return amplitude * np.power(p, x) + offset
    if p0 is None:
        offset0 = float(np.min(ys)) * 0.5
        p0 = (float(ys[0] - offset0), 0.99, offset0)
    return _nonlinear(g, xs, ys, p0, ("amplitude", "p", "offset"), model,
                      bounds=([-np.inf, 0.0, -np.inf], [np.inf, 1.0 + 1e-9, np.inf]), sigma=sigma)


def _sinusoid_free(xs, ys):
    order = np.argsort(xs)
    xs_s, ys_s = xs[order], ys[order]
    span = xs_s[-1] - xs_s[0]
    if span <= 0:
        raise FitError("sinusoid: degenerate x range")
    n = len(xs_s)
    grid = np.linspace(xs_s[0], xs_s[-1], n)
    yi = np.interp(grid, xs_s, ys_s)
    spec = np.abs(np.fft.rfft(yi - yi.mean()))
    k = int(np.argmax(spec[1:]) + 1)
    f0 = 2 * math.pi * k / (span * n / (n - 1))
    seed = fit("sinusoid", xs, ys, freq=f0)

    def f(x, offset, amplitude, freq, phase):
        return offset + amplitude * np.cos(freq * x + phase)
    res = _nonlinear(f, xs, ys, (seed["offset"], seed["amplitude"], f0, seed["phase"]),
                     ("offset", "amplitude", "freq", "phase"), "sinusoid")
    params = dict(res.params)
    if params["amplitude"] < 0:
        params["amplitude"] = -params["amplitude"]
        params["phase"] += math.pi
    params["phase"] = _wrap(params["phase"])
    return FitResult("sinusoid", params, res.stderr, res.residual_norm)
