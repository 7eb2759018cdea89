"""Additive (logarithmic) cocycle, phase-space transforms and the Hamilton-Jacobi check."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import symexpr as sx
from .gauge import GaugeMap, PhysicalConstants
from .spacetime import (DimensionError, GalileanTransition, Observer, _vec, apply,
                        transition_between)


@dataclass(frozen=True, eq=False)
class AdditiveGaugeMap:
    """``(y, t, s) -> (g(y, t), s + m(<y + w + (t+t0) v/2, v> + <w - (t0/2) a, a>))``."""

    g: GalileanTransition
    aux_v: np.ndarray
    m: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "aux_v", _vec(self.aux_v, "aux_v"))
        if len(self.aux_v) != self.g.n:
            raise DimensionError("aux_v and transition differ in dimension")
        if self.m <= 0:
            raise ValueError("m must be positive")

    def shift(self, y, t):
        """The additive part evaluated at source coordinates."""
        y = np.asarray(y, dtype=float)
        if y.ndim == 0:
            y = y.reshape(1)
        g, a = self.g, self.aux_v
        t = np.asarray(t, dtype=float)
        first = np.tensordot(g.v, y, axes=(0, 0)) + float(np.dot(g.w, g.v)) \
            + 0.5 * (t + g.t0) * float(np.dot(g.v, g.v))
        return self.m * (first + float(np.dot(g.w - 0.5 * g.t0 * a, a)))

    def __call__(self, y, t, s):
        y2, t2 = apply(self.g, (y, t))
        return y2, t2, s + self.shift(y, t)


def additive_transition(obs_from: Observer, obs_to: Observer, anchor_u, m: float) -> AdditiveGaugeMap:
    g = transition_between(obs_from, obs_to)
    anchor_u = _vec(anchor_u, "anchor_u")
    if len(anchor_u) != g.n:
        raise DimensionError("anchor velocity dimension mismatch")
    return AdditiveGaugeMap(g, anchor_u - obs_from.u, m)


def exponentiate(a: AdditiveGaugeMap, hbar: float) -> GaugeMap:
    """Pass to the U(1) cocycle through ``s -> exp(i s / hbar)``."""
    return GaugeMap(a.g, a.aux_v, PhysicalConstants(a.m, hbar))


@dataclass(frozen=True, eq=False)
class PhasePoint:
    y: np.ndarray
    t: float
    p: np.ndarray
    h: float

    def __post_init__(self):
        object.__setattr__(self, "y", _vec(self.y, "y"))
        object.__setattr__(self, "p", _vec(self.p, "p"))
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "h", float(self.h))
        if len(self.y) != len(self.p):
            raise DimensionError("y and p differ in dimension")

    def to_json(self) -> dict:
        return {"y": self.y.tolist(), "t": self.t, "p": self.p.tolist(), "h": self.h}

    @classmethod
    def from_json(cls, obj) -> "PhasePoint":
        return cls(obj["y"], obj["t"], obj["p"], obj["h"])


def phase_transform(pt: PhasePoint, v, w, t0: float, m: float) -> PhasePoint:
    """Darboux-coordinate transition; ``h = -p_t``."""
    v, w = _vec(v, "v"), _vec(w, "w")
    if not len(v) == len(w) == len(pt.y):
        raise DimensionError("phase point and transition differ in dimension")
    return PhasePoint(pt.y + w + (pt.t + t0) * v, pt.t + t0, pt.p + m * v,
                      pt.h + float(np.dot(pt.p, v)) + 0.5 * m * float(np.dot(v, v)))


def free_hamiltonian(m: float) -> Callable:
    def H(y, t, p):
        p = np.asarray(p)
        return np.sum(p * p, axis=0) / (2 * m)
    return H


def hj_residual(sigma, H: Callable, points, n: int | None = None) -> float:
    """``max |H(y, t, grad_y sigma) + d sigma/dt|`` over ``points = (y, t)``.

    ``y`` has shape ``(n, K)``.  Points where ``sigma`` or its derivatives are
    not finite are skipped; the count is available via :func:`hj_residual_report`.
    """
    return hj_residual_report(sigma, H, points, n)["max"]


def hj_residual_report(sigma, H: Callable, points, n: int | None = None) -> dict:
    sigma = sx.as_expr(sigma)
    ys, ts = points
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    ts = np.asarray(ts, dtype=float)
    n = n or ys.shape[0]
    sx.check_vars(sigma, [f"y{k}" for k in range(1, n + 1)] + ["t"], "sigma")
    env = {f"y{k + 1}": ys[k] for k in range(n)}
    env["t"] = ts
    with np.errstate(all="ignore"):
        grad = np.array([np.broadcast_to(sx.evaluate(sx.diff(sigma, f"y{k}"), env), ts.shape)
                         for k in range(1, n + 1)])
        dt = np.broadcast_to(sx.evaluate(sx.diff(sigma, "t"), env), ts.shape)
        res = np.asarray(H(ys, ts, grad) + dt)
    res = np.broadcast_to(res, ts.shape)
    ok = np.isfinite(res)
    return {"max": float(np.max(np.abs(res[ok]))) if ok.any() else 0.0,
            "points": int(ts.size), "skipped": int(np.sum(~ok))}


def section_transform(sigma, g: GalileanTransition, aux_v, m: float) -> sx.Expr:
    """Push a section forward: ``sigma(g^-1(y, t)) + m(<y - (t/2) v, v> + <w - (t0/2) a, a>)``."""
    sigma = sx.as_expr(sigma)
    a = _vec(aux_v, "aux_v")
    n = g.n
    back = {f"y{k + 1}": sx.y(k + 1) - float(g.v[k]) * sx.T - float(g.w[k]) for k in range(n)}
    back["t"] = sx.T - g.t0
    vv = float(np.dot(g.v, g.v))
    lin = sx.add(*(float(g.v[k]) * sx.y(k + 1) for k in range(n)))
    const = float(np.dot(g.w - 0.5 * g.t0 * a, a))
    return sx.subs(sigma, back) + m * (lin - 0.5 * vv * sx.T + const)
