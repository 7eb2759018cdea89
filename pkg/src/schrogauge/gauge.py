"""Phase cocycles of the Galilean transition maps.

A :class:`GaugeMap` acts on ``(y, t, z)`` by the Galilean coordinate change
and multiplies ``z`` by ``exp(E(y, t))`` with the exponent evaluated at the
*source* coordinates::

    E(y, t) = (i m / hbar) * ( <y + w + (t + t0) v / 2, v> + <w - (t0 / 2) a, a> ) + c

where ``(v, w, t0)`` is the transition and ``a`` the velocity of the anchor
class relative to the source observer.  With a fixed anchor these maps form
a strict cocycle; the projective representative drops the constant part.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from . import symexpr as sx
from .spacetime import (DimensionError, GalileanTransition, Observer, _vec, apply,
                        compose, inverse, transition_between)


@dataclass(frozen=True)
class PhysicalConstants:
    m: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.m > 0 and self.hbar > 0):
            raise ValueError(f"m and hbar must be positive, got m={self.m}, hbar={self.hbar}")

    @property
    def k(self) -> float:
        """``m / hbar``."""
        return self.m / self.hbar


@dataclass(frozen=True, eq=False)
class GaugeMap:
    g: GalileanTransition
    aux_v: np.ndarray
    consts: PhysicalConstants = field(default_factory=PhysicalConstants)
    c: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "aux_v", _vec(self.aux_v, "aux_v"))
        object.__setattr__(self, "c", complex(self.c))
        if len(self.aux_v) != self.g.n:
            raise DimensionError("aux_v and transition differ in dimension")

    @classmethod
    def identity(cls, n: int = 1, consts: PhysicalConstants | None = None) -> "GaugeMap":
        return cls(GalileanTransition.identity(n), np.zeros(n), consts or PhysicalConstants())

    @property
    def n(self) -> int:
        return self.g.n

    def is_identity(self) -> bool:
        return self.g.is_identity() and self.c == 0

    def _constant(self) -> float:
        g, a = self.g, self.aux_v
        return float(np.dot(g.w, g.v) + 0.5 * g.t0 * np.dot(g.v, g.v)
                     + np.dot(g.w - 0.5 * g.t0 * a, a))

    def exponent(self, y, t):
        """Exponent at source coordinates; ``y`` has the spatial axis first."""
        y = np.asarray(y, dtype=float)
        if y.ndim == 0:
            y = y.reshape(1)
        v = self.g.v
        lin = np.tensordot(v, y, axes=(0, 0)) + 0.5 * np.asarray(t, dtype=float) * np.dot(v, v)
        return 1j * self.consts.k * (lin + self._constant()) + self.c

    def factor(self, y, t):
        return np.exp(self.exponent(y, t))

    def target_exponent(self, y, t):
        """Exponent expressed in target coordinates, ``E(inverse(g)(y, t))``."""
        ys, ts = apply(inverse(self.g), (y, t))
        return self.exponent(ys, ts)

    def __call__(self, y, t, z=1.0):
        y2, t2 = apply(self.g, (y, t))
        return y2, t2, self.factor(y, t) * z

    def exponent_expr(self, target: bool = False) -> sx.Expr:
        """The exponent as an expression in source (or target) coordinates."""
        n = self.n
        ys = [sx.y(k + 1) for k in range(n)]
        t = sx.T
        if target:
            ys = [ys[k] - float(self.g.w[k]) - float(self.g.v[k]) * t for k in range(n)]
            t = t - self.g.t0
        v = self.g.v
        lin = sx.add(*(float(v[k]) * ys[k] for k in range(n) if v[k] != 0))
        lin = lin + 0.5 * float(np.dot(v, v)) * t + self._constant()
        return sx.const(1j * self.consts.k) * lin + self.c

    def to_json(self) -> dict[str, Any]:
        out = {"g": self.g.to_json(), "aux_v": self.aux_v.tolist(),
               "m": self.consts.m, "hbar": self.consts.hbar}
        if self.c != 0:
            out["c"] = [self.c.real, self.c.imag]
        return out

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "GaugeMap":
        c = obj.get("c", 0)
        c = complex(*c) if isinstance(c, (list, tuple)) else complex(c)
        return cls(GalileanTransition.from_json(obj["g"]), obj["aux_v"],
                   PhysicalConstants(obj["m"], obj["hbar"]), c)

    def __repr__(self):
        return (f"GaugeMap(g={self.g!r}, aux_v={self.aux_v.tolist()}, "
                f"m={self.consts.m}, hbar={self.consts.hbar}, c={self.c})")


def compose_gauge(T2: GaugeMap, T1: GaugeMap) -> GaugeMap:
    """``T2 after T1``, re-expressed with a zero anchor and an adjusted constant."""
    if T1.consts != T2.consts:
        raise ValueError("cannot compose gauge maps with different constants")
    g = compose(T2.g, T1.g)
    n = g.n
    zero = np.zeros(n)
    y0, t0 = apply(T1.g, (zero, 0.0))
    e = T1.exponent(zero, 0.0) + T2.exponent(y0, t0)
    base = GaugeMap(g, zero, T1.consts)
    return GaugeMap(g, zero, T1.consts, complex(e - base.exponent(zero, 0.0)))


def phase_F(v, consts: PhysicalConstants, p) -> complex:
    """Plane-wave exponent ``(i m / hbar)(<v, y> - t |v|^2 / 2)``."""
    v = _vec(v)
    y, t = p
    y = np.asarray(y, dtype=float)
    if y.ndim == 0:
        y = y.reshape(1)
    return 1j * consts.k * (np.tensordot(v, y, axes=(0, 0)) - 0.5 * np.asarray(t) * np.dot(v, v))


def phase_F_expr(v, consts: PhysicalConstants) -> sx.Expr:
    v = _vec(v)
    lin = sx.add(*(float(v[k]) * sx.y(k + 1) for k in range(len(v))))
    return sx.const(1j * consts.k) * (lin - 0.5 * float(np.dot(v, v)) * sx.T)


@dataclass(frozen=True, eq=False)
class PlaneWave:
    """``W_v(y, t) = exp((i m / hbar)(<v, y> - t |v|^2 / 2))``."""

    v: np.ndarray
    consts: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        object.__setattr__(self, "v", _vec(self.v, "v"))

    def __call__(self, y, t):
        return np.exp(phase_F(self.v, self.consts, (y, t)))

    def expr(self) -> sx.Expr:
        return sx.exp(phase_F_expr(self.v, self.consts))


def projective_transition(g: GalileanTransition, consts: PhysicalConstants) -> GaugeMap:
    """Representative of the projective class: factor ``exp((im/hbar)(<y,v> + t|v|^2/2))``."""
    zero = np.zeros(g.n)
    base = GaugeMap(g, zero, consts)
    return GaugeMap(g, zero, consts, -1j * consts.k * base._constant())


def strict_transition(obs_from: Observer, obs_to: Observer, anchor_u,
                      consts: PhysicalConstants) -> GaugeMap:
    g = transition_between(obs_from, obs_to)
    anchor_u = _vec(anchor_u, "anchor_u")
    if len(anchor_u) != g.n:
        raise DimensionError("anchor velocity dimension mismatch")
    return GaugeMap(g, anchor_u - obs_from.u, consts)


def push_forward(T: GaugeMap, psi):
    """Push a wave function forward: ``(y, t) -> exp(E(inverse(g)(y, t))) psi(inverse(g)(y, t))``.

    ``psi`` may be an :class:`~schrogauge.symexpr.Expr` (the result is an
    expression), a callable ``psi(y, t)`` with the spatial axis first, or a
    sampled :class:`~schrogauge.fields.WaveField`.
    """
    from .fields import WaveField, boost_field

    if isinstance(psi, WaveField):
        return boost_field(T, psi)
    if isinstance(psi, (sx.Expr, str)):
        psi = sx.as_expr(psi)
        sx.check_vars(psi, [f"y{k + 1}" for k in range(T.n)] + ["t"], "wave function")
        g = T.g
        back = {f"y{k + 1}": sx.y(k + 1) - float(g.w[k]) - float(g.v[k]) * sx.T
                for k in range(T.n)}
        back["t"] = sx.T - g.t0
        return sx.exp(T.exponent_expr(target=True)) * sx.subs(psi, back)
    ginv = inverse(T.g)

    def pushed(y, t):
        ys, ts = apply(ginv, (y, t))
        return np.exp(T.exponent(ys, ts)) * psi(ys, ts)

    return pushed


# ------------------------------------------------------------- verification

def free_schrodinger(psi: sx.Expr, consts: PhysicalConstants, n: int,
                     potential: sx.Expr | None = None) -> sx.Expr:
    """``(hbar^2/2m) sum_k d^2 psi/dy_k^2 + i hbar d psi/dt - U psi``."""
    lap = sx.add(*(sx.diff(sx.diff(psi, f"y{k}"), f"y{k}") for k in range(1, n + 1)))
    out = sx.const(consts.hbar ** 2 / (2 * consts.m)) * lap + sx.const(1j * consts.hbar) * sx.diff(psi, "t")
    if potential is not None:
        out = out - potential * psi
    return out


def gauge_invariance_residual(F, psi=None, v=None, consts: PhysicalConstants | None = None,
                              n: int | None = None):
    """Residuals of the two conditions on ``F`` for the boost with velocity ``v``.

    Returns ``(r1, [r2_1, ..., r2_n])`` with
    ``r1 = i dF/dt + (hbar/2m)(sum (dF/dy_k)^2 + sum d^2F/dy_k^2)`` and
    ``r2_k = (hbar/m) dF/dy_k - i v_k``.  The wave function does not enter the
    residuals; it is accepted so callers can pass the pair they are checking
    and is validated for the same variable restrictions.
    """
    consts = consts or PhysicalConstants()
    F = sx.as_expr(F)
    v = _vec(v if v is not None else [0.0] * (n or max(1, sx.max_space_index(F))))
    n = n or len(v)
    allowed = [f"y{k}" for k in range(1, n + 1)] + ["t"]
    sx.check_vars(F, allowed, "F")
    if psi is not None:
        sx.check_vars(sx.as_expr(psi), allowed, "psi")
    h_m = consts.hbar / consts.m
    grads = [sx.diff(F, f"y{k}") for k in range(1, n + 1)]
    r1 = (sx.I * sx.diff(F, "t")
          + sx.const(h_m / 2) * sx.add(*(gk * gk + sx.diff(gk, f"y{k + 1}")
                                         for k, gk in enumerate(grads))))
    r2 = [sx.const(h_m) * grads[k] - sx.const(1j * v[k]) for k in range(n)]
    return r1, r2


def operator_defect(F, psi, v, consts: PhysicalConstants, n: int | None = None) -> sx.Expr:
    """``S(e^F psi(y - vt, t)) - e^F (S psi)(y - vt, t)`` for the free operator ``S``."""
    v = _vec(v)
    n = n or len(v)
    F, psi = sx.as_expr(F), sx.as_expr(psi)
    shift = {f"y{k + 1}": sx.y(k + 1) - float(v[k]) * sx.T for k in range(n)}
    moved = sx.subs(psi, shift)
    lhs = free_schrodinger(sx.exp(F) * moved, consts, n)
    rhs = sx.exp(F) * sx.subs(free_schrodinger(psi, consts, n), shift)
    return lhs - rhs


@dataclass
class CocycleReport:
    mode: str
    max_dev: float
    phase_stddev: float
    samples: int
    triples: int
    max_ratio_dev: float = 0.0

    def to_json(self) -> dict[str, Any]:
        return {"mode": self.mode, "max_dev": self.max_dev, "phase_stddev": self.phase_stddev,
                "samples": self.samples, "triples": self.triples,
                "max_ratio_dev": self.max_ratio_dev}

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def check_cocycle(family: Sequence[tuple[GaugeMap, GaugeMap, GaugeMap]], points,
                  mode: str = "strict") -> CocycleReport:
    """Compare ``T_bc after T_ab`` against ``T_ac`` for each triple.

    ``points`` is ``(y, t)`` with ``y`` of shape ``(n, K)``.  In strict mode
    ``max_dev`` is the largest deviation in coordinates or gauge factor; in
    projective mode the factor ratio must be constant and ``phase_stddev``
    is the largest standard deviation of its phase across points.
    """
    if mode not in ("strict", "projective"):
        raise ValueError(f"unknown mode {mode!r}")
    ys, ts = points
    ys = np.asarray(ys, dtype=float)
    ts = np.asarray(ts, dtype=float)
    max_dev = 0.0
    phase_std = 0.0
    ratio_dev = 0.0
    for T_ab, T_bc, T_ac in family:
        y1, t1 = apply(T_ab.g, (ys, ts))
        y2, t2 = apply(T_bc.g, (y1, t1))
        y3, t3 = apply(T_ac.g, (ys, ts))
        coord_dev = max(float(np.max(np.abs(y2 - y3))), float(np.max(np.abs(t2 - t3))))
        composed = T_ab.factor(ys, ts) * T_bc.factor(y1, t1)
        direct = T_ac.factor(ys, ts)
        ratio = composed / direct
        ratio_dev = max(ratio_dev, float(np.max(np.abs(ratio - 1))))
        if mode == "strict":
            max_dev = max(max_dev, coord_dev, float(np.max(np.abs(composed - direct))))
        else:
            max_dev = max(max_dev, coord_dev)
            phase = np.angle(ratio / ratio.flat[0])
            phase_std = max(phase_std, float(np.std(phase)))
    return CocycleReport(mode, max_dev, phase_std, int(ts.size), len(family), ratio_dev)


def random_observer(rng: np.random.Generator, n: int, scale: float = 2.0) -> Observer:
    return Observer(rng.uniform(-scale, scale, n), rng.uniform(-scale, scale),
                    rng.uniform(-scale, scale, n))


def strict_family(rng: np.random.Generator, n: int, count: int, consts: PhysicalConstants,
                  anchor_u=None, scale: float = 2.0):
    """Random triples ``(T_ab, T_bc, T_ac)`` of strict transitions with one anchor."""
    anchor_u = rng.uniform(-scale, scale, n) if anchor_u is None else anchor_u
    out = []
    for _ in range(count):
        a, b, c = (random_observer(rng, n, scale) for _ in range(3))
        out.append((strict_transition(a, b, anchor_u, consts),
                    strict_transition(b, c, anchor_u, consts),
                    strict_transition(a, c, anchor_u, consts)))
    return out


def projective_family(rng: np.random.Generator, n: int, count: int, consts: PhysicalConstants,
                      scale: float = 2.0):
    out = []
    for _ in range(count):
        a, b, c = (random_observer(rng, n, scale) for _ in range(3))
        out.append(tuple(projective_transition(transition_between(p, q), consts)
                         for p, q in ((a, b), (b, c), (a, c))))
    return out


def random_points(rng: np.random.Generator, n: int, count: int, scale: float = 2.0):
    return rng.uniform(-scale, scale, (n, count)), rng.uniform(-scale, scale, count)
