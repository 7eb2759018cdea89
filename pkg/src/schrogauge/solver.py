"""Strang split-step evolution of ``i hbar psi_t = -(hbar^2/2m) Lap psi + U psi``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import symexpr as sx
from .fields import (WaveField, boost_field, fftn, ifftn, l2_distance, potential_values, sample)
from .gauge import PhysicalConstants, projective_transition
from .spacetime import GalileanTransition


class SolverError(RuntimeError):
    def __init__(self, message: str, step: int):
        self.step = step
        super().__init__(f"{message} (step {step})")


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    steps: int
    potential: sx.Expr | None = None
    scheme: str = "strang"
    save_every: int | None = None
    allow_complex_potential: bool = False

    def __post_init__(self):
        if self.scheme != "strang":
            raise ValueError(f"unsupported scheme {self.scheme!r}")
        if self.dt == 0 or not math.isfinite(self.dt):
            raise ValueError("dt must be finite and non-zero")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if self.save_every is not None and self.save_every <= 0:
            raise ValueError("save_every must be positive")
        if self.potential is not None:
            U = sx.as_expr(self.potential)
            if "r" in sx.free_vars(U):
                raise sx.ExprError("potential must not depend on r")
            object.__setattr__(self, "potential", None if U.is_zero() else U)

    @property
    def total_time(self) -> float:
        return self.dt * self.steps

    def save_steps(self) -> list[int]:
        if self.save_every is None:
            marks = [0, self.steps]
        else:
            marks = list(range(0, self.steps + 1, self.save_every))
            if marks[-1] != self.steps:
                marks.append(self.steps)
        return sorted(set(marks))


def evolve(f0: WaveField, cfg: EvolutionConfig) -> list[WaveField]:
    """Return slices at steps ``cfg.save_steps()`` (the initial field first)."""
    c = f0.consts
    spec = f0.spec
    dt = cfg.dt
    kinetic = np.exp(-1j * c.hbar * spec.k_squared() * dt / (2 * c.m))
    marks = set(cfg.save_steps())
    out = [f0]
    U = cfg.potential
    t0 = f0.t

    if U is None:
        # consecutive free steps never leave Fourier space
        psi_k = fftn(f0.samples)
        for step in range(1, cfg.steps + 1):
            psi_k *= kinetic
            if step in marks:
                psi = ifftn(psi_k)
                _check_finite(psi, step)
                out.append(f0.with_samples(psi, t=t0 + step * dt))
        return out

    time_dependent = "t" in sx.free_vars(U)
    half = None
    psi = f0.samples
    for step in range(1, cfg.steps + 1):
        if half is None or time_dependent:
            t_mid = t0 + (step - 0.5) * dt
            V = potential_values(U, spec, t_mid)
            if not cfg.allow_complex_potential and np.any(V.imag != 0):
                raise ValueError("complex potential requires allow_complex_potential=True")
            if not cfg.allow_complex_potential:
                V = V.real
            half = np.exp(-1j * V * dt / (2 * c.hbar))
        with np.errstate(over="ignore", invalid="ignore"):
            psi = half * ifftn(kinetic * fftn(half * psi))
        _check_finite(psi, step)
        if step in marks:
            out.append(f0.with_samples(psi, t=t0 + step * dt))
    return out


def _check_finite(psi: np.ndarray, step: int):
    if not np.all(np.isfinite(psi)):
        raise SolverError("non-finite values in wave function", step)


def analytic_free_gaussian(sigma: float, center=0.0, velocity=0.0,
                           consts: PhysicalConstants | None = None) -> Callable:
    """Closure ``psi(Y, t)`` for a free Gaussian, boosted by ``velocity``.

    At ``t = 0`` the rest packet is ``exp(-|y - c|^2 / (2 sigma^2))``; the
    moving one is its push-forward by the pure boost, so its centre is at
    ``c + v t`` and it carries the plane-wave factor.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    consts = consts or PhysicalConstants()
    center = np.atleast_1d(np.asarray(center, dtype=float))
    velocity = np.atleast_1d(np.asarray(velocity, dtype=float))
    n = max(len(center), len(velocity))
    center = np.broadcast_to(center, (n,))
    velocity = np.broadcast_to(velocity, (n,))
    k = consts.k

    def psi(Y, t):
        Y = np.asarray(Y, dtype=float)
        if Y.ndim == 0 or (n == 1 and Y.shape[0] != 1):
            Y = Y[None]
        shape = (n,) + (1,) * (Y.ndim - 1)
        t = float(t)
        Ys = Y - velocity.reshape(shape) * t
        s = 1 + 1j * t / (k * sigma ** 2)
        r2 = np.sum((Ys - center.reshape(shape)) ** 2, axis=0)
        rest = s ** (-n / 2) * np.exp(-r2 / (2 * sigma ** 2 * s))
        phase = 1j * k * (np.tensordot(velocity, Y, axes=(0, 0)) - 0.5 * t * np.dot(velocity, velocity))
        return rest * np.exp(phase)

    return psi


def transformed_potential(U: sx.Expr | None, g: GalileanTransition) -> sx.Expr | None:
    """``U`` expressed in the target frame: ``U(inverse(g)(y, t))``."""
    if U is None:
        return None
    back = {f"y{k + 1}": sx.y(k + 1) - float(g.w[k]) - float(g.v[k]) * sx.T for k in range(g.n)}
    back["t"] = sx.T - g.t0
    return sx.subs(sx.as_expr(U), back)


@dataclass
class CovarianceReport:
    distance: float
    relative_distance: float
    norm: float
    gauge_phase: bool
    t_final: float
    steps: int
    analytic_errors: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"distance": self.distance, "relative_distance": self.relative_distance,
                "norm": self.norm, "gauge_phase": self.gauge_phase, "t_final": self.t_final,
                "steps": self.steps, "analytic_errors": dict(self.analytic_errors)}


def covariance_check(f0: WaveField, g: GalileanTransition, cfg: EvolutionConfig,
                     gauge_phase: bool = True, analytic: Callable | None = None) -> CovarianceReport:
    """Compare evolve-then-boost against boost-then-evolve.

    ``analytic``, if given, is the boosted exact solution ``psi(Y, t)`` in the
    target frame; the report then also carries both paths' L2 errors from it.
    """
    T = projective_transition(g, f0.consts)
    last = evolve(f0, EvolutionConfig(cfg.dt, cfg.steps, cfg.potential,
                                      allow_complex_potential=cfg.allow_complex_potential))[-1]
    A = boost_field(T, last, gauge_phase=gauge_phase)
    cfg2 = EvolutionConfig(cfg.dt, cfg.steps, transformed_potential(cfg.potential, g),
                           allow_complex_potential=cfg.allow_complex_potential)
    B = evolve(boost_field(T, f0, gauge_phase=gauge_phase), cfg2)[-1]
    dist = l2_distance(A, B)
    norm = f0.norm()
    report = CovarianceReport(dist, dist / norm if norm else dist, norm, gauge_phase,
                              A.t, cfg.steps)
    if analytic is not None:
        ref = sample(analytic, A.spec, A.t, A.frame, A.consts)
        report.analytic_errors = {"evolve_then_boost": l2_distance(A, ref) / (norm or 1.0),
                                  "boost_then_evolve": l2_distance(B, ref) / (norm or 1.0)}
    return report
