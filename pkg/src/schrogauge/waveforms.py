"""Wave exterior calculus on the trivialized principal bundle.

Coordinates are ``(y1, ..., yn, t, r)`` with indices ``0..n+1``.  Wave
functions and the coefficients of wave forms are stored as r-independent
representatives; the factor ``exp(i m r / hbar)`` stays implicit.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from . import symexpr as sx
from .gauge import PhysicalConstants
from .spacetime import GalileanTransition


def _sort_sign(indices: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``indices`` (0 if an index repeats)."""
    if len(set(indices)) != len(indices):
        return 0, ()
    idx = list(indices)
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


class WaveForm:
    """Degree-``k`` form: ``{increasing index tuple: coefficient}``."""

    __slots__ = ("n", "degree", "coeffs")

    def __init__(self, n: int, degree: int, coeffs: Mapping[tuple[int, ...], sx.Expr] | None = None):
        self.n = n
        self.degree = degree
        clean = {}
        for key, c in (coeffs or {}).items():
            key = tuple(key)
            c = sx.as_expr(c)
            if len(key) != degree:
                raise ValueError(f"index {key} does not have length {degree}")
            if any(not 0 <= k < n + 2 for k in key):
                raise ValueError(f"index {key} out of range for n={n}")
            sign, skey = _sort_sign(key)
            if sign == 0 or c.is_zero():
                continue
            c = c if sign > 0 else sx.neg(c)
            clean[skey] = sx.add(clean[skey], c) if skey in clean else c
        self.coeffs = {k: v for k, v in clean.items() if not v.is_zero()}

    @property
    def names(self) -> list[str]:
        return sx.coordinate_names(self.n)

    @classmethod
    def function(cls, n: int, e) -> "WaveForm":
        return cls(n, 0, {(): sx.as_expr(e)})

    @classmethod
    def basis(cls, n: int, *indices: int, coeff=1) -> "WaveForm":
        return cls(n, len(indices), {tuple(indices): sx.as_expr(coeff)})

    @classmethod
    def volume(cls, n: int) -> "WaveForm":
        """``dy1 ^ ... ^ dyn ^ dt ^ dr``."""
        return cls.basis(n, *range(n + 2))

    def coeff(self, *indices: int) -> sx.Expr:
        sign, key = _sort_sign(tuple(indices))
        if sign == 0 or key not in self.coeffs:
            return sx.ZERO
        c = self.coeffs[key]
        return c if sign > 0 else sx.neg(c)

    def __add__(self, other: "WaveForm") -> "WaveForm":
        self._compatible(other)
        merged = dict(self.coeffs)
        for k, c in other.coeffs.items():
            merged[k] = sx.add(merged[k], c) if k in merged else c
        return WaveForm(self.n, self.degree, merged)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f) -> "WaveForm":
        f = sx.as_expr(f)
        return WaveForm(self.n, self.degree, {k: sx.mul(f, c) for k, c in self.coeffs.items()})

    def map_coeffs(self, fn: Callable[[sx.Expr], sx.Expr]) -> "WaveForm":
        return WaveForm(self.n, self.degree, {k: fn(c) for k, c in self.coeffs.items()})

    def _compatible(self, other: "WaveForm"):
        if self.n != other.n or self.degree != other.degree:
            raise ValueError("forms differ in dimension or degree")

    def __str__(self):
        if not self.coeffs:
            return "0"
        names = self.names
        parts = []
        for key in sorted(self.coeffs):
            c = self.coeffs[key]
            cs = sx.to_str(c)
            if isinstance(c, sx.Add) or (" " in cs and key):
                cs = f"({cs})"
            basis = " ∧ ".join("d" + names[k] for k in key)
            parts.append(cs if not key else (basis if cs == "1" else f"{cs} {basis}"))
        return " + ".join(parts)

    def __repr__(self):
        return f"WaveForm(n={self.n}, degree={self.degree}, {self})"


def wedge(a: WaveForm, b: WaveForm) -> WaveForm:
    if a.n != b.n:
        raise ValueError("dimension mismatch")
    out: dict[tuple[int, ...], sx.Expr] = {}
    for ka, ca in a.coeffs.items():
        for kb, cb in b.coeffs.items():
            sign, key = _sort_sign(ka + kb)
            if sign == 0:
                continue
            term = sx.mul(ca, cb) if sign > 0 else sx.neg(sx.mul(ca, cb))
            out[key] = sx.add(out[key], term) if key in out else term
    return WaveForm(a.n, a.degree + b.degree, out)


def exterior_d(w: WaveForm) -> WaveForm:
    """Ordinary coordinate exterior derivative."""
    names = w.names
    out: dict[tuple[int, ...], sx.Expr] = {}
    for key, c in w.coeffs.items():
        for j, name in enumerate(names):
            if j in key:
                continue
            dc = sx.diff(c, name)
            if dc.is_zero():
                continue
            sign, skey = _sort_sign((j,) + key)
            term = dc if sign > 0 else sx.neg(dc)
            out[skey] = sx.add(out[skey], term) if skey in out else term
    return WaveForm(w.n, w.degree + 1, out)


def wave_d(w: WaveForm, consts: PhysicalConstants) -> WaveForm:
    """``d w + (i m / hbar) dr ^ w``."""
    dr = WaveForm.basis(w.n, w.n + 1, coeff=1j * consts.k)
    return exterior_d(w) + wedge(dr, w)


def interior(components, w: WaveForm) -> WaveForm:
    """Contraction ``i_X w`` with vector components over ``(d_y1, ..., d_t, d_r)``."""
    comps = [sx.as_expr(c) for c in components]
    if len(comps) != w.n + 2:
        raise ValueError("component count must be n + 2")
    if w.degree == 0:
        raise ValueError("cannot contract a 0-form")
    out: dict[tuple[int, ...], sx.Expr] = {}
    for key, c in w.coeffs.items():
        for pos, idx in enumerate(key):
            if comps[idx].is_zero():
                continue
            term = sx.mul(comps[idx], c)
            if pos % 2:
                term = sx.neg(term)
            rest = key[:pos] + key[pos + 1:]
            out[rest] = sx.add(out[rest], term) if rest in out else term
    return WaveForm(w.n, w.degree - 1, out)


def forms_equal(a: WaveForm, b: WaveForm, tol: float = 1e-9, seed: int = 0) -> bool:
    return form_deviation(a, b, seed=seed) <= tol


def form_deviation(a: WaveForm, b: WaveForm, seed: int = 0) -> float:
    a._compatible(b)
    keys = set(a.coeffs) | set(b.coeffs)
    return max((sx.deviation(a.coeff(*k), b.coeff(*k), seed=seed) for k in keys), default=0.0)


@dataclass(frozen=True)
class WaveVectorField:
    """``sum f_k d_yk + g d_t + h d_r``."""

    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(sx.as_expr(c) for c in self.components))
        if len(self.components) < 3:
            raise ValueError("a wave vector field needs at least n + 2 = 3 components")

    @classmethod
    def from_parts(cls, f, g, h) -> "WaveVectorField":
        return cls(tuple(f) + (g, h))

    @property
    def n(self) -> int:
        return len(self.components) - 2

    @property
    def f(self) -> tuple:
        return self.components[:-2]

    @property
    def g(self) -> sx.Expr:
        return self.components[-2]

    @property
    def h(self) -> sx.Expr:
        return self.components[-1]

    def derivation(self, e) -> sx.Expr:
        """Action as a plain derivation on functions of ``(y, t, r)``."""
        e = sx.as_expr(e)
        names = sx.coordinate_names(self.n)
        return sx.add(*(sx.mul(c, sx.diff(e, name)) for c, name in zip(self.components, names)))

    def __str__(self):
        names = sx.coordinate_names(self.n)
        parts = [f"({sx.to_str(c)}) d_{nm}" for c, nm in zip(self.components, names)
                 if not c.is_zero()]
        return " + ".join(parts) or "0"


def schrodinger_operator_of_field(X: WaveVectorField, consts: PhysicalConstants):
    """First-order operator ``psi -> sum f_k d_yk psi + g d_t psi + (i m/hbar) h psi``."""
    names = sx.coordinate_names(X.n)

    def D(psi) -> sx.Expr:
        psi = sx.as_expr(psi)
        terms = [sx.mul(X.components[j], sx.diff(psi, names[j])) for j in range(X.n + 1)]
        terms.append(sx.mul(sx.const(1j * consts.k), X.h, psi))
        return sx.add(*terms)

    return D


class Metric:
    """Symmetric ``(n+2) x (n+2)`` matrix of expressions over the coordinate basis."""

    def __init__(self, entries):
        rows = [[sx.as_expr(c) for c in row] for row in entries]
        size = len(rows)
        if size < 3 or any(len(r) != size for r in rows):
            raise ValueError("metric must be a square matrix of size n + 2 >= 3")
        for i in range(size):
            for j in range(i):
                if rows[i][j] != rows[j][i]:
                    raise ValueError(f"metric not symmetric at ({i}, {j})")
        self.entries = tuple(tuple(r) for r in rows)

    @property
    def n(self) -> int:
        return len(self.entries) - 2

    def is_constant(self) -> bool:
        return all(isinstance(c, sx.Const) for row in self.entries for c in row)

    def as_array(self) -> np.ndarray:
        if not self.is_constant():
            raise ValueError("metric has non-constant entries")
        arr = np.array([[c.value for c in row] for row in self.entries])
        if np.all(arr.imag == 0):
            arr = arr.real
        return arr

    def inverse(self) -> "Metric":
        return Metric(np.linalg.inv(self.as_array()).tolist())

    def signature(self) -> tuple[int, int]:
        """Counts of (positive, negative) eigenvalues."""
        ev = np.linalg.eigvalsh(self.as_array())
        return int(np.sum(ev > 0)), int(np.sum(ev < 0))

    def lower(self, X: WaveVectorField) -> WaveForm:
        """The 1-form ``i_X mu``."""
        size = self.n + 2
        return WaveForm(self.n, 1, {
            (j,): sx.add(*(sx.mul(X.components[i], self.entries[i][j]) for i in range(size)))
            for j in range(size)})

    def raise_form(self, w: WaveForm) -> WaveVectorField:
        """Solve ``i_X mu = w`` for a constant metric."""
        if w.degree != 1:
            raise ValueError("need a 1-form")
        inv = self.inverse().entries
        size = self.n + 2
        return WaveVectorField(tuple(
            sx.add(*(sx.mul(inv[i][j], w.coeff(j)) for j in range(size))) for i in range(size)))

    def __str__(self):
        return "[" + ", ".join("[" + ", ".join(sx.to_str(c) for c in row) + "]"
                               for row in self.entries) + "]"


def metric_family(n: int, B=None, C=0.0, D=1.0) -> Metric:
    """``sum dy_k^2 + sum B_k dy_k v dr + C dr^2 + D dt v dr`` (constant coefficients)."""
    size = n + 2
    M = np.zeros((size, size))
    M[:n, :n] = np.eye(n)
    B = np.zeros(n) if B is None else np.asarray(B, dtype=float)
    M[:n, n + 1] = M[n + 1, :n] = B
    M[n + 1, n + 1] = C
    M[n, n + 1] = M[n + 1, n] = D
    return Metric(M.tolist())


def schrodinger_metric(n: int = 1, consts: PhysicalConstants | None = None) -> Metric:
    return metric_family(n)


def schrodinger_volume(n: int) -> WaveForm:
    return WaveForm.volume(n)


def bundle_jacobian(g: GalileanTransition) -> np.ndarray:
    """Jacobian of ``(y, t, r) -> (y + w + (t+t0) v, t + t0, r - <y + w + (t+t0) v/2, v> - const)``."""
    n = g.n
    v = g.v
    J = np.eye(n + 2)
    J[:n, n] = v
    J[n + 1, :n] = -v
    J[n + 1, n] = -0.5 * float(np.dot(v, v))
    return J


def metric_invariance_residual(M: Metric, g: GalileanTransition,
                               consts: PhysicalConstants | None = None) -> float:
    """``max |J^T M J - M|`` for the bundle coordinate change covering ``g``."""
    if M.n != g.n:
        raise ValueError("metric and transition differ in dimension")
    A = M.as_array()
    J = bundle_jacobian(g)
    return float(np.max(np.abs(J.T @ A @ J - A)))


def _reject_r(e: sx.Expr, what: str):
    if "r" in sx.free_vars(e):
        raise sx.ExprError(f"{what} must not depend on r")


def _dim(e: sx.Expr, n: int | None) -> int:
    return n if n is not None else max(1, sx.max_space_index(e))


def wave_gradient(psi, consts: PhysicalConstants, n: int | None = None,
                  metric: Metric | None = None) -> WaveVectorField:
    """Solve ``i_grad mu = d~ psi`` for the wave-gradient."""
    psi = sx.as_expr(psi)
    _reject_r(psi, "wave function")
    n = _dim(psi, n)
    metric = metric or schrodinger_metric(n, consts)
    return metric.raise_form(wave_d(WaveForm.function(n, psi), consts))


def wave_divergence(Y: WaveVectorField, consts: PhysicalConstants) -> sx.Expr:
    """Coefficient of ``div(Y) Omega = d~(i_Y Omega)``."""
    for c in Y.components:
        _reject_r(c, "vector field component")
    vol = schrodinger_volume(Y.n)
    top = wave_d(interior(Y.components, vol), consts)
    return top.coeff(*range(Y.n + 2))


def schrodinger_laplace(psi, consts: PhysicalConstants, n: int | None = None) -> sx.Expr:
    psi = sx.as_expr(psi)
    n = _dim(psi, n)
    return wave_divergence(wave_gradient(psi, consts, n), consts)


def laplace_coordinates(psi, consts: PhysicalConstants, n: int | None = None) -> sx.Expr:
    """``sum d^2 psi / dy_k^2 + (2 i m / hbar) d psi / dt``."""
    psi = sx.as_expr(psi)
    n = _dim(psi, n)
    lap = sx.add(*(sx.diff(sx.diff(psi, f"y{k}"), f"y{k}") for k in range(1, n + 1)))
    return lap + sx.const(2j * consts.k) * sx.diff(psi, "t")


def homogeneous_lift(e, consts: PhysicalConstants) -> sx.Expr:
    """``e * exp(i m r / hbar)``."""
    return sx.mul(sx.as_expr(e), sx.exp(sx.const(1j * consts.k) * sx.R))


def witten_d(w: WaveForm, consts: PhysicalConstants) -> WaveForm:
    """``exp(-i m r/hbar) d(exp(i m r/hbar) w)`` computed with ``r`` explicit."""
    up = w.map_coeffs(lambda c: homogeneous_lift(c, consts))
    down = sx.exp(sx.const(-1j * consts.k) * sx.R)
    return exterior_d(up).scale(down)
