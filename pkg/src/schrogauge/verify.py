"""Named invariant suites run by ``schro verify``.

Every check records the measured value, its bound and the direction of the
comparison, so a report is self-describing.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable

import numpy as np

from . import hj
from . import symexpr as sx
from . import waveforms as wf
from .gauge import (PhysicalConstants, check_cocycle, gauge_invariance_residual, operator_defect,
                    phase_F_expr, projective_family, random_observer, random_points,
                    strict_family, strict_transition, free_schrodinger)
from .spacetime import GalileanTransition

DEFAULT_CONSTS = ((1.0, 1.0), (2.0, 0.5))
LAPLACE_CONSTS = ((1.0, 1.0), (2.0, 1.0), (1.0, 0.5))


@dataclass
class Check:
    name: str
    value: float
    bound: float
    relation: str = "<="

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.value):
            return False
        return self.value <= self.bound if self.relation == "<=" else self.value >= self.bound

    def to_json(self) -> dict:
        return {"name": self.name, "value": self.value, "bound": self.bound,
                "relation": self.relation, "passed": self.passed}

    def summary(self) -> str:
        rel = "≤" if self.relation == "<=" else "≥"
        tag = "ok" if self.passed else "FAIL"
        word = "max" if self.relation == "<=" else "value"
        return f"{self.name}: {word} {self.value:.1e} {rel} {self.bound:.0e}  [{tag}]"


# ------------------------------------------------------------ corpora

def psi_corpus(consts: PhysicalConstants, n: int = 1, k: float = 1.3) -> list[sx.Expr]:
    """Test wave functions: polynomials, a plane wave and a free solution."""
    y1 = sx.y(1)
    kt = consts.hbar * k * k / (2 * consts.m)
    out = [sx.ONE, y1, y1 * y1,
           sx.exp(sx.const(1j * k) * y1),
           sx.exp(sx.const(1j * k) * y1 - sx.const(1j * kt) * sx.T),
           sx.exp(-0.5 * y1 * y1) * sx.T,
           sx.cos(0.7 * y1) * sx.exp(sx.const(0.3j) * sx.T)]
    if n > 1:
        out.append(sx.y(2) * sx.y(n) * sx.exp(sx.const(0.5j) * sx.y(1) - 0.2 * sx.T))
    return out


def random_expr(rng: np.random.Generator, names: list[str], terms: int = 3,
                max_degree: int = 2) -> sx.Expr:
    """Random polynomial times the exponential of a random linear form."""
    poly = []
    for _ in range(terms):
        c = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        mono = [sx.const(c)]
        for name in rng.choice(names, size=rng.integers(0, max_degree + 1)):
            mono.append(sx.Var(str(name)))
        poly.append(sx.mul(*mono))
    lin = sx.add(*(sx.const(complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))) * sx.Var(nm)
                   for nm in names))
    return sx.add(*poly) * sx.exp(lin)


def random_form(rng: np.random.Generator, n: int, degree: int, names: list[str] | None = None,
                density: float = 0.6) -> wf.WaveForm:
    names = names or [f"y{k}" for k in range(1, n + 1)] + ["t"]
    keys = list(combinations(range(n + 2), degree))
    coeffs = {}
    for key in keys:
        if rng.uniform() < density or not coeffs and key == keys[-1]:
            coeffs[key] = random_expr(rng, names, terms=2)
    return wf.WaveForm(n, degree, coeffs)


def random_field(rng: np.random.Generator, n: int) -> wf.WaveVectorField:
    names = [f"y{k}" for k in range(1, n + 1)] + ["t"]
    return wf.WaveVectorField(tuple(random_expr(rng, names, terms=2) for _ in range(n + 2)))


def random_transition(rng: np.random.Generator, n: int, scale: float = 2.0) -> GalileanTransition:
    return GalileanTransition(rng.uniform(-scale, scale, n), rng.uniform(-scale, scale, n),
                              rng.uniform(-scale, scale))


# ------------------------------------------------------------ suites

def suite_cocycle(seed: int = 42, triples: int = 200, points: int = 100,
                  dims=(1, 3), consts_list=DEFAULT_CONSTS, tol: float = 1e-9) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = []
    for n in dims:
        for m, hbar in consts_list:
            c = PhysicalConstants(m, hbar)
            pts = random_points(rng, n, points)
            tag = f"n{n}_m{m:g}_hbar{hbar:g}"
            strict = check_cocycle(strict_family(rng, n, triples, c), pts, "strict")
            proj = check_cocycle(projective_family(rng, n, triples, c), pts, "projective")
            checks += [Check(f"strict_cocycle_{tag}", strict.max_dev, tol),
                       Check(f"projective_phase_stddev_{tag}", proj.phase_stddev, tol),
                       Check(f"projective_coords_{tag}", proj.max_dev, tol),
                       Check(f"projective_nonunit_ratio_{tag}", proj.max_ratio_dev, 1e-6, ">=")]
    return checks


def suite_gauge_invariance(seed: int = 42, velocities: int = 5, tol: float = 1e-8,
                           consts_list=DEFAULT_CONSTS) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = []
    for m, hbar in consts_list:
        c = PhysicalConstants(m, hbar)
        tag = f"m{m:g}_hbar{hbar:g}"
        r_max = d_max = 0.0
        pert = np.inf
        for _ in range(velocities):
            v = rng.uniform(-2, 2, 1)
            F = phase_F_expr(v, c)
            r1, r2 = gauge_invariance_residual(F, None, v, c)
            r_max = max(r_max, sx.deviation(r1, 0), *(sx.deviation(r, 0) for r in r2))
            for psi in psi_corpus(c):
                d_max = max(d_max, sx.deviation(operator_defect(F, psi, v, c), 0))
            Fp = F + 1e-3 * sx.y(1) * sx.y(1)
            p1, p2 = gauge_invariance_residual(Fp, None, v, c)
            pert = min(pert, max(_max_abs(p1), _max_abs(p2[0])))
        checks += [Check(f"F_residuals_{tag}", r_max, tol),
                   Check(f"operator_identity_{tag}", d_max, tol),
                   Check(f"perturbed_F_detected_{tag}", pert, 1e-6, ">=")]
    return checks


def _max_abs(e: sx.Expr, seed: int = 1) -> float:
    rng = np.random.default_rng(seed)
    names = sorted(sx.free_vars(e))
    env = {nm: rng.uniform(-2, 2, 20) for nm in names}
    return float(np.max(np.abs(np.broadcast_to(sx.evaluate(e, env), (20,)))))


def suite_calculus(seed: int = 42, forms: int = 200, instances: int = 100, tol: float = 1e-9,
                   dims=(1, 2)) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = []
    c1 = PhysicalConstants()
    dd = 0.0
    for k in range(forms):
        n = dims[k % len(dims)]
        degree = int(rng.integers(0, n + 3))
        w = random_form(rng, n, degree)
        dd = max(dd, _form_norm(wf.wave_d(wf.wave_d(w, c1), c1)))
    checks.append(Check("dtilde_squared", dd, tol))

    lap = s0 = 0.0
    for m, hbar in LAPLACE_CONSTS:
        c = PhysicalConstants(m, hbar)
        for n in dims:
            corpus = psi_corpus(c, n) + [random_expr(rng, [f"y{j}" for j in range(1, n + 1)] + ["t"])
                                         for _ in range(5)]
            for psi in corpus:
                L = wf.schrodinger_laplace(psi, c, n)
                lap = max(lap, sx.deviation(L, wf.laplace_coordinates(psi, c, n)))
                s0 = max(s0, sx.deviation(sx.const(c.hbar ** 2 / (2 * c.m)) * L,
                                          free_schrodinger(psi, c, n)))
    checks += [Check("laplace_coordinates", lap, tol), Check("laplace_free_schrodinger", s0, tol)]

    opc = wit = grad = 0.0
    for k in range(instances):
        n = dims[k % len(dims)]
        m, hbar = LAPLACE_CONSTS[k % len(LAPLACE_CONSTS)]
        c = PhysicalConstants(m, hbar)
        names = [f"y{j}" for j in range(1, n + 1)] + ["t"]
        X = random_field(rng, n)
        psi = random_expr(rng, names)
        lhs = sx.mul(wf.schrodinger_operator_of_field(X, c)(psi), sx.exp(sx.const(1j * c.k) * sx.R))
        rhs = X.derivation(wf.homogeneous_lift(psi, c))
        opc = max(opc, sx.deviation(lhs, rhs))
        w = random_form(rng, n, int(rng.integers(0, n + 2)))
        wit = max(wit, wf.form_deviation(wf.wave_d(w, c), wf.witten_d(w, c)))
        G = wf.wave_gradient(psi, c, n)
        grad = max(grad, wf.form_deviation(wf.schrodinger_metric(n).lower(G),
                                           wf.wave_d(wf.WaveForm.function(n, psi), c)))
    checks += [Check("operator_correspondence", opc, tol), Check("witten_form", wit, tol),
               Check("gradient_consistency", grad, tol)]
    return checks


def _form_norm(w: wf.WaveForm) -> float:
    return max((sx.deviation(c, 0) for c in w.coeffs.values()), default=0.0)


def suite_metric(seed: int = 42, transitions: int = 100, dims=(1, 3), tol: float = 1e-12,
                 perturb_eps: float | None = None, detect_eps: float = 1e-3) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = []
    for n in dims:
        M = wf.schrodinger_metric(n)
        label = "schrodinger_metric"
        if perturb_eps is not None:
            M = wf.metric_family(n, B=[perturb_eps] + [0.0] * (n - 1))
            label = f"perturbed_metric_eps{perturb_eps:g}"
        res = max(wf.metric_invariance_residual(M, random_transition(rng, n))
                  for _ in range(transitions))
        checks.append(Check(f"{label}_invariance_n{n}", res, tol))
        boost = GalileanTransition.boost([1.0] + [0.0] * (n - 1))
        families = {f"B{k + 1}": wf.metric_family(n, B=np.eye(n)[k] * detect_eps) for k in range(n)}
        families["C"] = wf.metric_family(n, C=detect_eps)
        families["D"] = wf.metric_family(n, D=1 + detect_eps)
        for name, P in families.items():
            boosts = [boost] + [GalileanTransition.boost(np.eye(n)[k]) for k in range(n)]
            res = max(wf.metric_invariance_residual(P, b) for b in boosts)
            checks.append(Check(f"perturbation_{name}_detected_n{n}", res, 1e-4, ">="))
    return checks


def suite_hj(seed: int = 42, triples: int = 200, points: int = 50, dims=(1, 3)) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = []
    add_dev = exp_dev = hj_dev = sec_dev = disp = 0.0
    for n in dims:
        for m, hbar in DEFAULT_CONSTS:
            anchor = rng.uniform(-2, 2, n)
            ys, ts = random_points(rng, n, points)
            for _ in range(triples):
                a, b, c = (random_observer(rng, n) for _ in range(3))
                A_ab = hj.additive_transition(a, b, anchor, m)
                A_bc = hj.additive_transition(b, c, anchor, m)
                A_ac = hj.additive_transition(a, c, anchor, m)
                s = rng.uniform(-2, 2, points)
                y1, t1, s1 = A_ab(ys, ts, s)
                y2, t2, s2 = A_bc(y1, t1, s1)
                y3, t3, s3 = A_ac(ys, ts, s)
                add_dev = max(add_dev, float(np.max(np.abs(s2 - s3))),
                              float(np.max(np.abs(y2 - y3))), float(np.max(np.abs(t2 - t3))))
                G = hj.exponentiate(A_ab, hbar)
                S = strict_transition(a, b, anchor, PhysicalConstants(m, hbar))
                exp_dev = max(exp_dev, float(np.max(np.abs(G.factor(ys, ts) - S.factor(ys, ts)))),
                              float(np.max(np.abs(np.exp(1j * A_ab.shift(ys, ts) / hbar)
                                                  - S.factor(ys, ts)))))
                pt = hj.PhasePoint(rng.uniform(-2, 2, n), rng.uniform(-2, 2),
                                   rng.uniform(-2, 2, n), 0.0)
                pt = hj.PhasePoint(pt.y, pt.t, pt.p, float(np.dot(pt.p, pt.p)) / (2 * m))
                q = hj.phase_transform(pt, A_ab.g.v, A_ab.g.w, A_ab.g.t0, m)
                disp = max(disp, abs(q.h - float(np.dot(q.p, q.p)) / (2 * m)))
            H = hj.free_hamiltonian(m)
            ts_pos = rng.uniform(1, 2, points)
            for sigma in hj_corpus(n, m, rng):
                hj_dev = max(hj_dev, hj.hj_residual(sigma, H, (ys, ts_pos), n))
                for _ in range(5):
                    g = GalileanTransition(rng.uniform(-2, 2, n), rng.uniform(-2, 2, n),
                                           rng.uniform(-0.5, 0.5))
                    s2 = hj.section_transform(sigma, g, rng.uniform(-2, 2, n), m)
                    y_img, t_img = ys, ts_pos + g.t0 + 0.0
                    sec_dev = max(sec_dev, hj.hj_residual(s2, H, (y_img, t_img), n))
    checks += [Check("additive_cocycle", add_dev, 1e-10),
               Check("exponentiate_matches_strict", exp_dev, 1e-12),
               Check("free_hj_solutions", hj_dev, 1e-10),
               Check("section_transform_preserves_hj", sec_dev, 1e-9),
               Check("dispersion_preserved", disp, 1e-12)]
    return checks


def hj_corpus(n: int, m: float, rng: np.random.Generator) -> list[sx.Expr]:
    """Free Hamilton-Jacobi solutions: plane-wave action and ``m |y|^2 / 2t``."""
    p0 = rng.uniform(-2, 2, n)
    plane = sx.add(*(float(p0[k]) * sx.y(k + 1) for k in range(n))) \
        - float(np.dot(p0, p0)) / (2 * m) * sx.T
    r2 = sx.add(*(sx.y(k + 1) * sx.y(k + 1) for k in range(n)))
    return [plane, (m / 2) * r2 / sx.T]


SUITES: dict[str, Callable[..., list[Check]]] = {
    "cocycle": suite_cocycle,
    "gauge-invariance": suite_gauge_invariance,
    "calculus": suite_calculus,
    "metric": suite_metric,
    "hj": suite_hj,
}
