import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from schrogauge import symexpr as sx
from schrogauge.gauge import PhysicalConstants, random_observer, strict_transition
from schrogauge.hj import (AdditiveGaugeMap, PhasePoint, additive_transition, exponentiate,
                           free_hamiltonian, hj_residual, hj_residual_report, phase_transform,
                           section_transform)
from schrogauge.spacetime import DimensionError, GalileanTransition, Observer, compose

coord = st.floats(-2, 2, allow_nan=False)


def test_additive_identity_and_boost():
    a = Observer([0.3], 0.1, [0.4])
    A = additive_transition(a, a, [0.4], 1.0)
    y, t, s = A(np.array([1.0]), 2.0, 0.5)
    assert s == pytest.approx(0.5) and np.allclose(y, [1.0]) and t == 2.0
    B = AdditiveGaugeMap(GalileanTransition.boost([1.0]), [0.0], 1.0)
    assert B(np.array([1.0]), 2.0, 0.0)[2] == pytest.approx(2.0)


def test_exponentiate_examples():
    B = AdditiveGaugeMap(GalileanTransition.boost([1.0]), [0.0], 1.0)
    assert exponentiate(B, 1.0).factor(np.array([1.0]), 2.0) == pytest.approx(np.exp(2j))
    I = AdditiveGaugeMap(GalileanTransition.identity(2), [0.0, 0.0], 1.0)
    assert exponentiate(I, 0.5).is_identity()


def test_additive_cocycle_and_exponentiation(rng):
    for n in (1, 3):
        anchor = rng.uniform(-2, 2, n)
        ys, ts = rng.uniform(-2, 2, (n, 30)), rng.uniform(-2, 2, 30)
        for _ in range(50):
            a, b, c = (random_observer(rng, n) for _ in range(3))
            s = rng.uniform(-2, 2, 30)
            ab, bc, ac = (additive_transition(p, q, anchor, 2.0) for p, q in ((a, b), (b, c), (a, c)))
            y1, t1, s1 = ab(ys, ts, s)
            _, _, s2 = bc(y1, t1, s1)
            _, _, s3 = ac(ys, ts, s)
            assert np.max(np.abs(s2 - s3)) <= 1e-10
            S = strict_transition(a, b, anchor, PhysicalConstants(2.0, 0.5))
            assert np.max(np.abs(exponentiate(ab, 0.5).factor(ys, ts) - S.factor(ys, ts))) <= 1e-12


def test_additive_dimension_mismatch():
    with pytest.raises(DimensionError):
        additive_transition(Observer.rest(1), Observer.rest(1), [0.0, 0.0], 1.0)


def test_phase_transform_examples():
    pt = PhasePoint([0.5], 1.0, [0.3], 0.2)
    same = phase_transform(pt, [0.0], [0.0], 0.0, 1.0)
    assert np.allclose(same.p, pt.p) and same.h == pt.h and np.allclose(same.y, pt.y)
    q = phase_transform(PhasePoint([0.0], 0.0, [0.0], 0.0), [2.0], [0.0], 0.0, 1.0)
    assert np.allclose(q.p, [2.0]) and q.h == pytest.approx(2.0)
    assert PhasePoint.from_json(json.loads(json.dumps(q.to_json()))).h == q.h


@given(st.lists(coord, min_size=2, max_size=2), st.lists(coord, min_size=2, max_size=2),
       st.floats(0.5, 3))
def test_phase_transform_preserves_dispersion(p, v, m):
    p = np.array(p)
    pt = PhasePoint([0.1, 0.2], 0.3, p, float(p @ p) / (2 * m))
    q = phase_transform(pt, v, [0.4, -0.1], 0.7, m)
    assert q.h == pytest.approx(float(q.p @ q.p) / (2 * m), abs=1e-12)


@given(*(st.lists(coord, min_size=2, max_size=2) for _ in range(4)), coord, coord)
def test_phase_transform_group_action(v1, w1, v2, w2, t1, t2):
    g1, g2 = GalileanTransition(v1, w1, t1), GalileanTransition(v2, w2, t2)
    pt = PhasePoint([0.3, -1.0], 0.5, [1.0, 0.25], -0.7)
    a = phase_transform(phase_transform(pt, g1.v, g1.w, g1.t0, 1.5), g2.v, g2.w, g2.t0, 1.5)
    g = compose(g2, g1)
    b = phase_transform(pt, g.v, g.w, g.t0, 1.5)
    assert np.allclose(a.y, b.y, atol=1e-10) and np.allclose(a.p, b.p, atol=1e-10)
    assert abs(a.t - b.t) <= 1e-10 and abs(a.h - b.h) <= 1e-10


def _points(n, rng, k=40):
    return rng.uniform(-2, 2, (n, k)), rng.uniform(1, 2, k)


def test_hj_residual_examples(rng):
    m = 2.0
    H = free_hamiltonian(m)
    p0 = [0.7, -1.2]
    plane = sx.parse(f"{p0[0]}*y1 + {p0[1]}*y2 - {(p0[0] ** 2 + p0[1] ** 2) / (2 * m)!r}*t")
    assert hj_residual(plane, H, _points(2, rng), 2) <= 1e-12
    sigma = sx.parse(f"{m}*y1^2/(2*t)")
    assert hj_residual(sigma, H, _points(1, rng), 1) <= 1e-10
    bumped = sigma + 1e-3 * sx.T ** 2
    assert hj_residual(bumped, H, _points(1, rng), 1) >= 1e-3


def test_hj_residual_skips_singular_points():
    sigma = sx.parse("y1^2/(2*t)")
    rep = hj_residual_report(sigma, free_hamiltonian(1.0), (np.array([[1.0, 1.0]]), np.array([0.0, 1.0])))
    assert rep["skipped"] == 1 and rep["max"] <= 1e-12


def test_section_transform_identity_and_solutions(rng):
    sigma = sx.parse("y1^2/(2*t)")
    same = section_transform(sigma, GalileanTransition.identity(1), [0.0], 1.0)
    assert sx.equal(same, sigma)
    H = free_hamiltonian(1.0)
    for _ in range(10):
        g = GalileanTransition(rng.uniform(-2, 2, 1), rng.uniform(-2, 2, 1), rng.uniform(-0.5, 0.5))
        s2 = section_transform(sigma, g, rng.uniform(-2, 2, 1), 1.0)
        ys, ts = _points(1, rng)
        assert hj_residual(s2, H, (ys, ts + g.t0), 1) <= 1e-9


def test_section_differential_follows_phase_transform(rng):
    m = 1.5
    sigma = sx.parse("exp(0.3*y1)*t + y1^2 - 0.2*y2*t^2")
    g = GalileanTransition([0.8, -0.4], [0.3, 1.1], 0.6)
    s2 = section_transform(sigma, g, [0.2, 0.1], m)
    for _ in range(10):
        y, t = rng.uniform(-2, 2, 2), rng.uniform(-2, 2)
        env = {"y1": y[0], "y2": y[1], "t": t}
        p = np.array([complex(sx.evaluate(sx.diff(sigma, f"y{k}"), env)).real for k in (1, 2)])
        h = -complex(sx.evaluate(sx.diff(sigma, "t"), env)).real
        q = phase_transform(PhasePoint(y, t, p, h), g.v, g.w, g.t0, m)
        env2 = {"y1": q.y[0], "y2": q.y[1], "t": q.t}
        p2 = np.array([complex(sx.evaluate(sx.diff(s2, f"y{k}"), env2)).real for k in (1, 2)])
        h2 = -complex(sx.evaluate(sx.diff(s2, "t"), env2)).real
        assert np.allclose(p2, q.p, atol=1e-10) and h2 == pytest.approx(q.h, abs=1e-10)
