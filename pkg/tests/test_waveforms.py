import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schrogauge import symexpr as sx
from schrogauge import waveforms as wf
from schrogauge.gauge import PhysicalConstants
from schrogauge.spacetime import GalileanTransition
from schrogauge.verify import random_expr, random_form

ONE = PhysicalConstants()
y1, t, r = sx.y(1), sx.T, sx.R
# coordinate indices for n = 1: y1 -> 0, t -> 1, r -> 2


def fn(e, n=1):
    return wf.WaveForm.function(n, sx.as_expr(e))


def field(*components):
    return wf.WaveVectorField(tuple(sx.as_expr(c) for c in components))


def test_wave_d_examples():
    assert wf.forms_equal(wf.wave_d(fn(1), ONE), wf.WaveForm.basis(1, 2, coeff=sx.I))
    expected = wf.WaveForm.basis(1, 0) + wf.WaveForm.basis(1, 2, coeff=sx.I * y1)
    assert wf.forms_equal(wf.wave_d(fn(y1), ONE), expected)
    w = wf.WaveForm.basis(1, 2, coeff=y1)
    assert wf.forms_equal(wf.wave_d(w, ONE), wf.WaveForm.basis(1, 0, 2))
    assert str(wf.wave_d(w, ONE)) == "dy1 ∧ dr"


def test_wave_d_constant_scales_with_constants():
    c = PhysicalConstants(2.0, 0.5)
    assert wf.forms_equal(wf.wave_d(fn(1), c), wf.WaveForm.basis(1, 2, coeff=sx.const(4j)))


def test_wedge_graded_antisymmetry(rng):
    for _ in range(20):
        a = random_form(rng, 2, int(rng.integers(0, 3)))
        b = random_form(rng, 2, int(rng.integers(0, 3)))
        sign = (-1) ** (a.degree * b.degree)
        assert wf.forms_equal(wf.wedge(a, b), wf.wedge(b, a).scale(sign))


def test_form_rejects_bad_keys():
    with pytest.raises(ValueError):
        wf.WaveForm(1, 2, {(0,): sx.ONE})
    with pytest.raises(ValueError):
        wf.WaveForm(1, 1, {(5,): sx.ONE})


def test_dtilde_squared_zero(rng):
    for k in range(60):
        n = 1 + k % 2
        w = random_form(rng, n, int(rng.integers(0, n + 3)))
        dd = wf.wave_d(wf.wave_d(w, ONE), ONE)
        assert all(sx.equal(c, 0) for c in dd.coeffs.values())


def test_operator_of_field_examples():
    assert sx.equal(wf.schrodinger_operator_of_field(field(0, 0, 1), ONE)(sx.ONE), sx.I)
    assert sx.equal(wf.schrodinger_operator_of_field(field(1, 0, 0), ONE)(y1 * y1), 2 * y1)
    assert sx.equal(wf.schrodinger_operator_of_field(field(0, 1, 0), ONE)(y1), 0)


def test_operator_correspondence(rng):
    for m, hbar in ((1.0, 1.0), (2.0, 0.5)):
        c = PhysicalConstants(m, hbar)
        for _ in range(10):
            X = field(*(random_expr(rng, ["y1", "t"]) for _ in range(3)))
            psi = random_expr(rng, ["y1", "t"])
            lhs = wf.schrodinger_operator_of_field(X, c)(psi) * sx.exp(sx.const(1j * c.k) * r)
            assert sx.equal(lhs, X.derivation(wf.homogeneous_lift(psi, c)))


def test_metric_examples():
    M = wf.schrodinger_metric(1, ONE)
    A = M.as_array()
    assert np.array_equal(A, [[1, 0, 0], [0, 0, 1], [0, 1, 0]])
    assert np.array_equal(np.linalg.inv(A), A)
    assert M.signature() == (2, 1)
    assert wf.schrodinger_metric(3).signature() == (4, 1)
    assert wf.metric_invariance_residual(M, GalileanTransition.identity(1)) == 0


def test_metric_invariance_and_perturbations(rng):
    for n in (1, 3):
        M = wf.schrodinger_metric(n)
        for _ in range(30):
            g = GalileanTransition(rng.uniform(-2, 2, n), rng.uniform(-2, 2, n), rng.uniform(-2, 2))
            assert wf.metric_invariance_residual(M, g) <= 1e-12
    P = wf.metric_family(1, B=[1e-3])
    assert wf.metric_invariance_residual(P, GalileanTransition.boost([1.0])) >= 1e-4


def test_gradient_examples():
    G = wf.wave_gradient(sx.ONE, ONE, 1)
    assert [sx.equal(a, b) for a, b in zip(G.components, (0, sx.I, 0))] == [True] * 3
    c = PhysicalConstants(2.0, 0.5)
    G = wf.wave_gradient(y1 * y1, c, 1)
    for a, b in zip(G.components, (2 * y1, sx.const(1j * c.k) * y1 * y1, 0)):
        assert sx.equal(a, b)
    G = wf.wave_gradient(t, ONE, 1)
    for a, b in zip(G.components, (0, sx.I * t, 1)):
        assert sx.equal(a, b)


def test_divergence_examples():
    assert sx.equal(wf.wave_divergence(field(0, 0, 1), ONE), sx.I)
    assert sx.equal(wf.wave_divergence(field(y1, 0, 0), ONE), 1)
    assert sx.equal(wf.wave_divergence(field(0, 1, 0), ONE), 0)


@pytest.mark.parametrize("m, hbar", [(1.0, 1.0), (2.0, 1.0), (1.0, 0.5)])
def test_laplace_examples(m, hbar):
    c = PhysicalConstants(m, hbar)
    assert sx.equal(wf.schrodinger_laplace(y1 * y1, c, 1), 2)
    assert sx.equal(wf.schrodinger_laplace(t, c, 1), sx.const(2j * c.k))


def test_plane_wave_is_harmonic():
    assert sx.equal(wf.schrodinger_laplace(sx.parse("exp(i*(y1 - t/2))"), ONE, 1), 0)


def test_laplace_rejects_r_dependence():
    with pytest.raises(sx.ExprError):
        wf.schrodinger_laplace(y1 * r, ONE, 1)


@settings(max_examples=25)
@given(st.integers(0, 10_000))
def test_laplace_matches_coordinates(seed):
    rng = np.random.default_rng(seed)
    c = PhysicalConstants(float(rng.choice([1.0, 2.0])), float(rng.choice([1.0, 0.5])))
    psi = random_expr(rng, ["y1", "y2", "t"])
    assert sx.equal(wf.schrodinger_laplace(psi, c, 2), wf.laplace_coordinates(psi, c, 2))


def test_witten_and_gradient_consistency(rng):
    c = PhysicalConstants(2.0, 0.5)
    for _ in range(15):
        w = random_form(rng, 2, int(rng.integers(0, 4)))
        assert wf.forms_equal(wf.wave_d(w, c), wf.witten_d(w, c))
        psi = random_expr(rng, ["y1", "y2", "t"])
        lowered = wf.schrodinger_metric(2).lower(wf.wave_gradient(psi, c, 2))
        assert wf.forms_equal(lowered, wf.wave_d(fn(psi, 2), c))


def test_printing():
    w = wf.WaveForm.basis(1, 0, 2, coeff=2 * y1)
    assert str(w) == "2*y1 dy1 ∧ dr"
    assert str(wf.wave_d(fn(y1), ONE)) == "dy1 + i*y1 dr"
