import warnings

import numpy as np
import pytest

from schrogauge import symexpr as sx
from schrogauge.fields import (FieldMismatchError, GridSpec, ResolutionWarning, WaveField,
                               boost_field, decode, encode, fftn, l2_distance, load, sample, save,
                               schrodinger_residual, spectral_shift)
from schrogauge.gauge import (GaugeMap, PhysicalConstants, PlaneWave, compose_gauge,
                              projective_transition, random_observer, strict_transition)
from schrogauge.solver import analytic_free_gaussian
from schrogauge.spacetime import GalileanTransition

SPEC = GridSpec((1024,), (80.0,))
ONE = PhysicalConstants()


def gaussian(spec=SPEC, width=1.0, t=0.0, consts=ONE):
    return sample(f"exp(-y1^2/{2 * width ** 2})", spec, t, consts=consts)


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec((100,), (10.0,))
    with pytest.raises(ValueError):
        GridSpec((4,), (10.0,))
    with pytest.raises(ValueError):
        GridSpec((16,), (-1.0,))
    assert GridSpec((16, 8), (2.0, 1.0)).origin == (-1.0, -0.5)


def test_sample_examples():
    z = sample("0", SPEC)
    assert not z.samples.any() and z.samples.size == 1024
    g = gaussian()
    assert int(np.argmax(np.abs(g.samples))) == 512
    k = 2 * np.pi * 8 / 80.0
    pw = sample(sx.exp(sx.const(1j * k) * sx.y(1)), SPEC)
    spectrum = np.abs(fftn(pw.samples))
    assert np.flatnonzero(spectrum > 1e-8 * spectrum.max()).tolist() == [8]


def test_samples_read_only_and_count():
    f = gaussian()
    with pytest.raises(ValueError):
        f.samples[0] = 1
    with pytest.raises(FieldMismatchError):
        WaveField(SPEC, 0.0, np.zeros(10))


def test_spectral_shift_examples():
    f = gaussian()
    assert np.array_equal(spectral_shift(f, [0.0]).samples, f.samples)
    dx = SPEC.spacing[0]
    assert np.allclose(spectral_shift(f, [dx]).samples, np.roll(f.samples, 1), atol=1e-12)
    half = spectral_shift(f, [dx / 2]).samples
    ref = sample(f"exp(-(y1 - {dx / 2!r})^2/2)", SPEC).samples
    assert np.max(np.abs(half - ref)) <= 1e-8


def test_spectral_shift_composes(rng):
    spec = GridSpec((64, 32), (20.0, 16.0))
    f = sample("exp(-y1^2/2 - y2^2)", spec)
    for _ in range(5):
        d1, d2 = rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2)
        a = spectral_shift(spectral_shift(f, d1), d2)
        b = spectral_shift(f, d1 + d2)
        assert np.max(np.abs(a.samples - b.samples)) <= 1e-10


def test_boost_identity_is_bitwise():
    f = gaussian()
    out = boost_field(GaugeMap.identity(1, ONE), f)
    assert out.samples.tobytes() == f.samples.tobytes()


@pytest.mark.parametrize("consts", [ONE, PhysicalConstants(2.0, 0.5)])
def test_boost_constant_gives_plane_wave(consts):
    spec = GridSpec((256,), (2 * np.pi * 4,))
    f = sample("1", spec, 0.5, consts=consts)
    v = [1.0]
    out = boost_field(projective_transition(GalileanTransition.boost(v), consts), f)
    Y = np.array(np.broadcast_arrays(*spec.mesh()))
    assert np.max(np.abs(out.samples - PlaneWave(v, consts)(Y, out.t))) <= 1e-12


def test_boost_preserves_norm_and_modulus():
    f = gaussian()
    g = GalileanTransition([1.5], [-2.0], 0.7)
    out = boost_field(projective_transition(g, ONE), f)
    assert abs(out.norm() - f.norm()) <= 1e-10
    moved = spectral_shift(f, g.w + g.v * out.t)
    assert np.max(np.abs(np.abs(out.samples) - np.abs(moved.samples))) <= 1e-10
    assert out.t == pytest.approx(0.7)
    assert np.allclose(out.frame.u, -g.v)


def test_boost_respects_strict_cocycle(rng):
    f = gaussian(width=2.0)
    anchor = [0.3]
    for _ in range(5):
        a, b, c = (random_observer(rng, 1, scale=1.0) for _ in range(3))
        T1, T2 = strict_transition(a, b, anchor, ONE), strict_transition(b, c, anchor, ONE)
        two = boost_field(T2, boost_field(T1, f))
        one = boost_field(compose_gauge(T2, T1), f)
        assert np.max(np.abs(two.samples - one.samples)) <= 1e-8


def test_boost_warns_on_wraparound():
    f = gaussian()
    with pytest.warns(ResolutionWarning):
        boost_field(projective_transition(GalileanTransition([0.0], [38.0], 0.0), ONE), f)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        boost_field(projective_transition(GalileanTransition([0.0], [3.0], 0.0), ONE), f)


def test_boost_mismatch_errors():
    with pytest.raises(FieldMismatchError):
        boost_field(projective_transition(GalileanTransition.identity(2), ONE), gaussian())
    with pytest.raises(FieldMismatchError):
        boost_field(projective_transition(GalileanTransition.boost([1.0]), PhysicalConstants(2.0, 1.0)),
                    gaussian())


def test_residual_examples():
    c = PhysicalConstants(2.0, 0.5)
    k = 2 * np.pi * 5 / 80.0
    src = f"exp(i*({k!r}*y1 - {c.hbar * k * k / (2 * c.m)!r}*t))"
    dt = 1e-3
    slices = [sample(src, SPEC, 1.0 + j * dt, consts=c) for j in (-1, 0, 1)]
    assert schrodinger_residual(slices) <= 1e-6
    zero = [sample("0", SPEC, j * dt) for j in (-1, 0, 1)]
    assert schrodinger_residual(zero) == 0.0
    psi = analytic_free_gaussian(1.0)
    slices = [sample(psi, SPEC, 1.0 + j * dt) for j in (-1, 0, 1)]
    assert schrodinger_residual(slices) <= 1e-5


def test_residual_requires_uniform_times():
    fs = [sample("1", SPEC, t) for t in (0.0, 0.1, 0.3)]
    with pytest.raises(FieldMismatchError):
        schrodinger_residual(fs)


def test_l2_distance_examples():
    f = gaussian()
    assert l2_distance(f, f) == 0.0
    assert l2_distance(f, f.with_samples(-f.samples)) == pytest.approx(2 * f.norm())
    spec = GridSpec((2048,), (200.0,))
    g = sample("exp(-y1^2/2)", spec)
    g = g.with_samples(g.samples / g.norm())
    assert l2_distance(g, spectral_shift(g, [100.0])) == pytest.approx(np.sqrt(2), abs=1e-10)
    with pytest.raises(FieldMismatchError):
        l2_distance(f, gaussian(t=1.0))


def test_file_roundtrip_bit_exact(tmp_path):
    spec = GridSpec((16, 8), (4.0, 2.0))
    f = sample("exp(-y1^2 - i*y2)*(1 + y1)", spec, 0.25, random_observer(np.random.default_rng(0), 2),
               PhysicalConstants(2.0, 0.5))
    p = tmp_path / "f.schwf"
    save(f, p)
    data = p.read_bytes()
    assert data[:8] == b"SCHWF001"
    g = load(p)
    assert g.samples.tobytes() == f.samples.tobytes()
    assert g.t == f.t and g.frame == f.frame and g.consts == f.consts and g.spec == f.spec
    assert encode(g) == data
    # y1 runs fastest in the payload
    payload = np.frombuffer(data[-16 * 128:], dtype="<c16")
    assert payload[1] == f.samples[1, 0]


def test_decode_rejects_garbage():
    with pytest.raises(ValueError):
        decode(b"NOTAFILE" + bytes(16))
    good = encode(gaussian())
    with pytest.raises(ValueError):
        decode(good[:-16])


def test_fft_independent_of_thread_count(monkeypatch):
    spec = GridSpec((32, 32, 32), (10.0,))
    f = sample("exp(-y1^2 - y2^2/2 - y3^2/3)", spec)
    monkeypatch.setenv("SCHRO_THREADS", "1")
    a = spectral_shift(f, [0.3, -0.2, 0.1]).samples
    monkeypatch.setenv("SCHRO_THREADS", "4")
    b = spectral_shift(f, [0.3, -0.2, 0.1]).samples
    assert a.tobytes() == b.tobytes()
