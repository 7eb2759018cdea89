import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from schrogauge.spacetime import (DimensionError, GalileanTransition, Observer, apply, compose,
                                  inverse, target_observer, transition_between)

coord = st.floats(-2, 2, allow_nan=False)


def transitions(n=1):
    vec = st.lists(coord, min_size=n, max_size=n)
    return st.builds(GalileanTransition, vec, vec, coord)


def observers(n=1):
    vec = st.lists(coord, min_size=n, max_size=n)
    return st.builds(Observer, vec, coord, vec)


def close(g, v, w, t0):
    return np.allclose(g.v, v, atol=1e-12) and np.allclose(g.w, w, atol=1e-12) and abs(g.t0 - t0) < 1e-12


def test_transition_between_same_observer_is_identity():
    a = Observer([0.3], 1.2, [-0.7])
    assert transition_between(a, a).is_identity()


def test_transition_between_pure_boost():
    a = Observer.rest(1)
    b = Observer([0.0], 0.0, [1.0])
    g = transition_between(a, b)
    y, t = apply(g, (np.array([2.0]), 3.0))
    assert np.allclose(y, [-1.0]) and t == 3.0


def test_transition_between_offset_observers():
    g = transition_between(Observer([0.0], 0.0, [0.0]), Observer([1.0], 0.0, [0.0]))
    assert close(g, [0.0], [-1.0], 0.0)


def test_transition_maps_coordinates_of_same_event(rng):
    for _ in range(50):
        a = Observer(rng.uniform(-2, 2, 3), rng.uniform(-2, 2), rng.uniform(-2, 2, 3))
        b = Observer(rng.uniform(-2, 2, 3), rng.uniform(-2, 2), rng.uniform(-2, 2, 3))
        Y, T = rng.uniform(-2, 2, (3, 7)), rng.uniform(-2, 2, 7)
        ya, ta = a.coords_of(Y, T)
        yb, tb = b.coords_of(Y, T)
        y2, t2 = apply(transition_between(a, b), (ya, ta))
        assert np.allclose(y2, yb, atol=1e-12) and np.allclose(t2, tb, atol=1e-12)


@pytest.mark.parametrize("g, p, expected", [
    (GalileanTransition.identity(1), ([0.4], -1.5), ([0.4], -1.5)),
    (GalileanTransition([1.0], [0.0], 0.0), ([0.0], 2.0), ([2.0], 2.0)),
    (GalileanTransition([1.0], [1.0], 1.0), ([0.0], 0.0), ([2.0], 1.0)),
])
def test_apply_examples(g, p, expected):
    y, t = apply(g, (np.array(p[0]), p[1]))
    assert np.allclose(y, expected[0]) and t == pytest.approx(expected[1])


def test_compose_examples():
    g = GalileanTransition([1.0], [0.0], 1.0)
    assert close(compose(GalileanTransition.identity(1), g), [1.0], [0.0], 1.0)
    assert close(compose(GalileanTransition.identity(1), g), g.v, g.w, g.t0)
    # the shift t0 = 1 followed by the boost v = 1 sends (y, t) to (y + t + 1, t + 1),
    # i.e. y + w + v (t + t0) with w = 0
    g12 = compose(GalileanTransition([1.0], [0.0], 0.0), GalileanTransition([0.0], [0.0], 1.0))
    assert close(g12, [1.0], [0.0], 1.0)


def test_inverse_examples():
    assert inverse(GalileanTransition.identity(2)).is_identity()
    assert close(inverse(GalileanTransition([1.0], [0.0], 0.0)), [-1.0], [0.0], 0.0)
    # (y, t) -> (y + 2 + (t + 3), t + 3) is undone by (y, t) -> (y - 5 - (t - 3), t - 3)
    assert close(inverse(GalileanTransition([1.0], [2.0], 3.0)), [-1.0], [-5.0], -3.0)


@given(transitions(2), transitions(2))
def test_compose_matches_sequential_apply(g2, g1):
    rng = np.random.default_rng(0)
    y, t = rng.uniform(-2, 2, (2, 100)), rng.uniform(-2, 2, 100)
    a = apply(compose(g2, g1), (y, t))
    b = apply(g2, apply(g1, (y, t)))
    assert np.allclose(a[0], b[0], atol=1e-12) and np.allclose(a[1], b[1], atol=1e-12)


@given(transitions(3))
def test_inverse_and_identity_laws(g):
    assert compose(g, inverse(g)).allclose(GalileanTransition.identity(3))
    assert compose(inverse(g), g).allclose(GalileanTransition.identity(3))
    assert compose(GalileanTransition.identity(3), g).allclose(g)


def test_associativity_random_triples(rng):
    for _ in range(500):
        g1, g2, g3 = (GalileanTransition(rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2),
                                         rng.uniform(-2, 2)) for _ in range(3))
        assert compose(g3, compose(g2, g1)).allclose(compose(compose(g3, g2), g1))


@given(observers(2), observers(2), observers(2))
def test_transition_cocycle(a, b, c):
    assert transition_between(a, c).allclose(
        compose(transition_between(b, c), transition_between(a, b)))


@given(observers(2), transitions(2))
def test_target_observer_roundtrip(a, g):
    assert transition_between(a, target_observer(a, g)).allclose(g)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        transition_between(Observer.rest(1), Observer.rest(3))
    with pytest.raises(DimensionError):
        GalileanTransition([1.0, 0.0], [0.0], 0.0)
    with pytest.raises(DimensionError):
        compose(GalileanTransition.identity(1), GalileanTransition.identity(2))


def test_json_roundtrip():
    g = GalileanTransition([1.0, -0.5], [0.25, 2.0], 0.125)
    obj = json.loads(json.dumps(g.to_json()))
    assert set(obj) == {"n", "v", "w", "t0"}
    assert GalileanTransition.from_json(obj) == g
    o = Observer([1.0], 2.0, [3.0])
    assert Observer.from_json(json.loads(json.dumps(o.to_json()))) == o
