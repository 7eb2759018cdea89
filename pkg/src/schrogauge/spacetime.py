"""Inertial observers on flat Newtonian space-time and Galilean transitions.

Observers are stored relative to a fixed fiducial frame with orthonormal
spatial coordinates.  An observer ``(b, t0, u)`` assigns to an event with
fiducial coordinates ``(Y, T)`` the coordinates

    y = Y - b - (T - t0) * u,    t = T - t0.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np


class DimensionError(ValueError):
    pass


def _vec(x, name: str = "vector") -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {arr.shape}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def _same_dim(*vectors: np.ndarray) -> int:
    dims = {len(v) for v in vectors}
    if len(dims) != 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


@dataclass(frozen=True, eq=False)
class Observer:
    """Inertial frame: spatial offset ``b``, time origin ``t0``, velocity ``u``."""

    b: np.ndarray
    t0: float
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "b", _vec(self.b, "b"))
        object.__setattr__(self, "u", _vec(self.u, "u"))
        object.__setattr__(self, "t0", float(self.t0))
        if len(self.b) < 1:
            raise DimensionError("observer dimension must be >= 1")
        _same_dim(self.b, self.u)

    @classmethod
    def rest(cls, n: int = 1) -> "Observer":
        return cls(np.zeros(n), 0.0, np.zeros(n))

    @property
    def n(self) -> int:
        return len(self.b)

    def coords_of(self, Y, T):
        """Coordinates of the fiducial event ``(Y, T)`` in this frame."""
        Y = np.asarray(Y, dtype=float)
        tau = np.asarray(T, dtype=float) - self.t0
        y = Y - _col(self.b, Y) - tau * _col(self.u, Y)
        return y, tau

    def to_json(self) -> dict[str, Any]:
        return {"n": self.n, "b": self.b.tolist(), "t0": self.t0, "u": self.u.tolist()}

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "Observer":
        obs = cls(obj["b"], obj["t0"], obj["u"])
        if "n" in obj and int(obj["n"]) != obs.n:
            raise DimensionError("declared n does not match vector lengths")
        return obs

    def __eq__(self, other):
        if not isinstance(other, Observer):
            return NotImplemented
        return (self.t0 == other.t0 and np.array_equal(self.b, other.b)
                and np.array_equal(self.u, other.u))

    def __hash__(self):
        return hash((self.t0, self.b.tobytes(), self.u.tobytes()))

    def __repr__(self):
        return f"Observer(b={self.b.tolist()}, t0={self.t0}, u={self.u.tolist()})"


def _col(vec: np.ndarray, like: np.ndarray) -> np.ndarray:
    """Reshape ``vec`` to broadcast against arrays whose first axis is spatial."""
    return vec.reshape((len(vec),) + (1,) * (np.ndim(like) - 1))


@dataclass(frozen=True, eq=False)
class GalileanTransition:
    """The affine change of coordinates ``(y, t) -> (y + w + v (t + t0), t + t0)``."""

    v: np.ndarray
    w: np.ndarray
    t0: float

    def __post_init__(self):
        object.__setattr__(self, "v", _vec(self.v, "v"))
        object.__setattr__(self, "w", _vec(self.w, "w"))
        object.__setattr__(self, "t0", float(self.t0))
        _same_dim(self.v, self.w)

    @classmethod
    def identity(cls, n: int = 1) -> "GalileanTransition":
        return cls(np.zeros(n), np.zeros(n), 0.0)

    @classmethod
    def boost(cls, v: Sequence[float] | float) -> "GalileanTransition":
        v = _vec(v)
        return cls(v, np.zeros_like(v), 0.0)

    @property
    def n(self) -> int:
        return len(self.v)

    def is_identity(self) -> bool:
        return self.t0 == 0.0 and not self.v.any() and not self.w.any()

    def __call__(self, y, t):
        return apply(self, (y, t))

    def to_json(self) -> dict[str, Any]:
        return {"n": self.n, "v": self.v.tolist(), "w": self.w.tolist(), "t0": self.t0}

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "GalileanTransition":
        g = cls(obj["v"], obj["w"], obj["t0"])
        if "n" in obj and int(obj["n"]) != g.n:
            raise DimensionError("declared n does not match vector lengths")
        return g

    def allclose(self, other: "GalileanTransition", atol: float = 1e-12) -> bool:
        return (self.n == other.n and abs(self.t0 - other.t0) <= atol
                and np.allclose(self.v, other.v, rtol=0, atol=atol)
                and np.allclose(self.w, other.w, rtol=0, atol=atol))

    def __eq__(self, other):
        if not isinstance(other, GalileanTransition):
            return NotImplemented
        return (self.t0 == other.t0 and np.array_equal(self.v, other.v)
                and np.array_equal(self.w, other.w))

    def __hash__(self):
        return hash((self.t0, self.v.tobytes(), self.w.tobytes()))

    def __repr__(self):
        return f"GalileanTransition(v={self.v.tolist()}, w={self.w.tolist()}, t0={self.t0})"


def transition_between(a: Observer, b: Observer) -> GalileanTransition:
    """Transition taking ``a``-coordinates of an event to its ``b``-coordinates."""
    _same_dim(a.b, b.b)
    t0 = a.t0 - b.t0
    v = a.u - b.u
    w = a.b - b.b - t0 * a.u
    return GalileanTransition(v, w, t0)


def target_observer(a: Observer, g: GalileanTransition) -> Observer:
    """The observer ``b`` with ``transition_between(a, b) == g``."""
    _same_dim(a.b, g.v)
    t0 = a.t0 - g.t0
    u = a.u - g.v
    b = a.b - g.w - g.t0 * a.u
    return Observer(b, t0, u)


def apply(g: GalileanTransition, p):
    """Map the point ``p = (y, t)``; ``y`` may carry extra trailing sample axes."""
    y, t = p
    y = np.asarray(y, dtype=float)
    if y.ndim == 0:
        y = y.reshape(1)
    if y.shape[0] != g.n:
        raise DimensionError(f"point has dimension {y.shape[0]}, transition {g.n}")
    t = np.asarray(t, dtype=float)
    tt = t + g.t0
    return y + _col(g.w, y) + _col(g.v, y) * tt, tt


def compose(g2: GalileanTransition, g1: GalileanTransition) -> GalileanTransition:
    """``g2 after g1``."""
    _same_dim(g1.v, g2.v)
    return GalileanTransition(g1.v + g2.v, g1.w + g2.w - g1.v * g2.t0, g1.t0 + g2.t0)


def inverse(g: GalileanTransition) -> GalileanTransition:
    return GalileanTransition(-g.v, -g.w - g.v * g.t0, -g.t0)
