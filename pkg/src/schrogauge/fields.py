"""Wave functions sampled on periodic spatial grids.

Samples are held as arrays indexed ``[j1, j2, ...]`` (axis ``k`` is ``y_{k+1}``);
the on-disk layout flattens them with ``y1`` varying fastest.
"""
from __future__ import annotations

import json
import os
import struct
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy.fft

from . import symexpr as sx
from .gauge import GaugeMap, PhysicalConstants
from .spacetime import Observer, target_observer

MAGIC = b"SCHWF001"
FORMAT_VERSION = 1


class ResolutionWarning(UserWarning):
    """Field support approaches the periodic boundary."""


class FieldMismatchError(ValueError):
    pass


def fft_workers() -> int:
    """Worker count from ``SCHRO_THREADS`` (0 or unset: all cores)."""
    raw = os.environ.get("SCHRO_THREADS", "0").strip() or "0"
    k = int(raw)
    return -1 if k <= 0 else k


def fftn(a):
    return scipy.fft.fftn(a, workers=fft_workers())


def ifftn(a):
    return scipy.fft.ifftn(a, workers=fft_workers())


@dataclass(frozen=True)
class GridSpec:
    sizes: tuple
    extents: tuple
    origin: tuple | None = None

    def __post_init__(self):
        sizes = tuple(int(s) for s in np.atleast_1d(self.sizes))
        extents = tuple(float(e) for e in np.atleast_1d(self.extents))
        if len(extents) == 1 and len(sizes) > 1:
            extents = extents * len(sizes)
        if len(sizes) == 1 and len(extents) > 1:
            sizes = sizes * len(extents)
        if len(sizes) != len(extents):
            raise ValueError("sizes and extents differ in length")
        for s in sizes:
            if s < 8 or s & (s - 1):
                raise ValueError(f"grid sizes must be powers of two >= 8, got {s}")
        if any(e <= 0 for e in extents):
            raise ValueError("extents must be positive")
        origin = (tuple(-e / 2 for e in extents) if self.origin is None
                  else tuple(float(o) for o in np.atleast_1d(self.origin)))
        if len(origin) != len(sizes):
            raise ValueError("origin has the wrong length")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "origin", origin)

    @property
    def n(self) -> int:
        return len(self.sizes)

    @property
    def spacing(self) -> tuple:
        return tuple(e / s for e, s in zip(self.extents, self.sizes))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axes(self) -> list[np.ndarray]:
        return [o + d * np.arange(s) for o, d, s in zip(self.origin, self.spacing, self.sizes)]

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing="ij", sparse=True)

    def wavenumbers(self) -> list[np.ndarray]:
        ks = [2 * np.pi * np.fft.fftfreq(s, d=d) for s, d in zip(self.sizes, self.spacing)]
        out = []
        for ax, k in enumerate(ks):
            shape = [1] * self.n
            shape[ax] = len(k)
            out.append(k.reshape(shape))
        return out

    def k_squared(self) -> np.ndarray:
        return sum(k * k for k in self.wavenumbers())

    def to_json(self) -> dict:
        return {"sizes": list(self.sizes), "extents": list(self.extents), "origin": list(self.origin)}


@dataclass(frozen=True, eq=False)
class WaveField:
    spec: GridSpec
    t: float
    samples: np.ndarray
    frame: Observer = None
    consts: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.complex128)
        if arr.shape != self.spec.sizes:
            if arr.size != int(np.prod(self.spec.sizes)):
                raise FieldMismatchError(f"sample count {arr.size} does not match grid {self.spec.sizes}")
            arr = arr.reshape(self.spec.sizes)
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "t", float(self.t))
        if self.frame is None:
            object.__setattr__(self, "frame", Observer.rest(self.spec.n))
        if self.frame.n != self.spec.n:
            raise FieldMismatchError("frame and grid differ in dimension")

    @property
    def n(self) -> int:
        return self.spec.n

    def with_samples(self, samples, **changes) -> "WaveField":
        return replace(self, samples=samples, **changes)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.spec.cell_volume))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.samples)))


def sample(source, spec: GridSpec, t: float = 0.0, frame: Observer | None = None,
           consts: PhysicalConstants | None = None) -> WaveField:
    """Evaluate an expression (in ``y1..yn, t``) or a callable ``f(Y, t)`` on the grid."""
    consts = consts or PhysicalConstants()
    mesh = spec.mesh()
    if isinstance(source, (str, sx.Expr)):
        e = sx.as_expr(source)
        sx.check_vars(e, [f"y{k + 1}" for k in range(spec.n)] + ["t"], "sampled expression")
        env = {f"y{k + 1}": mesh[k] for k in range(spec.n)}
        env["t"] = float(t)
        with np.errstate(all="ignore"):
            vals = sx.evaluate(e, env)
    else:
        vals = source(np.array(np.broadcast_arrays(*mesh)), float(t))
    vals = np.broadcast_to(np.asarray(vals, dtype=np.complex128), spec.sizes)
    if not np.all(np.isfinite(vals)):
        raise sx.EvaluationError("non-finite value at a grid node")
    return WaveField(spec, t, vals, frame, consts)


def spectral_shift(f: WaveField, delta) -> WaveField:
    """Translate periodically: the result samples ``f(y - delta)``."""
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    if len(delta) != f.n:
        raise FieldMismatchError("shift dimension mismatch")
    if not delta.any():
        return f.with_samples(f.samples)
    phase = sum(k * d for k, d in zip(f.spec.wavenumbers(), delta))
    return f.with_samples(ifftn(fftn(f.samples) * np.exp(-1j * phase)))


def _edge_mass(samples: np.ndarray, frac: float = 0.05) -> float:
    peak = np.max(np.abs(samples))
    if peak == 0:
        return 0.0
    worst = 0.0
    for ax, s in enumerate(samples.shape):
        w = max(1, int(s * frac))
        edge = np.concatenate([np.take(samples, range(w), axis=ax).ravel(),
                               np.take(samples, range(s - w, s), axis=ax).ravel()])
        worst = max(worst, float(np.max(np.abs(edge))) / peak)
    return worst


def boost_field(T: GaugeMap, f: WaveField, gauge_phase: bool = True,
                warn_threshold: float = 1e-8) -> WaveField:
    """Push a sampled field forward along ``T``; the output lives at ``f.t + T.g.t0``.

    With ``gauge_phase=False`` only the coordinates are transformed (diagnostic).
    """
    if T.n != f.n:
        raise FieldMismatchError("gauge map and field differ in dimension")
    if T.consts != f.consts:
        raise FieldMismatchError("gauge map and field use different constants")
    frame = target_observer(f.frame, T.g)
    t_out = f.t + T.g.t0
    if T.is_identity():
        return f.with_samples(f.samples, frame=frame)
    delta = T.g.w + T.g.v * t_out
    shifted = spectral_shift(f, delta)
    out = shifted.samples
    if gauge_phase:
        Y = np.array(np.broadcast_arrays(*f.spec.mesh()))
        out = out * np.exp(T.target_exponent(Y, t_out))
    if f.max_abs() > 0 and _edge_mass(shifted.samples) > warn_threshold and _edge_mass(f.samples) <= warn_threshold:
        warnings.warn("boosted field reaches the periodic boundary; wrap-around likely",
                      ResolutionWarning, stacklevel=2)
    return f.with_samples(out, t=t_out, frame=frame)


def spectral_laplacian(f: WaveField) -> np.ndarray:
    return ifftn(-f.spec.k_squared() * fftn(f.samples))


def _check_compatible(a: WaveField, b: WaveField, same_time: bool = True):
    if a.spec != b.spec:
        raise FieldMismatchError("fields live on different grids")
    if same_time and a.t != b.t:
        raise FieldMismatchError(f"fields at different times {a.t} and {b.t}")


def weighted_norm(samples: np.ndarray, spec: GridSpec) -> float:
    return float(np.sqrt(np.sum(np.abs(samples) ** 2) * spec.cell_volume))


def schrodinger_residual(slices, potential=None, rtol_dt: float = 1e-9) -> float:
    """Relative residual of ``(hbar^2/2m) Lap psi + i hbar d_t psi - U psi`` at the middle slice."""
    prev, mid, nxt = slices
    _check_compatible(prev, mid, same_time=False)
    _check_compatible(mid, nxt, same_time=False)
    dt1, dt2 = mid.t - prev.t, nxt.t - mid.t
    if dt1 <= 0 or abs(dt1 - dt2) > rtol_dt * max(abs(dt1), 1.0):
        raise FieldMismatchError(f"slices not uniformly spaced in time: {dt1}, {dt2}")
    dt = 0.5 * (dt1 + dt2)
    norm = mid.norm()
    if norm == 0:
        return 0.0
    c = mid.consts
    res = (c.hbar ** 2 / (2 * c.m)) * spectral_laplacian(mid) \
        + 1j * c.hbar * (nxt.samples - prev.samples) / (2 * dt)
    if potential is not None:
        U = potential_values(sx.as_expr(potential), mid.spec, mid.t)
        res = res - U * mid.samples
    return weighted_norm(res, mid.spec) / norm


def potential_values(U: sx.Expr, spec: GridSpec, t: float):
    sx.check_vars(U, [f"y{k + 1}" for k in range(spec.n)] + ["t"], "potential")
    mesh = spec.mesh()
    env = {f"y{k + 1}": mesh[k] for k in range(spec.n)}
    env["t"] = float(t)
    return np.broadcast_to(np.asarray(sx.evaluate(U, env), dtype=np.complex128), spec.sizes)


def l2_distance(a: WaveField, b: WaveField) -> float:
    _check_compatible(a, b)
    return weighted_norm(a.samples - b.samples, a.spec)


# ------------------------------------------------------------------ file I/O

def encode(f: WaveField) -> bytes:
    header = {
        "version": FORMAT_VERSION,
        "n": f.n,
        "sizes": list(f.spec.sizes),
        "extents": list(f.spec.extents),
        "origin": list(f.spec.origin),
        "t": f.t,
        "frame": f.frame.to_json(),
        "m": f.consts.m,
        "hbar": f.consts.hbar,
    }
    hb = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = np.ascontiguousarray(f.samples.ravel(order="F")).astype("<c16", copy=False).tobytes()
    return MAGIC + struct.pack("<I", len(hb)) + hb + payload


def decode(data: bytes) -> WaveField:
    if data[:8] != MAGIC:
        raise ValueError("not a SCHWF001 file (bad magic)")
    (hlen,) = struct.unpack("<I", data[8:12])
    header = json.loads(data[12:12 + hlen].decode("utf-8"))
    if header.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported SCHWF version {header.get('version')}")
    spec = GridSpec(tuple(header["sizes"]), tuple(header["extents"]), header.get("origin"))
    if header["n"] != spec.n:
        raise ValueError("header dimension does not match sizes")
    count = int(np.prod(spec.sizes))
    payload = data[12 + hlen:]
    if len(payload) != 16 * count:
        raise ValueError(f"payload has {len(payload)} bytes, expected {16 * count}")
    flat = np.frombuffer(payload, dtype="<c16")
    samples = flat.reshape(spec.sizes, order="F")
    return WaveField(spec, header["t"], samples, Observer.from_json(header["frame"]),
                     PhysicalConstants(header["m"], header["hbar"]))


def save(f: WaveField, path) -> None:
    Path(path).write_bytes(encode(f))


def load(path) -> WaveField:
    return decode(Path(path).read_bytes())
