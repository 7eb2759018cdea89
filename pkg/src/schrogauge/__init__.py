"""Galilean gauge structure of the Schrödinger equation: symbolic checks and a spectral solver."""
from .spacetime import (DimensionError, GalileanTransition, Observer, apply, compose, inverse,
                        target_observer, transition_between)
from .gauge import (GaugeMap, PhysicalConstants, PlaneWave, check_cocycle, compose_gauge,
                    gauge_invariance_residual, phase_F, projective_transition, push_forward,
                    strict_transition)
from .fields import GridSpec, WaveField, boost_field, load, sample, save
from .solver import EvolutionConfig, covariance_check, evolve

__version__ = "0.1.0"

__all__ = [
    "DimensionError", "GalileanTransition", "Observer", "apply", "compose", "inverse",
    "target_observer", "transition_between",
    "GaugeMap", "PhysicalConstants", "PlaneWave", "check_cocycle", "compose_gauge",
    "gauge_invariance_residual", "phase_F", "projective_transition", "push_forward",
    "strict_transition",
    "GridSpec", "WaveField", "boost_field", "load", "sample", "save",
    "EvolutionConfig", "covariance_check", "evolve",
]
