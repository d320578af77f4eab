"""Value <-> phase and weight <-> coupling encodings.

The numeric alphabet of the oscillator network: a real value x is carried
by an oscillator phase

    theta = arctan(x),          x = tan(theta),

and an abstract weight w applied to an input x becomes a coupling strength

    J = w / cos(theta) = w * sqrt(x**2 + 1),

chosen so that J*cos(theta) = w and J*sin(theta) = w*x.  Because tan is
pi-periodic, a phase and its antipode decode to the same value, which is
what makes the two stationary points of the output-phase equation
interchangeable at readout.

All functions accept scalars or ndarrays and are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidValueError, NearSingularPhaseError

__all__ = [
    "SINGULARITY_EPS",
    "EncodedInput",
    "normalize_phase",
    "encode_value",
    "decode_value",
    "encode_coupling",
]

# Guard band around odd multiples of pi/2 where tan overflows.
SINGULARITY_EPS = 1e-9


def _as_float(x):
    arr = np.asarray(x, dtype=np.float64)
    return arr, np.ndim(x) == 0


def _require_finite(arr, what: str):
    if not np.all(np.isfinite(arr)):
        raise InvalidValueError(f"{what} must be finite, got {arr!r}")


def normalize_phase(radians):
    """Map angles to [-pi, pi).

    Values already inside the interval are returned untouched, so the map
    is exactly idempotent even at the representation boundaries.
    """
    arr, scalar = _as_float(radians)
    _require_finite(arr, "phase")
    inside = (arr >= -np.pi) & (arr < np.pi)
    folded = np.mod(arr + np.pi, 2.0 * np.pi) - np.pi
    # A rounding at the modulus boundary can land exactly on +pi.
    folded = np.where(folded >= np.pi, -np.pi, folded)
    out = np.where(inside, arr, folded)
    return float(out) if scalar else out


def encode_value(x):
    """Encode a finite real as a phase, theta = arctan(x).

    The result is strictly inside (-pi/2, pi/2).
    """
    arr, scalar = _as_float(x)
    _require_finite(arr, "value")
    out = np.arctan(arr)
    return float(out) if scalar else out


def decode_value(p):
    """Read a value out of a phase, x = tan(p).

    Works for any phase, not only value-encoding ones: tan is pi-periodic,
    so a settled phase and its antipode decode identically.  Raises
    NearSingularPhaseError within SINGULARITY_EPS of an odd multiple of
    pi/2, where tan is unusable.
    """
    arr, scalar = _as_float(p)
    _require_finite(arr, "phase")
    offset = np.mod(arr - np.pi / 2.0, np.pi)
    dist = np.minimum(offset, np.pi - offset)
    if np.any(dist < SINGULARITY_EPS):
        raise NearSingularPhaseError(
            f"phase within {SINGULARITY_EPS} rad of a tan singularity"
        )
    out = np.tan(arr)
    return float(out) if scalar else out


def encode_coupling(w, x):
    """Encode (weight, value) as (phase, coupling strength).

    Returns (arctan(x), w * sqrt(x**2 + 1)); the pair satisfies
    J*cos(theta) = w and J*sin(theta) = w*x.  Weights of either sign are
    allowed.
    """
    w_arr, w_scalar = _as_float(w)
    x_arr, x_scalar = _as_float(x)
    _require_finite(w_arr, "weight")
    _require_finite(x_arr, "value")
    theta = np.arctan(x_arr)
    coupling = w_arr * np.hypot(x_arr, 1.0)
    if w_scalar and x_scalar:
        return float(theta), float(coupling)
    return theta, coupling


@dataclass(frozen=True)
class EncodedInput:
    """A vector of input phases with their coupling strengths.

    ``couplings[i] * cos(phases[i])`` recovers the abstract weight the
    pair was built from.
    """

    phases: np.ndarray
    couplings: np.ndarray

    def __post_init__(self):
        phases = np.atleast_1d(np.asarray(self.phases, dtype=np.float64))
        couplings = np.atleast_1d(np.asarray(self.couplings, dtype=np.float64))
        if phases.shape != couplings.shape or phases.ndim != 1:
            raise ValueError("phases and couplings must be 1-D and equally long")
        _require_finite(phases, "phases")
        _require_finite(couplings, "couplings")
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "couplings", couplings)

    @classmethod
    def from_weighted_values(cls, weights, values) -> "EncodedInput":
        theta, coupling = encode_coupling(
            np.atleast_1d(weights), np.atleast_1d(values)
        )
        return cls(phases=theta, couplings=coupling)

    def implied_weights(self) -> np.ndarray:
        """The abstract weights w_i = J_i * cos(theta_i)."""
        return self.couplings * np.cos(self.phases)

    def __len__(self) -> int:
        return self.phases.size
