"""Truncated Fock-basis representations of single-mode squeezed vacuum and
coherent states.

These vectors are the brute-force reference that every closed-form kernel in
:mod:`sqkernels.kernels` is checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi
MAX_DEFAULT_CUTOFF = 200


@dataclass(frozen=True)
class SqueezingParam:
    """Squeezing parameter z = r * exp(i*theta).

    ``theta`` is folded into [0, 2*pi) on construction. A negative amplitude is
    rejected instead of being absorbed into the phase.
    """

    r: float
    theta: float = 0.0

    def __post_init__(self):
        r = float(self.r)
        if not math.isfinite(r) or r < 0:
            raise ValueError(f"squeezing amplitude must be finite and >= 0, got {self.r!r}")
        theta = float(self.theta) % TWO_PI
        if theta >= TWO_PI:  # -tiny % 2pi rounds up to 2pi
            theta = 0.0
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta", theta)

    @property
    def z(self) -> complex:
        return self.r * complex(math.cos(self.theta), math.sin(self.theta))


@dataclass(frozen=True)
class CoherentParam:
    """Coherent amplitude alpha = magnitude * exp(i*phase)."""

    magnitude: float
    phase: float = 0.0

    def __post_init__(self):
        m = float(self.magnitude)
        if not math.isfinite(m) or m < 0:
            raise ValueError(f"coherent magnitude must be finite and >= 0, got {self.magnitude!r}")
        object.__setattr__(self, "magnitude", m)
        object.__setattr__(self, "phase", float(self.phase))

    @property
    def alpha(self) -> complex:
        return self.magnitude * complex(math.cos(self.phase), math.sin(self.phase))

    @classmethod
    def from_real(cls, x: float) -> "CoherentParam":
        """Real displacement ``x``, negative values carried by a phase of pi."""
        return cls(abs(x), math.pi if x < 0 else 0.0)


@dataclass(frozen=True, eq=False)
class FockVector:
    """Amplitudes of a single mode in the number basis, n = 0..cutoff."""

    amplitudes: np.ndarray
    cutoff: int = field(init=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError("amplitudes must be a non-empty 1-D sequence")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "cutoff", amps.size - 1)

    def __len__(self):
        return self.amplitudes.size

    def __getitem__(self, n):
        return self.amplitudes[n]

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def _check_cutoff(cutoff) -> int:
    if int(cutoff) != cutoff or cutoff < 0:
        raise ValueError(f"cutoff must be a nonnegative integer, got {cutoff!r}")
    return int(cutoff)


def _squeezed_magnitudes(r: float, n_terms: int) -> np.ndarray:
    """|<2n|z>| * (-1)^n for n < n_terms, via the ratio recurrence."""
    t = math.tanh(r)
    coef = np.empty(n_terms)
    c = 1.0 / math.sqrt(math.cosh(r))
    for n in range(n_terms):
        coef[n] = c
        c *= -t * math.sqrt((2 * n + 1) / (2 * n + 2))
    return coef


def squeezed_vacuum_amplitudes(param: SqueezingParam, cutoff: int) -> FockVector:
    """Fock amplitudes of S(z)|0> up to photon number ``cutoff``.

    Only even photon numbers are populated. The real coefficient of |2n> is
    built by a ratio recurrence (no factorials) and then multiplied by
    exp(i*n*theta), so the phase dependence is exact:
    ``amps(r, theta)[2n] == amps(r, 0)[2n] * exp(1j*n*theta)`` bitwise.
    """
    cutoff = _check_cutoff(cutoff)
    n_terms = cutoff // 2 + 1
    n = np.arange(n_terms)
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[0::2] = _squeezed_magnitudes(param.r, n_terms) * np.exp(1j * n * param.theta)
    return FockVector(amps)


def coherent_amplitudes(param: CoherentParam, cutoff: int) -> FockVector:
    """Fock amplitudes exp(-|a|^2/2) a^n / sqrt(n!) of a coherent state."""
    cutoff = _check_cutoff(cutoff)
    alpha = param.alpha
    amps = np.empty(cutoff + 1, dtype=complex)
    a = math.exp(-0.5 * param.magnitude**2) + 0j
    for n in range(cutoff + 1):
        amps[n] = a
        a *= alpha / math.sqrt(n + 1)
    return FockVector(amps)


def fock_inner_product(a: FockVector, b: FockVector) -> complex:
    """<a|b> = sum_n conj(a_n) b_n."""
    if a.cutoff != b.cutoff:
        raise ValueError(f"cutoff mismatch: {a.cutoff} vs {b.cutoff}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def truncation_tail_bound(param: SqueezingParam, cutoff: int) -> float:
    """Upper bound on the squared norm dropped by truncating at ``cutoff``.

    Successive squared coefficients shrink by at least tanh(r)^2, so the tail
    is bounded by the first neglected term times 1/(1 - tanh(r)^2) = cosh(r)^2.
    """
    cutoff = _check_cutoff(cutoff)
    if param.r == 0.0:
        return 0.0
    first_dropped = cutoff // 2 + 1
    lead = _squeezed_magnitudes(param.r, first_dropped + 1)[first_dropped]
    return float(lead * lead * math.cosh(param.r) ** 2)


def default_cutoff(param: SqueezingParam, tol: float = 1e-12) -> int:
    """Smallest even cutoff whose tail bound is below ``tol`` (at most 200)."""
    for cutoff in range(0, MAX_DEFAULT_CUTOFF + 1, 2):
        if truncation_tail_bound(param, cutoff) < tol:
            return cutoff
    return MAX_DEFAULT_CUTOFF
