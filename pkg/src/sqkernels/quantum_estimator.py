"""Simulated kernel estimation by the ancilla swap test and by vacuum
projection after S(z) followed by S(z')^dagger.

Both protocols are simulated at the level of outcome probabilities: the exact
probability is computed, then ``shots`` Bernoulli trials are drawn from
``numpy.random.default_rng(seed)`` (PCG64). Sampling the success count as a
single binomial draw is distributionally identical to drawing the trials one
by one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cv_states import (
    FockVector,
    SqueezingParam,
    fock_inner_product,
    squeezed_vacuum_amplitudes,
    truncation_tail_bound,
)
from .kernels import squeezing_phase_kernel

SWAP_TEST = "swap_test"
VACUUM_PROJECTION = "vacuum_projection"
DEFAULT_SHOTS = 10_000


@dataclass(frozen=True)
class ShotEstimate:
    estimate: float
    shots: int
    std_error: float
    protocol: str
    seed: int


def _clip_probability(p: float) -> float:
    # truncated vectors can overshoot 1 by rounding
    return min(1.0, max(0.0, p))


def _check_shots(shots):
    if int(shots) != shots or shots < 1:
        raise ValueError(f"shots must be a positive integer, got {shots!r}")
    return int(shots)


def _sample(p: float, shots: int, seed: int) -> tuple[float, float]:
    rng = np.random.default_rng(seed)
    hits = int(rng.binomial(shots, p))
    p_hat = hits / shots
    return p_hat, math.sqrt(p_hat * (1.0 - p_hat) / shots)


def exact_swap_probability(a: FockVector, b: FockVector) -> float:
    """Probability of the +1 outcome of sigma_x on the ancilla of
    (|0>|a> + |1>|b>)/sqrt(2), i.e. (1 + Re<a|b>)/2."""
    return _clip_probability(0.5 * (1.0 + fock_inner_product(a, b).real))


def swap_test_probability(kernel_value: complex) -> float:
    """Swap-test success probability for a known overlap."""
    return _clip_probability(0.5 * (1.0 + complex(kernel_value).real))


def swap_test_from_probability(p: float, shots: int, seed: int) -> ShotEstimate:
    shots = _check_shots(shots)
    p_hat, se = _sample(_clip_probability(p), shots, seed)
    return ShotEstimate(2.0 * p_hat - 1.0, shots, 2.0 * se, SWAP_TEST, int(seed))


def swap_test_estimate(a: FockVector, b: FockVector, shots: int = DEFAULT_SHOTS, seed: int = 0) -> ShotEstimate:
    """Estimate Re<a|b> as 2*p_hat - 1 from ``shots`` ancilla measurements."""
    return swap_test_from_probability(exact_swap_probability(a, b), shots, seed)


def vacuum_projection_probability(z: SqueezingParam, z2: SqueezingParam, cutoff: int | None = None) -> float:
    """|<z2|z>|^2 from the closed-form overlap.

    When ``cutoff`` is given the value is checked against the truncated Fock
    overlap; a disagreement beyond the truncation bound raises RuntimeError.
    """
    k = complex(_squeezed_overlap(z, z2))
    q = _clip_probability(abs(k) ** 2)
    if cutoff is not None:
        fock = fock_inner_product(
            squeezed_vacuum_amplitudes(z2, cutoff), squeezed_vacuum_amplitudes(z, cutoff)
        )
        slack = 10.0 * (truncation_tail_bound(z, cutoff) + truncation_tail_bound(z2, cutoff)) + 1e-12
        if abs(fock - k) > slack:
            raise RuntimeError(
                f"closed-form overlap {k} disagrees with Fock overlap {fock} at cutoff {cutoff}"
            )
    return q


def _squeezed_overlap(z: SqueezingParam, z2: SqueezingParam) -> complex:
    """<z2|z> for arbitrary (r, theta) pairs."""
    if z.r == z2.r:
        return complex(squeezing_phase_kernel(z2.theta, z.theta, z.r)) if z.r > 0 else 1.0
    # general form sqrt(sech r sech r' / (1 - e^{i(theta - theta')} tanh r tanh r'))
    t = math.tanh(z.r) * math.tanh(z2.r)
    d = z.theta - z2.theta
    denom = 1.0 - t * complex(math.cos(d), math.sin(d))
    return complex(np.sqrt(1.0 / (math.cosh(z.r) * math.cosh(z2.r) * denom)))


def vacuum_projection_estimate(
    z: SqueezingParam,
    z2: SqueezingParam,
    shots: int = DEFAULT_SHOTS,
    seed: int = 0,
    cutoff: int | None = 80,
) -> ShotEstimate:
    """Estimate |<z2|z>|^2 as the sampled vacuum frequency.

    The phase of the overlap is not recoverable from this protocol.
    """
    shots = _check_shots(shots)
    q = vacuum_projection_probability(z, z2, cutoff)
    q_hat, se = _sample(q, shots, seed)
    return ShotEstimate(q_hat, shots, se, VACUUM_PROJECTION, int(seed))


def estimated_cross_matrix(spec, X, Y, shots: int, seed: int, symmetric: bool = False) -> np.ndarray:
    """Shot-noisy real kernel matrix between row sets X and Y.

    Every (pair, feature) overlap is estimated by its own swap test, so the
    result estimates the product of per-feature real parts, which is the real
    reduction used for training. With ``symmetric`` (X is Y) only the upper
    triangle is sampled, mirrored, and the diagonal set to 1.
    """
    from .kernels import evaluate

    if not spec.is_quantum:
        raise ValueError(f"{spec.family} kernel has no quantum estimation circuit")
    shots = _check_shots(shots)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    rng = np.random.default_rng(seed)
    out = np.ones((X.shape[0], Y.shape[0]))
    if symmetric:
        iu = np.triu_indices(X.shape[0], k=1)
    for k in range(X.shape[1]):
        exact = evaluate(spec, X[:, None, k : k + 1], Y[None, :, k : k + 1], real=True)
        p = np.clip(0.5 * (1.0 + exact), 0.0, 1.0)
        if symmetric:
            est = 2.0 * rng.binomial(shots, p[iu]) / shots - 1.0
            factor = np.ones_like(p)
            factor[iu] = est
            factor.T[iu] = est
        else:
            factor = 2.0 * rng.binomial(shots, p) / shots - 1.0
        out *= factor
    return out
