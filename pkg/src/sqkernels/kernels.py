"""Closed-form quantum kernels, classical baselines and Gram-matrix assembly.

Multi-feature inputs are encoded one feature per mode, so every kernel here
is a product over features of a single-mode overlap. All kernel functions
broadcast over leading axes: the last axis indexes features, which lets the
same code evaluate a single pair or a full cross matrix
(``k(X[:, None, :], Y[None, :, :])``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, asdict

import numpy as np

SQUEEZING_PHASE = "squeezing_phase"
SQUEEZING_AMPLITUDE = "squeezing_amplitude"
COHERENT_PHASE = "coherent_phase"
GAUSSIAN = "gaussian"  # coherent amplitude encoding
EXP_SINE_SQUARED = "exp_sine_squared"
RBF = "rbf"

FAMILIES = (SQUEEZING_PHASE, SQUEEZING_AMPLITUDE, COHERENT_PHASE, GAUSSIAN, EXP_SINE_SQUARED, RBF)
QUANTUM_FAMILIES = (SQUEEZING_PHASE, SQUEEZING_AMPLITUDE, COHERENT_PHASE, GAUSSIAN)
COMPLEX_FAMILIES = (SQUEEZING_PHASE, COHERENT_PHASE)

_REQUIRED = {
    SQUEEZING_PHASE: ("c",),
    SQUEEZING_AMPLITUDE: (),
    COHERENT_PHASE: ("c",),
    GAUSSIAN: (),
    EXP_SINE_SQUARED: ("l", "p"),
    RBF: ("l",),
}


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus the hyperparameters it uses.

    Hyperparameters a family does not use are dropped to ``None`` so that two
    specs describing the same kernel compare equal.
    """

    family: str
    c: float | None = None
    l: float | None = None
    p: float | None = None
    rescale: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        required = _REQUIRED[self.family]
        for name in ("c", "l", "p"):
            value = getattr(self, name)
            if name not in required:
                object.__setattr__(self, name, None)
                continue
            if value is None:
                raise ValueError(f"{self.family} kernel requires hyperparameter {name!r}")
            value = float(value)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"hyperparameter {name} must be positive, got {value!r}")
            object.__setattr__(self, name, value)
        rescale = float(self.rescale)
        if not (rescale > 0 and math.isfinite(rescale)):
            raise ValueError(f"rescale must be positive, got {self.rescale!r}")
        object.__setattr__(self, "rescale", rescale)

    @property
    def is_quantum(self) -> bool:
        return self.family in QUANTUM_FAMILIES

    @property
    def is_complex(self) -> bool:
        return self.family in COMPLEX_FAMILIES

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        unknown = set(d) - {"family", "c", "l", "p", "rescale"}
        if unknown:
            raise ValueError(f"unknown kernel keys: {sorted(unknown)}")
        if "family" not in d:
            raise ValueError("kernel spec needs a 'family'")
        return cls(**d)

    def label(self) -> str:
        parts = [f"{k}={v:g}" for k, v in self.to_dict().items() if k != "family"]
        return f"{self.family}({', '.join(parts)})"

    def __call__(self, x, x2, real: bool = True):
        """Evaluate the kernel; complex families reduce to their real part."""
        return evaluate(self, x, x2, real=real)


# -- helpers -----------------------------------------------------------------

def _pair(x, x2):
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x.ndim == 0:
        x = x[None]
    if x2.ndim == 0:
        x2 = x2[None]
    if x.shape[-1] != x2.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {x2.shape[-1]} features")
    return x, x2


def _positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be positive, got {value!r}")


def sech(x):
    """1/cosh without overflow for large |x|."""
    e = np.exp(-np.abs(np.asarray(x, dtype=float)))
    return 2.0 * e / (1.0 + e * e)


def _one_minus_expi(delta):
    """1 - exp(i*delta), computed without cancellation near delta = 0."""
    return 2.0 * np.sin(0.5 * delta) ** 2 - 1j * np.sin(delta)


def _squeezing_phase_factors(x, x2, c, rescale):
    # sech^2 c / (1 - e^{i d} tanh^2 c) == 1 / (1 + sinh^2 c (1 - e^{i d}))
    delta = rescale * (x2 - x)
    return np.sqrt(1.0 / (1.0 + math.sinh(c) ** 2 * _one_minus_expi(delta)))


def _coherent_phase_exponent(x, x2, c, rescale):
    delta = rescale * (x2 - x)
    return delta, -c * c * _one_minus_expi(delta)


# -- kernels -----------------------------------------------------------------

def squeezing_phase_kernel(x, x2, c: float, rescale: float = 1.0):
    """Overlap of squeezed vacua |c, rescale*x_k> per feature, multiplied.

    Each factor is sqrt(sech^2 c / (1 - exp(i*d) tanh^2 c)) with
    d = rescale*(x2_k - x_k), principal square root. The radicand's
    denominator has real part >= 1 - tanh^2 c > 0, so the principal branch is
    never crossed.
    """
    x, x2 = _pair(x, x2)
    _positive("c", c)
    _positive("rescale", rescale)
    return np.prod(_squeezing_phase_factors(x, x2, c, rescale), axis=-1)


def squeezing_phase_kernel_re(x, x2, c: float, rescale: float = 1.0):
    """Product over features of the real part of each squeezing-phase factor."""
    x, x2 = _pair(x, x2)
    _positive("c", c)
    _positive("rescale", rescale)
    return np.prod(_squeezing_phase_factors(x, x2, c, rescale).real, axis=-1)


def squeezing_amplitude_kernel(x, x2):
    """Overlap of squeezed vacua with amplitudes x_k and zero phase.

    sqrt(sech x sech x' / (1 - tanh x tanh x')) simplifies to sqrt(sech(x - x')),
    which is the form evaluated here since it stays accurate for large
    amplitudes. Negative inputs are accepted (the formula is real and
    symmetric there) but do not correspond to a physical squeezing amplitude.
    """
    x, x2 = _pair(x, x2)
    if np.any(x < 0) or np.any(x2 < 0):
        warnings.warn(
            "negative values passed to squeezing_amplitude_kernel; the encoding "
            "assumes nonnegative squeezing amplitudes",
            RuntimeWarning,
            stacklevel=2,
        )
    return np.prod(np.sqrt(sech(x - x2)), axis=-1)


def coherent_phase_kernel(x, x2, c: float, rescale: float = 1.0):
    """Product over features of exp(-c^2 + c^2 exp(i d))."""
    x, x2 = _pair(x, x2)
    _positive("c", c)
    _positive("rescale", rescale)
    _, expo = _coherent_phase_exponent(x, x2, c, rescale)
    return np.exp(np.sum(expo, axis=-1))


def coherent_phase_kernel_re(x, x2, c: float, rescale: float = 1.0):
    """Product over features of exp(-c^2 + c^2 cos d) cos(c^2 sin d)."""
    x, x2 = _pair(x, x2)
    _positive("c", c)
    _positive("rescale", rescale)
    delta, expo = _coherent_phase_exponent(x, x2, c, rescale)
    factors = np.exp(expo.real) * np.cos(c * c * np.sin(delta))
    return np.prod(factors, axis=-1)


def gaussian_kernel(x, x2):
    """exp(-|x - x2|^2 / 2): the coherent amplitude-encoding kernel."""
    x, x2 = _pair(x, x2)
    return np.exp(-0.5 * np.sum((x - x2) ** 2, axis=-1))


def rbf_kernel(x, x2, l: float = 1.0):
    """exp(-|x - x2|^2 / (2 l^2))."""
    x, x2 = _pair(x, x2)
    _positive("l", l)
    return np.exp(-0.5 * np.sum((x - x2) ** 2, axis=-1) / (l * l))


def exp_sine_squared_kernel(x, x2, l: float, p: float):
    """Product over features of exp(-(2/l^2) sin^2(pi |x_k - x2_k| / p))."""
    x, x2 = _pair(x, x2)
    _positive("l", l)
    _positive("p", p)
    s = np.sin(np.pi * np.abs(x - x2) / p)
    return np.exp(-2.0 / (l * l) * np.sum(s * s, axis=-1))


def evaluate(spec: KernelSpec, x, x2, real: bool = True, modulus: bool = False):
    """Evaluate ``spec`` on (broadcast) inputs.

    With ``real`` set, the complex phase families are reduced to the product
    of per-feature real parts (the same reduction as
    :func:`coherent_phase_kernel_re`); ``modulus`` returns |K| instead.
    """
    x, x2 = _pair(x, x2)
    fam = spec.family
    if fam == SQUEEZING_PHASE:
        if modulus:
            return np.abs(squeezing_phase_kernel(x, x2, spec.c, spec.rescale))
        if real:
            return squeezing_phase_kernel_re(x, x2, spec.c, spec.rescale)
        return squeezing_phase_kernel(x, x2, spec.c, spec.rescale)
    if fam == COHERENT_PHASE:
        if modulus:
            return np.abs(coherent_phase_kernel(x, x2, spec.c, spec.rescale))
        if real:
            return coherent_phase_kernel_re(x, x2, spec.c, spec.rescale)
        return coherent_phase_kernel(x, x2, spec.c, spec.rescale)
    r = spec.rescale
    if fam == SQUEEZING_AMPLITUDE:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return squeezing_amplitude_kernel(r * x, r * x2)
    if fam == GAUSSIAN:
        return gaussian_kernel(r * x, r * x2)
    if fam == RBF:
        return rbf_kernel(r * x, r * x2, spec.l)
    return exp_sine_squared_kernel(r * x, r * x2, spec.l, spec.p)


def cross_matrix(spec: KernelSpec, X, Y, real: bool = True, modulus: bool = False) -> np.ndarray:
    """Matrix M[i, j] = K(X[i], Y[j])."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    return evaluate(spec, X[:, None, :], Y[None, :, :], real=real, modulus=modulus)


# -- Gram matrices -----------------------------------------------------------

@dataclass(eq=False)
class GramMatrix:
    values: np.ndarray
    spec: KernelSpec
    is_real_part: bool = False
    size: int = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] == 0:
            raise ValueError(f"Gram matrix must be square and nonempty, got shape {v.shape}")
        if np.max(np.abs(v - v.conj().T)) > 1e-12:
            raise ValueError("Gram matrix is not Hermitian")
        if np.max(np.abs(np.diag(v) - 1.0)) > 1e-12:
            raise ValueError("Gram matrix diagonal must be 1")
        self.values = v
        self.size = v.shape[0]

    @property
    def is_real(self) -> bool:
        return self.is_real_part or not np.iscomplexobj(self.values)


def _as_points(data) -> np.ndarray:
    points = getattr(data, "points", data)
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("need a nonempty list of equal-length feature vectors")
    return X


def gram_matrix(data, spec: KernelSpec, reduce_to_real: bool = True, modulus: bool = False) -> GramMatrix:
    """Pairwise kernel values over ``data`` (points or a LabeledDataset).

    Complex families are reduced to real parts when ``reduce_to_real`` is set
    (or to moduli with ``modulus``). The diagonal is set to exactly 1.
    """
    X = _as_points(data)
    values = cross_matrix(spec, X, X, real=reduce_to_real, modulus=modulus)
    if np.iscomplexobj(values):
        values = 0.5 * (values + values.conj().T)
    else:
        values = 0.5 * (values + values.T)
    np.fill_diagonal(values, 1.0)
    return GramMatrix(values, spec, is_real_part=bool(spec.is_complex and (reduce_to_real or modulus)))


@dataclass(frozen=True)
class PSDReport:
    min_eigenvalue: float
    is_psd: bool


def psd_report(g: GramMatrix, tol: float = 1e-9) -> PSDReport:
    """Smallest eigenvalue (of the real part when reduced) and a PSD flag."""
    v = np.asarray(g.values)
    if g.is_real_part:
        v = v.real
    min_eig = float(np.linalg.eigvalsh(v)[0])
    return PSDReport(min_eig, min_eig >= -tol)
