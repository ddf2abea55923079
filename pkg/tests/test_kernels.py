import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sqkernels import kernels as K
from sqkernels.cv_states import (
    CoherentParam,
    SqueezingParam,
    coherent_amplitudes,
    fock_inner_product,
    squeezed_vacuum_amplitudes,
    truncation_tail_bound,
)
from sqkernels.kernels import GramMatrix, KernelSpec, gram_matrix, psd_report

import oracles

feature = st.floats(-math.pi, math.pi)
vec2 = st.lists(feature, min_size=2, max_size=2)
hyper = st.floats(0.05, 1.5)
PI = math.pi


# -- spot values ---------------------------------------------------------------

def test_squeezing_phase_spot_value():
    ref = complex(oracles.squeezed_overlap(1, 0, 1, PI))
    got = complex(K.squeezing_phase_kernel(0.0, PI, 1.0))
    assert abs(got - ref) < 1e-15
    assert got.real == pytest.approx(0.515560, abs=1e-6)


def test_squeezing_amplitude_spot_value():
    ref = float(mp.sqrt(mp.sech(1)))
    assert float(K.squeezing_amplitude_kernel(0.0, 1.0)) == pytest.approx(ref, abs=1e-15)
    fock = fock_inner_product(
        squeezed_vacuum_amplitudes(SqueezingParam(0.0), 120), squeezed_vacuum_amplitudes(SqueezingParam(1.0), 120)
    )
    assert fock.real == pytest.approx(ref, abs=1e-13)


def test_coherent_phase_spot_value():
    ref = float(mp.exp(-2))
    assert float(K.coherent_phase_kernel_re(0.0, PI, 1.0)) == pytest.approx(ref, abs=1e-15)
    assert abs(complex(K.coherent_phase_kernel(0.0, PI, 1.0)) - ref) < 1e-15
    a = coherent_amplitudes(CoherentParam(1.0, 0.0), 60)
    b = coherent_amplitudes(CoherentParam(1.0, PI), 60)
    assert fock_inner_product(a, b).real == pytest.approx(ref, abs=1e-13)


def test_gaussian_spot_value():
    ref = float(mp.exp(-0.5))
    assert float(K.gaussian_kernel(0.0, 1.0)) == pytest.approx(ref, abs=1e-15)
    a = coherent_amplitudes(CoherentParam(0.0), 60)
    b = coherent_amplitudes(CoherentParam(1.0), 60)
    assert fock_inner_product(a, b).real == pytest.approx(ref, abs=1e-13)


def test_exp_sine_squared_spot_values():
    assert float(K.exp_sine_squared_kernel(0.0, PI / 2, 1.0, 2 * PI)) == pytest.approx(float(mp.exp(-1)), abs=1e-15)
    assert float(K.exp_sine_squared_kernel(0.3, 0.3 + 2.5, 0.7, 2.5)) == pytest.approx(1.0, abs=1e-15)
    assert float(K.exp_sine_squared_kernel([0.1, 0.2], [0.1, 0.2], 0.7, 1.0)) == 1.0


def test_ess_matches_mpmath():
    for d, l, p in [(0.3, 0.5, 1.0), (2.0, 1.5, 3.0), (-1.2, 0.9, 2 * PI)]:
        assert float(K.exp_sine_squared_kernel(0.0, d, l, p)) == pytest.approx(float(oracles.ess(d, l, p)), abs=1e-15)


def test_literal_amplitude_formula_agrees_with_stable_form():
    x = np.linspace(0, 3, 31)
    X, Y = np.meshgrid(x, x)
    literal = np.sqrt(1 / np.cosh(X) / np.cosh(Y) / (1 - np.tanh(X) * np.tanh(Y)))
    got = K.squeezing_amplitude_kernel(X[..., None], Y[..., None])
    assert np.max(np.abs(got - literal)) < 1e-12


def test_literal_phase_formula_agrees_with_stable_form():
    c = 1.2
    d = np.linspace(-PI, PI, 101)
    literal = np.sqrt((1 / np.cosh(c)) ** 2 / (1 - np.exp(1j * d) * np.tanh(c) ** 2))
    got = K.squeezing_phase_kernel(np.zeros((d.size, 1)), d[:, None], c)
    assert np.max(np.abs(got - literal)) < 1e-13


def test_large_amplitudes_stay_finite():
    assert float(K.squeezing_amplitude_kernel(800.0, 800.0)) == 1.0
    assert np.isfinite(K.squeezing_amplitude_kernel(0.0, 900.0))
    assert abs(complex(K.squeezing_phase_kernel(0.0, 0.0, 30.0)) - 1) < 1e-12


def test_negative_amplitude_warns():
    with pytest.warns(RuntimeWarning):
        K.squeezing_amplitude_kernel(-0.5, 0.2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        K.squeezing_amplitude_kernel(0.5, 0.2)


@pytest.mark.parametrize(
    "fn,args",
    [
        (K.squeezing_phase_kernel, (1.0,)),
        (K.coherent_phase_kernel, (1.0,)),
        (K.coherent_phase_kernel_re, (1.0,)),
        (K.gaussian_kernel, ()),
        (K.squeezing_amplitude_kernel, ()),
        (K.exp_sine_squared_kernel, (1.0, 2.0)),
    ],
)
def test_dimension_mismatch(fn, args):
    with pytest.raises(ValueError, match="dimension"):
        fn([0.1, 0.2], [0.1, 0.2, 0.3], *args)


def test_nonpositive_hyperparameters_rejected():
    with pytest.raises(ValueError):
        K.exp_sine_squared_kernel(0.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        K.exp_sine_squared_kernel(0.0, 1.0, 1.0, -2.0)
    with pytest.raises(ValueError):
        K.squeezing_phase_kernel(0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        KernelSpec("coherent_phase")
    with pytest.raises(ValueError):
        KernelSpec("rbf", l=-1)
    with pytest.raises(ValueError):
        KernelSpec("nope")


def test_spec_drops_unused_hyperparameters():
    a = KernelSpec("gaussian", c=3.0, l=2.0)
    assert a == KernelSpec("gaussian")
    assert a.to_dict() == {"family": "gaussian", "rescale": 1.0}
    s = KernelSpec("exp_sine_squared", l=1.0, p=2.0, rescale=0.5)
    assert KernelSpec.from_dict(s.to_dict()) == s
    with pytest.raises(ValueError):
        KernelSpec.from_dict({"family": "gaussian", "sigma": 1})


# -- properties ----------------------------------------------------------------

@given(x=vec2, x2=vec2, c=hyper, rescale=st.floats(0.25, 4))
def test_phase_kernels_periodic(x, x2, c, rescale):
    for k in range(2):
        shifted = np.array(x2, dtype=float)
        shifted[k] += 2 * PI / rescale
        for fn in (K.squeezing_phase_kernel, K.coherent_phase_kernel):
            assert abs(complex(fn(x, x2, c, rescale)) - complex(fn(x, shifted, c, rescale))) < 1e-12


@given(x=vec2, x2=vec2, c=hyper)
def test_phase_kernels_hermitian(x, x2, c):
    for fn in (K.squeezing_phase_kernel, K.coherent_phase_kernel):
        assert abs(complex(fn(x, x2, c)) - complex(fn(x2, x, c)).conjugate()) < 1e-14


@given(x=vec2, x2=vec2, c=hyper, l=hyper, p=st.floats(0.5, 10))
def test_bounded_by_one(x, x2, c, l, p):
    values = [
        K.squeezing_phase_kernel(x, x2, c),
        K.coherent_phase_kernel(x, x2, c),
        K.coherent_phase_kernel_re(x, x2, c),
        K.squeezing_phase_kernel_re(x, x2, c),
        K.gaussian_kernel(x, x2),
        K.rbf_kernel(x, x2, l),
        K.exp_sine_squared_kernel(x, x2, l, p),
        K.squeezing_amplitude_kernel(np.abs(x), np.abs(x2)),
    ]
    for v in values:
        assert abs(complex(v)) <= 1 + 1e-12


@given(x=vec2, x2=vec2)
def test_gaussian_in_unit_interval(x, x2):
    v = float(K.gaussian_kernel(x, x2))
    assert 0 < v <= 1 or (v == 0 and np.sum((np.array(x) - x2) ** 2) > 1400)


def test_amplitude_kernel_symmetric_on_random_pairs():
    rng = np.random.default_rng(11)
    for _ in range(100):
        x, x2 = rng.uniform(0, 3, size=(2, 3))
        assert float(K.squeezing_amplitude_kernel(x, x2)) == float(K.squeezing_amplitude_kernel(x2, x))


def test_identical_inputs_give_one():
    x = np.array([0.3, -1.1])
    assert complex(K.squeezing_phase_kernel(x, x, 1.3)) == 1
    assert complex(K.coherent_phase_kernel(x, x, 1.3)) == 1
    assert float(K.squeezing_amplitude_kernel(np.abs(x), np.abs(x))) == 1
    assert float(K.gaussian_kernel(x, x)) == 1


@pytest.mark.parametrize("c", [0.3, 1.0, 1.5])
def test_phase_kernels_periodic_2pi_at_unit_rescale(c):
    assert abs(complex(K.squeezing_phase_kernel(0.4, 0.4 + 2 * PI, c)) - 1) < 1e-12
    assert abs(complex(K.coherent_phase_kernel(0.4, 0.4 + 2 * PI, c)) - 1) < 1e-12


def _encoded_overlap(family, x, x2, c, cutoff=80):
    if family == "squeezing_phase":
        a = squeezed_vacuum_amplitudes(SqueezingParam(c, x), cutoff)
        b = squeezed_vacuum_amplitudes(SqueezingParam(c, x2), cutoff)
        bound = 2 * truncation_tail_bound(SqueezingParam(c), cutoff)
    elif family == "squeezing_amplitude":
        a = squeezed_vacuum_amplitudes(SqueezingParam(x), cutoff)
        b = squeezed_vacuum_amplitudes(SqueezingParam(x2), cutoff)
        bound = truncation_tail_bound(SqueezingParam(x), cutoff) + truncation_tail_bound(SqueezingParam(x2), cutoff)
    elif family == "coherent_phase":
        a = coherent_amplitudes(CoherentParam(c, x), cutoff)
        b = coherent_amplitudes(CoherentParam(c, x2), cutoff)
        bound = 0.0
    else:
        a = coherent_amplitudes(CoherentParam.from_real(x), cutoff)
        b = coherent_amplitudes(CoherentParam.from_real(x2), cutoff)
        bound = 0.0
    return fock_inner_product(a, b), bound


@pytest.mark.parametrize("family", K.QUANTUM_FAMILIES)
def test_closed_forms_match_fock_within_tail_bound(family):
    rng = np.random.default_rng(5)
    for _ in range(200):
        c = rng.uniform(0.01, 1.5)
        if family == "squeezing_amplitude":
            x, x2 = rng.uniform(0, 1.5, size=2)
        else:
            x, x2 = rng.uniform(-PI, PI, size=2)
        fock, bound = _encoded_overlap(family, x, x2, c)
        spec = KernelSpec(family, c=c)
        closed = complex(K.evaluate(spec, x, x2, real=False))
        assert abs(fock - closed) <= 10 * bound + 1e-13


# -- kernel shape claims -------------------------------------------------------

def test_squeezing_phase_sharper_than_ess():
    sq = float(K.squeezing_phase_kernel_re(0.0, PI / 2, 1.5))
    ess = float(K.exp_sine_squared_kernel(0.0, PI / 2, 1.0, 2 * PI))
    assert sq < ess


@pytest.mark.parametrize("d", [1.5, 2.0, 3.0])
def test_amplitude_kernel_wider_than_gaussian(d):
    assert float(K.squeezing_amplitude_kernel(0.0, d)) > float(K.gaussian_kernel(0.0, d))


# -- Gram matrices ---------------------------------------------------------------

def test_single_point_gram():
    g = gram_matrix([[0.3, 0.4]], KernelSpec("gaussian"))
    assert g.values.tolist() == [[1.0]]
    assert g.size == 1


@pytest.mark.parametrize("family", K.QUANTUM_FAMILIES)
def test_real_gram_psd(family):
    rng = np.random.default_rng(2)
    X = rng.uniform(-PI, PI, size=(50, 2))
    if family == "squeezing_amplitude":
        X = np.abs(X)
    g = gram_matrix(X, KernelSpec(family, c=1.3), reduce_to_real=True)
    assert np.isrealobj(g.values)
    assert np.linalg.eigvalsh(g.values)[0] >= -1e-9
    assert psd_report(g).is_psd


@pytest.mark.parametrize("family", K.COMPLEX_FAMILIES)
def test_complex_gram_hermitian(family):
    rng = np.random.default_rng(3)
    X = rng.uniform(-PI, PI, size=(50, 2))
    spec = KernelSpec(family, c=0.9)
    raw = K.cross_matrix(spec, X, X, real=False)
    assert np.max(np.abs(raw - raw.conj().T)) < 1e-12
    g = gram_matrix(X, spec, reduce_to_real=False)
    assert np.iscomplexobj(g.values) and not g.is_real_part
    assert np.all(np.diag(g.values) == 1)
    assert np.linalg.eigvalsh(g.values)[0] >= -1e-9


def test_gram_accepts_dataset_and_modulus():
    from sqkernels.datasets import generate

    d = generate("moons", 20, 0)
    g = gram_matrix(d, KernelSpec("coherent_phase", c=1.0), modulus=True)
    assert g.is_real_part
    assert np.all(g.values >= 0)


def test_gram_diagonal_exact():
    X = np.random.default_rng(0).normal(size=(30, 2))
    for fam in K.FAMILIES:
        g = gram_matrix(X, KernelSpec(fam, c=1.1, l=0.7, p=2.0))
        assert np.all(np.diag(g.values) == 1.0)


def test_entries_depend_only_on_their_pair():
    X = np.random.default_rng(4).uniform(-3, 3, size=(25, 2))
    spec = KernelSpec("squeezing_phase", c=0.8, rescale=2.0)
    perm = np.random.default_rng(9).permutation(25)
    g = gram_matrix(X, spec).values
    assert np.array_equal(gram_matrix(X[perm], spec).values, g[np.ix_(perm, perm)])


def test_psd_report_identity_and_corruption():
    spec = KernelSpec("gaussian")
    rep = psd_report(GramMatrix(np.eye(4), spec))
    assert rep.min_eigenvalue == pytest.approx(1.0)
    assert rep.is_psd
    X = np.random.default_rng(8).uniform(0, 2, size=(30, 2))
    assert psd_report(gram_matrix(X, KernelSpec("squeezing_amplitude")), 1e-9).is_psd
    bad = gram_matrix(X, spec).values.copy()
    bad[0, 1] = bad[1, 0] = 2.0
    assert not psd_report(GramMatrix(bad, spec)).is_psd


def test_gram_matrix_rejects_non_hermitian():
    with pytest.raises(ValueError):
        GramMatrix(np.array([[1.0, 0.2], [0.3, 1.0]]), KernelSpec("gaussian"))
