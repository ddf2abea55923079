"""Squeezed- and coherent-state quantum kernels with a classical SVM back end."""

from .cv_states import (
    CoherentParam,
    FockVector,
    SqueezingParam,
    coherent_amplitudes,
    default_cutoff,
    fock_inner_product,
    squeezed_vacuum_amplitudes,
    truncation_tail_bound,
)
from .kernels import (
    GramMatrix,
    KernelSpec,
    coherent_phase_kernel,
    coherent_phase_kernel_re,
    exp_sine_squared_kernel,
    gaussian_kernel,
    gram_matrix,
    psd_report,
    rbf_kernel,
    squeezing_amplitude_kernel,
    squeezing_phase_kernel,
)
from .quantum_estimator import (
    ShotEstimate,
    exact_swap_probability,
    swap_test_estimate,
    vacuum_projection_estimate,
)
from .svm import SVMModel, TrainConfig, compute_bias, dual_objective, fit, kkt_report, predict, predict_many, train
from .datasets import LabeledDataset, generate, split

__version__ = "0.1.0"
