"""Gradient Direction Pattern and LBP texture descriptors with SVM evaluation tools."""

from ._backend import NAME as KERNEL_BACKEND
from .classify import (
    ChiSquarePrototypes,
    Label,
    LinearSvmModel,
    TrainConfig,
    chi_square_classify,
    chi_square_distance,
    fit_chi_square_prototypes,
    load_model,
    save_model,
    svm_predict,
    svm_train,
)
from .descriptors import (
    KirschResponses,
    Neighborhood,
    gdp_code,
    is_uniform,
    kirsch_responses,
    lbp_code,
    lbp_uniform_bin,
    transition_count,
    uniform_bin,
)
from .features import (
    BlockGrid,
    DescriptorKind,
    FeatureVector,
    block_grid,
    extract_codes,
    feature_length,
    feature_vector,
)
from .imagecore import (
    GrayImage,
    NoiseSpec,
    SyntheticSpec,
    add_gaussian_noise,
    load_pgm,
    make_synthetic_textures,
    save_pgm,
)

__version__ = "0.1.0"
