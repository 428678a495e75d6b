"""Supervised dimensionality reduction by jointly learning within-class
neighbor similarities and a linear projection, with classical baselines
and a 1-NN evaluation harness."""

from .alternating import FitResult, build_laplacian, fit, objective, transform, w_step
from .baselines import AffinityParams, lda_fit, lfda_fit, lpp_fit
from .datasets import (
    DatasetManifest,
    load_csv,
    load_idx,
    load_pgm_manifest,
    subsample_per_class,
    synth_two_feature_toy,
)
from .eigensolve import generalized_eig_smallest, pca_fit, sym_eig, total_scatter
from .evaluation import (
    ExperimentReport,
    average_gamma,
    knn_classify,
    recognition_rate,
    run_experiment,
    sweep,
)
from .similarity import s_step, similarity_row, simplex_project_oracle
from .types import (
    LabeledDataset,
    ProjectionModel,
    RegularizationMatrix,
    SimilarityBlocks,
    TrainConfig,
    TrainTrace,
    make_dataset,
    validate_dataset,
)

__version__ = "0.1.0"
