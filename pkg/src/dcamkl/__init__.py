"""Feature fusion with discriminant correlation analysis and multi-kernel
SVM classification, plus the image descriptors and evaluation metrics that
make up the full interestingness-prediction pipeline."""

from .dataset import (FeatureSet, LabelVector, Normalizer, Split,
                      apply_normalizer, fit_normalizer, load_feature_csv,
                      load_label_csv, save_feature_csv, save_label_csv, split)
from .errors import (DcamklError, DegenerateFusionError, NonConvergenceError,
                     ParseError, ValidationError)
from .fusion import (DcaTransform, MdcaPlan, ScatterDecomposition,
                     between_class_scatter, fit_dca, fit_mdca, fuse,
                     numerical_rank, transform_pair, unitize_scatter)
from .kernels import (GramMatrix, KernelSpec, combine, gram, gram_cross,
                      kernel_eval, median_sigma)
from .metrics import (ConfusionCounts, EvaluationReport, RocCurve, accuracy,
                      confusion, evaluate, roc)
from .mkl import MklTrainResult
from .mkl import gradient as mkl_gradient
from .mkl import objective as mkl_objective
from .mkl import predict as mkl_predict
from .mkl import train as mkl_train
from .svm import SvmSolution, decision_values, predict_labels, solve_dual

__version__ = "0.1.0"

__all__ = [
    "ConfusionCounts", "DcaTransform", "DcamklError", "DegenerateFusionError",
    "EvaluationReport", "FeatureSet", "GramMatrix", "KernelSpec",
    "LabelVector", "MdcaPlan", "MklTrainResult", "NonConvergenceError",
    "Normalizer", "ParseError", "RocCurve", "ScatterDecomposition", "Split",
    "SvmSolution", "ValidationError", "accuracy", "apply_normalizer",
    "between_class_scatter", "combine", "confusion", "decision_values",
    "evaluate", "fit_dca", "fit_mdca", "fit_normalizer", "fuse", "gram",
    "gram_cross", "kernel_eval", "load_feature_csv", "load_label_csv",
    "median_sigma", "mkl_gradient", "mkl_objective", "mkl_predict",
    "mkl_train", "numerical_rank", "predict_labels", "roc",
    "save_feature_csv", "save_label_csv", "solve_dual", "split",
    "transform_pair", "unitize_scatter",
]
