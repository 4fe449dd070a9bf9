"""Black-box untargeted adversarial attacks restricted to an object region.

The toolkit perturbs one image coordinate at a time, keeping only steps that
reduce the classifier's probability for the original predicted class, and
draws those coordinates from a mask built out of detection boxes and a
saliency map. A batch harness, evaluation metrics, and a child-process
oracle protocol round out the pipeline.
"""

from .attack import AttackConfig, AttackResult, perturbation_of, run_attack
from .errors import (
    AttackToolkitError,
    BoundsError,
    ConfigurationError,
    OracleFailure,
    PreconditionError,
    ShapeMismatchError,
)
from .kernels import HAVE_NATIVE
from .metrics import AggregateReport, RunRecord, aggregate, histogram_bin, psnr, ssim
from .oracle import (
    ExternalOracle,
    LinearSoftmaxOracle,
    Oracle,
    ProbabilityVector,
    QueryLedger,
    SpyOracle,
    make_builtin_oracle,
    predict,
    wrap_with_spy,
)
from .region import (
    CoordinateSet,
    DetectionBox,
    RegionConfig,
    RegionMask,
    RegionMode,
    activation_factor,
    combine,
    load_detection_boxes,
    load_saliency_mask,
    mask_to_coordinates,
    rasterize_boxes,
    save_detection_boxes,
    save_saliency_mask,
)
from .tensor import (
    Coordinate,
    ImageTensor,
    Perturbation,
    apply_step,
    flatten_index,
    l2_distance,
    read_png,
    step_value,
    unflatten_index,
    write_png,
)

__version__ = "0.1.0"

__all__ = [
    "AttackConfig",
    "AttackResult",
    "perturbation_of",
    "run_attack",
    "AttackToolkitError",
    "BoundsError",
    "ConfigurationError",
    "OracleFailure",
    "PreconditionError",
    "ShapeMismatchError",
    "HAVE_NATIVE",
    "AggregateReport",
    "RunRecord",
    "aggregate",
    "histogram_bin",
    "psnr",
    "ssim",
    "ExternalOracle",
    "LinearSoftmaxOracle",
    "Oracle",
    "ProbabilityVector",
    "QueryLedger",
    "SpyOracle",
    "make_builtin_oracle",
    "predict",
    "wrap_with_spy",
    "CoordinateSet",
    "DetectionBox",
    "RegionConfig",
    "RegionMask",
    "RegionMode",
    "activation_factor",
    "combine",
    "load_detection_boxes",
    "load_saliency_mask",
    "mask_to_coordinates",
    "rasterize_boxes",
    "save_detection_boxes",
    "save_saliency_mask",
    "Coordinate",
    "ImageTensor",
    "Perturbation",
    "apply_step",
    "flatten_index",
    "l2_distance",
    "read_png",
    "step_value",
    "unflatten_index",
    "write_png",
    "__version__",
]
