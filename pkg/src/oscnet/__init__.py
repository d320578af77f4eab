"""oscnet: a simulator and forward-only machine-learning toolkit for CMOS
oscillator networks.

Phases carry values (theta = arctan x), couplings carry weights, and one
settling of the network computes a normalized weighted average in closed
form.  On top of that primitive the package provides winner-takes-all
Hebbian pretraining, cosine K-means, linear fine-tuning, linear
regression by coordinate descent, backprop baselines, and a model of
prenatal retina-to-LGN development driven by retinal waves.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    BadMagicError,
    CountMismatchError,
    DegenerateFeatureError,
    DegenerateNormalizationError,
    EmptyClusterError,
    InvalidValueError,
    LengthMismatchError,
    NearSingularPhaseError,
    NotConvergedError,
    NotSettledError,
    NumericOverflowError,
    OscNetError,
    UnknownVersionError,
    ZeroVectorError,
)
from .phase import (  # noqa: F401
    EncodedInput,
    decode_value,
    encode_coupling,
    encode_value,
    normalize_phase,
)
from .dynamics import (  # noqa: F401
    NetworkGraph,
    Trajectory,
    build_mimo_graph,
    integrate,
    lyapunov_energy,
    phase_derivative,
    save_trajectory_csv,
    settle_mimo,
)
from .mimo import (  # noqa: F401
    ConvolutionKernel,
    MimoNetwork,
    convolve_image,
    forward,
    forward_single,
    gaussian_kernel,
)
from .data import (  # noqa: F401
    LabeledDataset,
    load_mnist,
    synth_clusters,
)
from .hebbian import (  # noqa: F401
    ClusterModel,
    LinearHead,
    TrainState,
    assign_labels_by_majority,
    finetune_head,
    hebbian_response,
    hebbian_step,
    kmeans_assign,
    kmeans_fit,
    pretrain,
)
from .regression import (  # noqa: F401
    CoordinateDescentConfig,
    RegressionProblem,
    coordinate_descent,
    solve_single,
)
from .baseline import (  # noqa: F401
    AutoencoderModel,
    euclidean_kmeans,
    train_autoencoder,
)
from .retina import (  # noqa: F401
    RetinaWorld,
    RetinalWave,
    WaveParams,
    build_world,
    develop,
    evaluate_straight_line,
    generate_wave,
)
