"""Locally differentially private bit representations.

Real-valued embedding vectors are z-score normalized, encoded into
fixed-point bit vectors, randomized bit-by-bit under an LDP protocol
(OME, SUE, or OUE), and only then handed to a classifier.  The package
exposes the per-record operations, scikit-learn style estimators around
them, and an experiment pipeline with a CLI.
"""

from .codec import (
    BitVector,
    CodecLayout,
    EmbeddingVector,
    FixedPointEncoder,
    decode_matrix,
    decode_value,
    encode_matrix,
    encode_value,
    encode_vector,
    normalize_rows,
    zscore_normalize,
)
from .errors import (
    DivergenceError,
    LdpreprError,
    ParameterError,
    ParseError,
    ShapeError,
)
from .io import (
    BitDataset,
    EmbeddingDataset,
    load_bits,
    load_embeddings,
    parse_config,
    read_report,
    write_bits,
    write_embeddings,
    write_report,
)
from .ldp import (
    BitRandomizer,
    OmeParams,
    RateEstimate,
    RngSeed,
    UeParams,
    audit_max_log_ratio,
    derive_seed,
    empirical_flip_rates,
    ome_params,
    ome_params_for_sensitivity,
    ome_position_probs,
    oue_params,
    paired_product_epsilon,
    perturb_ome,
    perturb_ue,
    sue_params,
)
from .model import (
    MlpClassifier,
    MlpConfig,
    MlpModel,
    TrainHistory,
    evaluate,
    forward,
    init_mlp,
    train,
)
from .pipeline import (
    ExperimentConfig,
    Report,
    emit_probability_curves,
    make_synthetic_embeddings,
    run_experiment,
    split,
)

__version__ = "0.1.0"
