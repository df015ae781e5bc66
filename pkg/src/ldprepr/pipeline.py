"""End-to-end experiment orchestration.

A run loads an embedding file, splits it, builds the chosen
representation, trains the classifier, and scores it on held-out data;
an experiment repeats that over derived seeds and aggregates the
accuracies into a report.

Modes
-----
* ``npnn``: non-private baseline on z-score normalized real embeddings.
* ``npnn_bits``: diagnostic baseline on clean encoded bits.
* ``ldpnn``: every record (train and test alike) is encoded and
  randomized under the configured protocol before anything downstream
  sees it; the trainer only ever receives perturbed bits.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .codec import BitVector, CodecLayout, EmbeddingVector, encode_matrix, normalize_rows
from .errors import ParameterError
from .io import EmbeddingDataset, load_embeddings
from .ldp import (
    PROTOCOLS,
    RngSeed,
    derive_seed,
    ome_params,
    oue_params,
    perturb_ome,
    perturb_ue,
    sue_params,
)
from .model import MlpConfig, evaluate, init_mlp, train

__all__ = [
    "MODES",
    "ExperimentConfig",
    "Report",
    "split",
    "run_experiment",
    "emit_probability_curves",
    "make_synthetic_embeddings",
]

MODES = ("npnn", "npnn_bits", "ldpnn")


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment."""

    mode: str
    input_path: str
    output_path: str = ""
    protocol: str = "ome"
    epsilon: float = 1.0
    lam: float = 100.0
    int_bits: int = 4
    frac_bits: int = 5
    hidden_units: int = 128
    dropout_rate: float = 0.5
    learning_rate: float = 0.01
    decay: float = 1e-6
    momentum: float = 0.9
    batch_size: int = 32
    epochs: int = 50
    split_ratio: float = 0.8
    runs: int = 20
    base_seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.protocol not in PROTOCOLS:
            raise ParameterError(
                f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}"
            )
        if not 0.0 < self.split_ratio < 1.0:
            raise ParameterError(f"split_ratio must be in (0, 1), got {self.split_ratio}")
        if self.runs < 1:
            raise ParameterError(f"runs must be >= 1, got {self.runs}")


@dataclass
class Report:
    """Aggregated experiment result."""

    config: ExperimentConfig
    accuracies: list
    mean_accuracy: float
    std_accuracy: float
    probabilities: dict
    duration_seconds: float
    audit: list = field(default_factory=list)


def split(records, ratio: float, seed: RngSeed):
    """Shuffle by seed; the first floor(n * ratio) records become train."""
    if not 0.0 < ratio < 1.0:
        raise ParameterError(f"ratio must be in (0, 1), got {ratio}")
    n = len(records)
    if n < 2:
        raise ParameterError(f"need at least 2 records to split, got {n}")
    order = seed.generator().permutation(n)
    cut = int(n * ratio)
    return (
        [records[i] for i in order[:cut]],
        [records[i] for i in order[cut:]],
    )


def _resolve_protocol(config: ExperimentConfig, layout: CodecLayout):
    """Protocol parameters plus the probability echo for the report."""
    if config.protocol == "ome":
        params = ome_params(
            config.epsilon, config.lam, layout.num_values, layout.bits_per_value
        )
        return params, {"p1": params.p1, "p2": params.p2, "q": params.q}
    factory = sue_params if config.protocol == "sue" else oue_params
    params = factory(config.epsilon, 2 * layout.num_values)
    return params, {"p1": params.p, "p2": params.p, "q": params.q}


def _randomize_rows(bits: np.ndarray, protocol: str, params, key: int,
                    stream_offset: int) -> np.ndarray:
    """Perturb each row on its own (key, stream) so order cannot matter."""
    perturb = perturb_ome if protocol == "ome" else perturb_ue
    out = np.empty_like(bits)
    for i in range(bits.shape[0]):
        record = BitVector(label=0, bits=bits[i])
        out[i] = perturb(record, params, RngSeed(key, stream_offset + i)).bits
    return out


def _stack(records):
    X = np.stack([record.values for record in records])
    y = np.array([record.label for record in records], dtype=np.int64)
    return X, y


def run_experiment(config: ExperimentConfig) -> Report:
    """Run all repeats of an experiment and aggregate their accuracies.

    Run k derives every random choice (split, weight init, training
    shuffle and dropout, per-record perturbation streams) from
    ``base_seed`` and k, so a config reproduces its report exactly.
    """
    started = time.perf_counter()
    dataset = load_embeddings(config.input_path)
    layout = CodecLayout(config.int_bits, config.frac_bits, dataset.dim)

    probabilities: dict = {}
    params = None
    if config.mode == "ldpnn":
        params, probabilities = _resolve_protocol(config, layout)

    input_dim = dataset.dim if config.mode == "npnn" else layout.total_bits
    mlp_config = MlpConfig(
        input_dim=input_dim,
        hidden_units=config.hidden_units,
        num_classes=dataset.num_classes,
        dropout_rate=config.dropout_rate,
        learning_rate=config.learning_rate,
        decay=config.decay,
        momentum=config.momentum,
        batch_size=config.batch_size,
        epochs=config.epochs,
    )

    base = RngSeed(config.base_seed)
    accuracies = []
    audit = []
    for k in range(config.runs):
        run_seed = base.child(k)
        run_key = derive_seed(run_seed.seed, run_seed.stream)
        train_records, test_records = split(
            dataset.records, config.split_ratio, RngSeed(run_key, 0)
        )
        X_train, y_train = _stack(train_records)
        X_test, y_test = _stack(test_records)

        if config.mode == "npnn":
            X_train = normalize_rows(X_train)
            X_test = normalize_rows(X_test)
            representation = "normalized real embeddings"
        elif config.mode == "npnn_bits":
            X_train = encode_matrix(X_train, layout).astype(np.float64)
            X_test = encode_matrix(X_test, layout).astype(np.float64)
            representation = "clean encoded bits"
        else:
            clean_train = encode_matrix(X_train, layout)
            clean_test = encode_matrix(X_test, layout)
            # Streams 0..2 drive split/init/train; records start at 3.
            X_train = _randomize_rows(
                clean_train, config.protocol, params, run_key, 3
            ).astype(np.float64)
            X_test = _randomize_rows(
                clean_test, config.protocol, params, run_key, 3 + len(train_records)
            ).astype(np.float64)
            # Clean representations must not outlive the perturbation step.
            del clean_train, clean_test
            representation = f"{config.protocol}-perturbed bits"

        model = init_mlp(mlp_config, RngSeed(run_key, 1))
        audit.append(
            f"run {k}: train <- {representation} ({len(train_records)} records)"
        )
        model, _ = train(model, X_train, y_train, seed=RngSeed(run_key, 2))
        audit.append(
            f"run {k}: evaluate <- {representation} ({len(test_records)} records)"
        )
        accuracies.append(evaluate(model, X_test, y_test))

    return Report(
        config=config,
        accuracies=accuracies,
        mean_accuracy=float(np.mean(accuracies)),
        std_accuracy=float(np.std(accuracies)),
        probabilities=probabilities,
        duration_seconds=time.perf_counter() - started,
        audit=audit,
    )


def emit_probability_curves(protocols, epsilons, lambdas, num_values: int,
                            bits_per_value: int, out_path: str) -> None:
    """Tabulate randomization probabilities over parameter grids.

    OME rows span the full epsilon x lambda grid; SUE and OUE rows span
    the epsilon grid with sensitivity 2 * num_values (their lambda column
    is left empty).
    """
    if not protocols or not epsilons or (("ome" in protocols) and not lambdas):
        raise ParameterError("protocol and parameter grids must be non-empty")
    lines = ["protocol\tepsilon\tlambda\tp1\tp2\tq"]
    for protocol in protocols:
        if protocol not in PROTOCOLS:
            raise ParameterError(f"unknown protocol {protocol!r}")
        if protocol == "ome":
            for epsilon in epsilons:
                for lam in lambdas:
                    p = ome_params(epsilon, lam, num_values, bits_per_value)
                    lines.append(
                        f"ome\t{epsilon!r}\t{lam!r}\t{p.p1!r}\t{p.p2!r}\t{p.q!r}"
                    )
        else:
            factory = sue_params if protocol == "sue" else oue_params
            for epsilon in epsilons:
                p = factory(epsilon, 2 * num_values)
                lines.append(
                    f"{protocol}\t{epsilon!r}\t\t{p.p!r}\t{p.p!r}\t{p.q!r}"
                )
    with open(out_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def make_synthetic_embeddings(num_records: int = 1000, dim: int = 50,
                              num_classes: int = 2, tokens_per_record: int = 20,
                              token_noise: float = 1.5,
                              seed: int = 0) -> EmbeddingDataset:
    """Separable synthetic embeddings shaped like mean-pooled token vectors.

    Each class gets a random +-1 template; a record is the mean of
    ``tokens_per_record`` noisy copies of its class template, so record
    noise shrinks with the pool size the way an averaged sentence vector
    would.  Labels are balanced round-robin.
    """
    if num_records < num_classes or num_classes < 2 or dim < 2:
        raise ParameterError(
            f"degenerate shape: num_records={num_records}, "
            f"num_classes={num_classes}, dim={dim}"
        )
    gen = RngSeed(seed).generator()
    templates = gen.choice([-1.0, 1.0], size=(num_classes, dim))
    records = []
    for i in range(num_records):
        label = i % num_classes
        tokens = templates[label] + token_noise * gen.standard_normal(
            (tokens_per_record, dim)
        )
        records.append(EmbeddingVector(label=label, values=tokens.mean(axis=0)))
    return EmbeddingDataset(records=records, dim=dim, num_classes=num_classes)
