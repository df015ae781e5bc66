"""Readers and writers for the pipeline's on-disk formats.

All files are UTF-8 with LF line endings.

* Embedding file: ``#emb dim=<r> classes=<C>`` header, then one record
  per line as ``<label>\\t<v1>,<v2>,...``.
* Bit file: ``#bits len=<n> classes=<C>`` header, then ``<label>\\t<0/1
  string>`` per line.
* Experiment config and report: flat ``key = value`` lines, full-line
  ``#`` comments.
* Curves file: tab-separated probability table.
"""

from __future__ import annotations

import dataclasses
import os
import re
from dataclasses import dataclass

import numpy as np

from .codec import BitVector, EmbeddingVector
from .errors import ParameterError, ParseError

__all__ = [
    "EmbeddingDataset",
    "BitDataset",
    "load_embeddings",
    "write_embeddings",
    "load_bits",
    "write_bits",
    "parse_config",
    "format_report",
    "write_report",
    "read_report",
    "SEED_ENV_VAR",
]

SEED_ENV_VAR = "LDPREPR_SEED"

_EMB_HEADER = re.compile(r"^#emb dim=(\d+) classes=(\d+)$")
_BITS_HEADER = re.compile(r"^#bits len=(\d+) classes=(\d+)$")


@dataclass
class EmbeddingDataset:
    """Parsed embedding file: uniform-width records plus the class count."""

    records: list
    dim: int
    num_classes: int


@dataclass
class BitDataset:
    """Parsed bit file: fixed-length bit records plus the class count."""

    records: list
    length: int
    num_classes: int


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8", newline="") as handle:
        return handle.read().split("\n")


def _parse_label(path: str, lineno: int, text: str, num_classes: int) -> int:
    try:
        label = int(text)
    except ValueError:
        raise ParseError(path, lineno, f"label {text!r} is not an integer") from None
    if not 0 <= label < num_classes:
        raise ParseError(
            path, lineno, f"label {label} outside [0, {num_classes})"
        )
    return label


def load_embeddings(path: str) -> EmbeddingDataset:
    """Parse an embedding file, validating dimensions, labels, and finiteness."""
    lines = _read_lines(path)
    if not lines or not lines[0]:
        raise ParseError(path, 1, "missing '#emb dim=<r> classes=<C>' header")
    match = _EMB_HEADER.match(lines[0])
    if match is None:
        raise ParseError(path, 1, f"malformed header {lines[0]!r}")
    dim, num_classes = int(match.group(1)), int(match.group(2))
    if dim < 2 or num_classes < 2:
        raise ParseError(path, 1, f"need dim >= 2 and classes >= 2, got {lines[0]!r}")

    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(path, lineno, f"expected '<label>\\t<values>', got {line!r}")
        label = _parse_label(path, lineno, parts[0], num_classes)
        fields = parts[1].split(",")
        if len(fields) != dim:
            raise ParseError(path, lineno, f"expected {dim} values, got {len(fields)}")
        try:
            values = np.array([float(f) for f in fields], dtype=np.float64)
        except ValueError:
            raise ParseError(path, lineno, "non-numeric value") from None
        if not np.all(np.isfinite(values)):
            raise ParseError(path, lineno, "non-finite value")
        records.append(EmbeddingVector(label=label, values=values))
    if not records:
        raise ParseError(path, 2, "no data rows")
    return EmbeddingDataset(records=records, dim=dim, num_classes=num_classes)


def write_embeddings(dataset: EmbeddingDataset, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"#emb dim={dataset.dim} classes={dataset.num_classes}\n")
        for record in dataset.records:
            values = ",".join(repr(float(v)) for v in record.values)
            handle.write(f"{record.label}\t{values}\n")


def load_bits(path: str) -> BitDataset:
    """Parse a bit file, validating row lengths and the 0/1 alphabet."""
    lines = _read_lines(path)
    if not lines or not lines[0]:
        raise ParseError(path, 1, "missing '#bits len=<n> classes=<C>' header")
    match = _BITS_HEADER.match(lines[0])
    if match is None:
        raise ParseError(path, 1, f"malformed header {lines[0]!r}")
    length, num_classes = int(match.group(1)), int(match.group(2))

    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(path, lineno, f"expected '<label>\\t<bits>', got {line!r}")
        label = _parse_label(path, lineno, parts[0], num_classes)
        text = parts[1]
        if len(text) != length:
            raise ParseError(path, lineno, f"expected {length} bits, got {len(text)}")
        if text.strip("01"):
            raise ParseError(path, lineno, "bit string may contain only 0 and 1")
        bits = np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0")
        records.append(BitVector(label=label, bits=bits))
    if not records:
        raise ParseError(path, 2, "no data rows")
    return BitDataset(records=records, length=length, num_classes=num_classes)


def write_bits(dataset: BitDataset, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"#bits len={dataset.length} classes={dataset.num_classes}\n")
        for record in dataset.records:
            text = "".join("1" if b else "0" for b in record.bits)
            handle.write(f"{record.label}\t{text}\n")


# Experiment config files ------------------------------------------------

_CONFIG_KEYS = {
    # config key -> (dataclass field, parser)
    "mode": ("mode", str),
    "protocol": ("protocol", str),
    "epsilon": ("epsilon", float),
    "lambda": ("lam", float),
    "int_bits": ("int_bits", int),
    "frac_bits": ("frac_bits", int),
    "hidden_units": ("hidden_units", int),
    "dropout_rate": ("dropout_rate", float),
    "learning_rate": ("learning_rate", float),
    "decay": ("decay", float),
    "momentum": ("momentum", float),
    "batch_size": ("batch_size", int),
    "epochs": ("epochs", int),
    "split_ratio": ("split_ratio", float),
    "runs": ("runs", int),
    "base_seed": ("base_seed", int),
    "input_path": ("input_path", str),
    "output_path": ("output_path", str),
}


def parse_config(path: str):
    """Parse a flat ``key = value`` experiment config file.

    The ``LDPREPR_SEED`` environment variable, when set, overrides any
    ``base_seed`` from the file.
    """
    from .pipeline import ExperimentConfig

    fields = {}
    for lineno, raw in enumerate(_read_lines(path), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(path, lineno, f"expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_KEYS:
            raise ParseError(path, lineno, f"unknown config key {key!r}")
        field_name, parser = _CONFIG_KEYS[key]
        try:
            fields[field_name] = parser(value)
        except ValueError:
            raise ParseError(path, lineno, f"bad value {value!r} for {key!r}") from None
    for required in ("mode", "input_path", "output_path"):
        if required not in fields:
            raise ParseError(path, 1, f"missing required key {required!r}")

    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        try:
            fields["base_seed"] = int(env_seed)
        except ValueError:
            raise ParameterError(
                f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}"
            ) from None
    return ExperimentConfig(**fields)


# Report files -----------------------------------------------------------

def _format_value(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def format_report(report) -> str:
    """Render a report as ``key = value`` lines (wall clock last)."""
    lines = ["# ldprepr experiment report"]
    for spec_field in dataclasses.fields(report.config):
        key = "lambda" if spec_field.name == "lam" else spec_field.name
        lines.append(f"{key} = {_format_value(getattr(report.config, spec_field.name))}")
    for name, value in report.probabilities.items():
        lines.append(f"{name} = {_format_value(value)}")
    for k, accuracy in enumerate(report.accuracies):
        lines.append(f"run_{k}_accuracy = {_format_value(accuracy)}")
    lines.append(f"mean_accuracy = {_format_value(report.mean_accuracy)}")
    lines.append(f"std_accuracy = {_format_value(report.std_accuracy)}")
    lines.append(f"duration_seconds = {_format_value(report.duration_seconds)}")
    return "\n".join(lines) + "\n"


def write_report(report, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(format_report(report))


def read_report(path: str) -> dict[str, str]:
    """Parse a report file back into a flat string dict."""
    values = {}
    for lineno, raw in enumerate(_read_lines(path), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(path, lineno, f"expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values
