"""Fixed-point binary codec for real-valued embedding vectors.

Each real value becomes ``1 + int_bits + frac_bits`` bits: a sign bit
(1 for negative, 0 otherwise), then the integer part and the fraction
part of the magnitude, both big-endian.  Magnitudes above the largest
representable value ``2**int_bits - 2**-frac_bits`` saturate, and the
fraction is truncated rather than rounded, so decoding recovers the
clamped input to within ``2**-frac_bits``.

Vectors are z-score normalized (mean 0, population std 1, computed over
the vector's own elements) before encoding, then the per-element codes
are concatenated into one bit vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import ParameterError, ShapeError

__all__ = [
    "CodecLayout",
    "EmbeddingVector",
    "BitVector",
    "zscore_normalize",
    "normalize_rows",
    "encode_value",
    "decode_value",
    "encode_vector",
    "encode_matrix",
    "decode_matrix",
    "FixedPointEncoder",
]


@dataclass(frozen=True)
class CodecLayout:
    """Bit layout for one encoded vector.

    ``num_values`` elements are each encoded into
    ``1 + int_bits + frac_bits`` bits.  The total bit count must be even
    because the randomization protocols treat even and odd positions as
    two equal halves.
    """

    int_bits: int
    frac_bits: int
    num_values: int

    def __post_init__(self):
        if self.int_bits < 1 or self.frac_bits < 1:
            raise ParameterError(
                f"need at least one integer and one fraction bit, got "
                f"int_bits={self.int_bits}, frac_bits={self.frac_bits}"
            )
        if self.num_values < 1:
            raise ParameterError(f"num_values must be >= 1, got {self.num_values}")
        if self.total_bits % 2 != 0:
            raise ParameterError(
                f"total bit count {self.total_bits} must be even "
                f"(num_values={self.num_values} x bits_per_value={self.bits_per_value})"
            )

    @property
    def bits_per_value(self) -> int:
        return 1 + self.int_bits + self.frac_bits

    @property
    def total_bits(self) -> int:
        return self.num_values * self.bits_per_value

    @property
    def max_magnitude(self) -> float:
        """Largest encodable magnitude; inputs beyond it saturate."""
        return 2.0**self.int_bits - 2.0**-self.frac_bits


@dataclass
class EmbeddingVector:
    """One record: a class label and a real-valued vector."""

    label: int
    values: np.ndarray


@dataclass
class BitVector:
    """One record in encoded form: a class label and a 0/1 bit array."""

    label: int
    bits: np.ndarray


def zscore_normalize(values) -> np.ndarray:
    """Shift and scale a vector to mean 0 and population std 1.

    Statistics are computed over this vector's own elements.  A constant
    vector maps to all zeros.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise ParameterError(f"need a 1-d vector of length >= 2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError("values must be finite")
    std = arr.std()
    if std == 0.0:
        return np.zeros_like(arr)
    return (arr - arr.mean()) / std


def encode_value(x: float, layout: CodecLayout) -> np.ndarray:
    """Encode one real number into ``layout.bits_per_value`` bits.

    Bit 0 is the sign (1 for negative; -0.0 counts as non-negative).
    The remaining bits hold the saturated magnitude, scaled by
    ``2**frac_bits`` and truncated to an integer, in big-endian order.
    """
    if not math.isfinite(x):
        raise ParameterError(f"cannot encode non-finite value {x!r}")
    sign = 1 if x < 0 else 0
    magnitude = min(abs(x), layout.max_magnitude)
    # Scaling by a power of two is exact in binary floating point, so
    # int() truncates the true binary expansion at frac_bits places.
    scaled = int(magnitude * 2.0**layout.frac_bits)
    width = layout.int_bits + layout.frac_bits
    bits = np.empty(layout.bits_per_value, dtype=np.uint8)
    bits[0] = sign
    for i in range(width):
        bits[1 + i] = (scaled >> (width - 1 - i)) & 1
    return bits


def decode_value(bits, layout: CodecLayout) -> float:
    """Inverse of :func:`encode_value` for already-quantized values."""
    arr = np.asarray(bits)
    if arr.ndim != 1 or arr.size != layout.bits_per_value:
        raise ShapeError(
            f"expected {layout.bits_per_value} bits, got shape {arr.shape}"
        )
    scaled = 0
    for b in arr[1:]:
        scaled = (scaled << 1) | int(b)
    value = scaled / 2.0**layout.frac_bits
    return -value if arr[0] else value


def encode_vector(vec: EmbeddingVector, layout: CodecLayout) -> BitVector:
    """Normalize, encode element-wise, and concatenate into one bit vector."""
    values = np.asarray(vec.values, dtype=np.float64)
    if values.ndim != 1 or values.size != layout.num_values:
        raise ShapeError(
            f"expected {layout.num_values} values, got shape {values.shape}"
        )
    normalized = zscore_normalize(values)
    bits = np.concatenate([encode_value(float(z), layout) for z in normalized])
    return BitVector(label=vec.label, bits=bits)


def normalize_rows(X) -> np.ndarray:
    """Row-wise :func:`zscore_normalize` over a matrix."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] < 2:
        raise ParameterError(f"need a 2-d matrix with >= 2 columns, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ParameterError("values must be finite")
    mean = X.mean(axis=1, keepdims=True)
    std = X.std(axis=1, keepdims=True)
    safe = np.where(std == 0.0, 1.0, std)
    return np.where(std == 0.0, 0.0, (X - mean) / safe)


def encode_matrix(X, layout: CodecLayout, normalize: bool = True) -> np.ndarray:
    """Vectorized :func:`encode_vector` over the rows of a matrix.

    Returns a ``(n_rows, layout.total_bits)`` uint8 array.  Row i equals
    ``encode_vector(EmbeddingVector(_, X[i]), layout).bits`` bit for bit
    when ``normalize`` is left on.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != layout.num_values:
        raise ShapeError(f"expected (n, {layout.num_values}) input, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ParameterError("values must be finite")
    if normalize:
        X = normalize_rows(X)
    sign = (X < 0).astype(np.uint8)
    magnitude = np.minimum(np.abs(X), layout.max_magnitude)
    scaled = np.floor(magnitude * 2.0**layout.frac_bits).astype(np.int64)
    width = layout.int_bits + layout.frac_bits
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    value_bits = ((scaled[:, :, None] >> shifts) & 1).astype(np.uint8)
    codes = np.concatenate([sign[:, :, None], value_bits], axis=2)
    return codes.reshape(X.shape[0], layout.total_bits)


def decode_matrix(B, layout: CodecLayout) -> np.ndarray:
    """Decode a ``(n_rows, total_bits)`` bit matrix back to quantized reals."""
    B = np.asarray(B)
    if B.ndim != 2 or B.shape[1] != layout.total_bits:
        raise ShapeError(f"expected (n, {layout.total_bits}) input, got {B.shape}")
    codes = B.reshape(B.shape[0], layout.num_values, layout.bits_per_value)
    width = layout.int_bits + layout.frac_bits
    weights = 2.0 ** np.arange(width - 1, -1, -1, dtype=np.float64)
    magnitude = codes[:, :, 1:].astype(np.float64) @ weights / 2.0**layout.frac_bits
    return np.where(codes[:, :, 0] == 1, -magnitude, magnitude)


class FixedPointEncoder(TransformerMixin, BaseEstimator):
    """Transformer mapping real matrices to fixed-point bit matrices.

    Stateless apart from recording the input width at fit time; composes
    with scikit-learn pipelines.

    Parameters
    ----------
    int_bits, frac_bits:
        Bit budget per element on top of the sign bit.
    normalize:
        Apply per-row z-score normalization before encoding.
    """

    def __init__(self, int_bits: int = 4, frac_bits: int = 5, normalize: bool = True):
        self.int_bits = int_bits
        self.frac_bits = frac_bits
        self.normalize = normalize

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.n_features_in_ = X.shape[1]
        self.layout_ = CodecLayout(self.int_bits, self.frac_bits, X.shape[1])
        return self

    def transform(self, X):
        check_is_fitted(self, "layout_")
        X = check_array(X, dtype=np.float64)
        return encode_matrix(X, self.layout_, normalize=self.normalize)

    def inverse_transform(self, B):
        check_is_fitted(self, "layout_")
        B = check_array(B)
        return decode_matrix(B, self.layout_)
