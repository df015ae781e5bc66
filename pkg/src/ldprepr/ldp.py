"""Randomized response over bit vectors: the OME, SUE, and OUE protocols.

Every protocol resamples each bit independently.  A bit of 1 survives
with probability p (possibly position-dependent), a bit of 0 flips to 1
with probability q:

* SUE:  p = e^(eps/df) / (1 + e^(eps/df)),  q = 1 - p.
* OUE:  p = 1/2,  q = 1 / (1 + e^(eps/df)).
* OME:  a randomization factor lam >= 1 steers the probabilities.
  Ones at even positions survive with p1 = lam / (1 + lam), ones at odd
  positions with p2 = 1 / (1 + lam^3), and zeros flip with
  q = 1 / (1 + lam * e^(eps/sensitivity)).

For OME the likelihood ratio of any two length-``sensitivity`` inputs
factors into paired per-parity products

    (p1/(1-p1)) * ((1-q)/q) = lam^2 * e^(eps/sensitivity)
    (p2/(1-p2)) * ((1-q)/q) = e^(eps/sensitivity) / lam^2

whose product over sensitivity/2 position pairs is exactly e^eps, so
the release satisfies the eps log-likelihood-ratio bound.
:func:`paired_product_epsilon` recomputes that exponent from the stored
probabilities; :func:`audit_max_log_ratio` reports the blunter per-bit
worst case for comparison.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .codec import BitVector
from .errors import ParameterError, ShapeError

__all__ = [
    "RngSeed",
    "derive_seed",
    "OmeParams",
    "UeParams",
    "ome_params",
    "ome_params_for_sensitivity",
    "sue_params",
    "oue_params",
    "ome_position_probs",
    "perturb_ome",
    "perturb_ue",
    "paired_product_epsilon",
    "audit_max_log_ratio",
    "RateEstimate",
    "empirical_flip_rates",
    "BitRandomizer",
]

PROTOCOLS = ("ome", "sue", "oue")


def derive_seed(seed: int, index: int) -> int:
    """Stable 64-bit hash of (seed, index) for independent child streams."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class RngSeed:
    """Seed plus sub-stream index; the pair fully determines a bit stream.

    Distinct streams under one seed are mutually independent, so records
    may be randomized in parallel and in any order without changing the
    result.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.stream < 0:
            raise ParameterError(
                f"seed and stream must be non-negative, got ({self.seed}, {self.stream})"
            )

    def generator(self) -> np.random.Generator:
        return np.random.default_rng([self.seed, self.stream])

    def child(self, index: int) -> "RngSeed":
        """Independent child seed; children with distinct indices never collide."""
        return RngSeed(derive_seed(self.seed, self.stream), index)


@dataclass(frozen=True)
class OmeParams:
    """Resolved OME probabilities.

    Plain record: construct through :func:`ome_params` for validated,
    self-consistent values.  ``sensitivity`` is the bit length of the
    vectors the parameters were derived for.
    """

    epsilon: float
    lam: float
    sensitivity: int
    p1: float
    p2: float
    q: float


@dataclass(frozen=True)
class UeParams:
    """Resolved SUE or OUE probabilities (see :func:`sue_params`, :func:`oue_params`)."""

    epsilon: float
    sensitivity: int
    p: float
    q: float
    variant: str


def _check_epsilon(epsilon: float) -> None:
    if not (isinstance(epsilon, (int, float)) and math.isfinite(epsilon) and epsilon > 0):
        raise ParameterError(f"epsilon must be a positive finite number, got {epsilon!r}")


def ome_params_for_sensitivity(epsilon: float, lam: float, sensitivity: int) -> OmeParams:
    """Compute OME probabilities for a bit vector of the given even length.

    Requires ``epsilon > 0`` and ``lam >= 1``; the length must be even
    because the protocol splits positions into two equal parity classes.
    """
    _check_epsilon(epsilon)
    if not (math.isfinite(lam) and lam >= 1):
        raise ParameterError(f"lam must be >= 1, got {lam!r}")
    if sensitivity < 2 or sensitivity % 2 != 0:
        raise ParameterError(f"sensitivity must be even and positive, got {sensitivity}")
    # exp(-t) keeps the quotient finite for arbitrarily large budgets.
    decay = math.exp(-epsilon / sensitivity)
    return OmeParams(
        epsilon=float(epsilon),
        lam=float(lam),
        sensitivity=int(sensitivity),
        p1=lam / (1.0 + lam),
        p2=1.0 / (1.0 + lam**3),
        q=decay / (decay + lam),
    )


def ome_params(epsilon: float, lam: float, num_values: int, bits_per_value: int) -> OmeParams:
    """Compute OME probabilities for ``num_values`` elements of ``bits_per_value`` bits."""
    if num_values < 1 or bits_per_value < 1:
        raise ParameterError(
            f"counts must be >= 1, got num_values={num_values}, "
            f"bits_per_value={bits_per_value}"
        )
    return ome_params_for_sensitivity(epsilon, lam, num_values * bits_per_value)


def sue_params(epsilon: float, delta_f: int) -> UeParams:
    """Symmetric unary encoding: a 1 and a 0 are preserved equally often.

    q = 1 / (1 + e^(eps/delta_f)) and p = 1 - q, so p + q == 1 exactly.
    """
    _check_epsilon(epsilon)
    if delta_f < 1:
        raise ParameterError(f"delta_f must be >= 1, got {delta_f}")
    decay = math.exp(-epsilon / delta_f)
    q = decay / (1.0 + decay)
    return UeParams(
        epsilon=float(epsilon), sensitivity=int(delta_f), p=1.0 - q, q=q, variant="sue"
    )


def oue_params(epsilon: float, delta_f: int) -> UeParams:
    """Optimized unary encoding: p pinned at 1/2, budget spent on the zeros."""
    _check_epsilon(epsilon)
    if delta_f < 1:
        raise ParameterError(f"delta_f must be >= 1, got {delta_f}")
    decay = math.exp(-epsilon / delta_f)
    return UeParams(
        epsilon=float(epsilon), sensitivity=int(delta_f), p=0.5,
        q=decay / (1.0 + decay), variant="oue"
    )


def ome_position_probs(params: OmeParams, length: int | None = None) -> np.ndarray:
    """Per-position probability that a 1 survives: p1 at even indices, p2 at odd."""
    n = params.sensitivity if length is None else length
    probs = np.empty(n, dtype=np.float64)
    probs[0::2] = params.p1
    probs[1::2] = params.p2
    return probs


def _check_bits(bits: np.ndarray) -> np.ndarray:
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ShapeError(f"bits must be 1-d, got shape {arr.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise ParameterError("bits must contain only 0 and 1")
    return arr.astype(np.uint8, copy=False)


def _resample(bits: np.ndarray, keep: np.ndarray | float, q: float,
              gen: np.random.Generator) -> np.ndarray:
    u = gen.random(bits.size)
    return np.where(bits == 1, u < keep, u < q).astype(np.uint8)


def perturb_ome(bits: BitVector, params: OmeParams, rng: RngSeed) -> BitVector:
    """Randomize one bit vector under OME.

    The vector length must equal ``params.sensitivity``; the privacy
    argument pairs even and odd positions across exactly that many bits.
    Deterministic given (seed, stream).
    """
    arr = _check_bits(bits.bits)
    if arr.size != params.sensitivity:
        raise ShapeError(
            f"bit vector length {arr.size} != sensitivity {params.sensitivity}"
        )
    keep = ome_position_probs(params, arr.size)
    out = _resample(arr, keep, params.q, rng.generator())
    return BitVector(label=bits.label, bits=out)


def perturb_ue(bits: BitVector, params: UeParams, rng: RngSeed) -> BitVector:
    """Randomize one bit vector under SUE or OUE (single p at every position).

    Unlike OME, the vector length is decoupled from ``params.sensitivity``:
    the unary-encoding sensitivity counts differing positions between two
    inputs, not the transmitted length.
    """
    arr = _check_bits(bits.bits)
    out = _resample(arr, params.p, params.q, rng.generator())
    return BitVector(label=bits.label, bits=out)


def paired_product_epsilon(params: OmeParams) -> float:
    """Privacy exponent recovered from the stored OME probabilities.

    Evaluates (sensitivity/2) * [ln(p1(1-q)/((1-p1)q)) + ln(p2(1-q)/((1-p2)q))]
    in log space; equals epsilon analytically for parameters produced by
    :func:`ome_params`.
    """
    for name, value in (("p1", params.p1), ("p2", params.p2), ("q", params.q)):
        if not 0.0 < value < 1.0:
            raise ParameterError(f"{name} must be in (0, 1), got {value!r}")
    log_odds_q = math.log1p(-params.q) - math.log(params.q)
    pair_even = math.log(params.p1) - math.log1p(-params.p1) + log_odds_q
    pair_odd = math.log(params.p2) - math.log1p(-params.p2) + log_odds_q
    return params.sensitivity / 2.0 * (pair_even + pair_odd)


def audit_max_log_ratio(p_at_index, q: float, length: int) -> float:
    """Worst-case log-likelihood ratio when two inputs differ everywhere.

    Sums max(|ln(p_i/q)|, |ln((1-q)/(1-p_i))|) over all positions, the
    largest per-bit evidence an observer can extract.  This is blunter
    than the paired-product bound and is reported alongside it.
    """
    if length < 1:
        raise ParameterError(f"length must be >= 1, got {length}")
    p = np.broadcast_to(np.asarray(p_at_index, dtype=np.float64), (length,))
    if not ((p > 0.0) & (p < 1.0)).all():
        raise ParameterError("per-position probabilities must be in (0, 1)")
    if not 0.0 < q < 1.0:
        raise ParameterError(f"q must be in (0, 1), got {q!r}")
    ratio_ones = np.abs(np.log(p) - math.log(q))
    ratio_zeros = np.abs(math.log1p(-q) - np.log1p(-p))
    return float(np.sum(np.maximum(ratio_ones, ratio_zeros)))


@dataclass(frozen=True)
class RateEstimate:
    """Monte Carlo estimate of one transition probability."""

    value: float
    stderr: float
    trials: int


def empirical_flip_rates(protocol: str, params, trials: int,
                         rng: RngSeed) -> dict[str, RateEstimate]:
    """Estimate every transition probability of a protocol by simulation.

    Runs at least ``trials`` Bernoulli draws per estimated probability by
    perturbing all-ones and all-zeros vectors through the real perturbation
    path.  Returns {"p1", "p2", "q"} for OME and {"p", "q"} for SUE/OUE,
    each with a binomial standard error.  Deterministic given ``rng``.
    """
    if trials < 10_000:
        raise ParameterError(f"need at least 10^4 trials, got {trials}")
    if protocol not in PROTOCOLS:
        raise ParameterError(f"unknown protocol {protocol!r}")
    if protocol == "ome" and not isinstance(params, OmeParams):
        raise ParameterError("protocol 'ome' requires OmeParams")
    if protocol in ("sue", "oue") and not isinstance(params, UeParams):
        raise ParameterError(f"protocol {protocol!r} requires UeParams")

    length = params.sensitivity
    ones = BitVector(label=0, bits=np.ones(length, dtype=np.uint8))
    zeros = BitVector(label=0, bits=np.zeros(length, dtype=np.uint8))

    def estimate(count: int, n: int) -> RateEstimate:
        value = count / n
        return RateEstimate(value=value, stderr=math.sqrt(value * (1 - value) / n), trials=n)

    if protocol == "ome":
        per_row = length // 2
        rows = -(-trials // per_row)
        even_kept = odd_kept = 0
        for i in range(rows):
            out = perturb_ome(ones, params, rng.child(i)).bits
            even_kept += int(out[0::2].sum())
            odd_kept += int(out[1::2].sum())
        rows_zero = -(-trials // length)
        flipped = 0
        for j in range(rows_zero):
            out = perturb_ome(zeros, params, rng.child(rows + j)).bits
            flipped += int(out.sum())
        return {
            "p1": estimate(even_kept, rows * (length - per_row)),
            "p2": estimate(odd_kept, rows * per_row),
            "q": estimate(flipped, rows_zero * length),
        }

    rows = -(-trials // length)
    kept = flipped = 0
    for i in range(rows):
        kept += int(perturb_ue(ones, params, rng.child(i)).bits.sum())
        flipped += int(perturb_ue(zeros, params, rng.child(rows + i)).bits.sum())
    n = rows * length
    return {"p": estimate(kept, n), "q": estimate(flipped, n)}


class BitRandomizer(TransformerMixin, BaseEstimator):
    """Transformer perturbing each row of a bit matrix under one protocol.

    Each row is randomized on a stream keyed by (seed, row content), a
    memoized randomized response: the same record always yields the same
    release, while any two distinct records draw independent noise.  This
    keeps train and test noise uncorrelated inside a fitted pipeline and
    makes the output independent of row order and batch boundaries.

    Parameters
    ----------
    protocol:
        "ome", "sue", or "oue".
    epsilon:
        Privacy budget, > 0.
    lam:
        OME randomization factor, >= 1 (ignored by SUE/OUE).
    delta_f:
        Unary-encoding sensitivity (required for SUE/OUE).
    seed:
        Base seed mixed into every row stream.
    """

    def __init__(self, protocol: str = "ome", epsilon: float = 1.0,
                 lam: float = 100.0, delta_f: int | None = None, seed: int = 0):
        self.protocol = protocol
        self.epsilon = epsilon
        self.lam = lam
        self.delta_f = delta_f
        self.seed = seed

    def fit(self, X, y=None):
        X = check_array(X)
        width = X.shape[1]
        if self.protocol == "ome":
            self.params_ = ome_params_for_sensitivity(self.epsilon, self.lam, width)
        elif self.protocol in ("sue", "oue"):
            if self.delta_f is None:
                raise ParameterError(f"protocol {self.protocol!r} requires delta_f")
            factory = sue_params if self.protocol == "sue" else oue_params
            self.params_ = factory(self.epsilon, self.delta_f)
        else:
            raise ParameterError(f"unknown protocol {self.protocol!r}")
        self.n_features_in_ = width
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        X = check_array(X)
        if not np.isin(X, (0, 1)).all():
            raise ParameterError("bits must contain only 0 and 1")
        bits = X.astype(np.uint8)
        perturb = perturb_ome if self.protocol == "ome" else perturb_ue
        out = np.empty(bits.shape, dtype=np.uint8)
        for i in range(bits.shape[0]):
            content = int.from_bytes(
                hashlib.blake2b(bits[i].tobytes(), digest_size=8).digest(), "big"
            )
            record = BitVector(label=0, bits=bits[i])
            out[i] = perturb(record, self.params_, RngSeed(self.seed, content)).bits
        return out
