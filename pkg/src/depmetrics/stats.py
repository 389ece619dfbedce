"""Distribution analysis of TOOD and PFET samples."""

import logging
import math
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import stats

from .exceptions import (
    DegenerateInputError,
    EmptyInputError,
    InsufficientDataError,
    ZeroMeanError,
)

logger = logging.getLogger(__name__)


class SampleVector(BaseModel):
    """Labelled sample of non-negative values (days or lifetime ratios)."""

    model_config = ConfigDict(frozen=True)

    values: tuple[float, ...] = Field(..., description="Sample values")
    label: str = Field(..., description="Sample name, e.g. 'tood_days'")

    @field_validator("values")
    @classmethod
    def _finite(cls, values: tuple[float, ...]) -> tuple[float, ...]:
        for value in values:
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"sample values must be finite and non-negative, got {value}")
        return values

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return len(self.values)


class TwoSampleTest(str, Enum):
    """Two-sample tests available to the subsampling protocol."""

    KS = "ks"
    MW = "mw"


class StatsConfig(BaseModel):
    """Parameters of the statistical comparison."""

    alpha: float = Field(0.05, gt=0, lt=1, description="Significance level")
    repetitions: int = Field(1000, gt=0, description="Subsampling repetitions per cell")
    sample_sizes: list[int] = Field(
        default_factory=lambda: [10, 50, 100, 200, 500], description="Subsample sizes"
    )
    max_tood_thresholds: list[float] = Field(
        default_factory=lambda: [800, 1000, 2000, 5000],
        description="Upper caps on TOOD values, in the sample's unit",
    )
    tests: list[TwoSampleTest] = Field(
        default_factory=lambda: [TwoSampleTest.KS, TwoSampleTest.MW],
        description="Tests run in every repetition",
    )
    qq_quantiles: int = Field(101, ge=2, description="Number of quantiles in QQ output")
    rng_seed: int = Field(0, description="Seed for all random draws")


class Description(BaseModel):
    """Summary statistics of one sample."""

    label: str
    count: int
    mean: float
    stddev: float
    min: float
    max: float


class HypothesisResult(BaseModel):
    """Statistic and p-value of a hypothesis test."""

    statistic: float
    p_value: float = Field(..., ge=0, le=1)


class Correlations(BaseModel):
    """Paired correlation coefficients."""

    n: int
    pearson: float
    spearman: float
    kendall_tau_b: float


class SubsampleCell(BaseModel):
    """Aggregated p-values of one (threshold, sample size, test) cell."""

    threshold: float
    sample_size: int
    test: TwoSampleTest
    repetitions: int = Field(..., description="Repetitions actually run")
    median_p: Optional[float] = Field(None, description="Median p-value over repetitions")
    rejection_fraction: Optional[float] = Field(None, description="Share of p-values below alpha")
    status: str = Field("ok", description="'ok' or 'insufficient-data'")


class ExponentialFit(BaseModel):
    """Maximum-likelihood exponential fit with a descriptive goodness-of-fit check."""

    label: str
    n: int
    rate: float = Field(..., gt=0, description="1 / mean")
    ks_statistic: float
    ks_gof_p: float
    note: str = "KS p-value uses a rate fitted on the same sample; read it descriptively"


def _as_array(values: Sequence[float] | SampleVector) -> np.ndarray:
    if isinstance(values, SampleVector):
        return values.array()
    return np.asarray(values, dtype=float)


def describe(v: SampleVector) -> Description:
    """
    Count, mean, sample standard deviation (n - 1), min and max.

    Raises:
        EmptyInputError: If the sample is empty
    """
    data = v.array()
    if data.size == 0:
        raise EmptyInputError(f"describe({v.label})")
    stddev = float(np.std(data, ddof=1)) if data.size > 1 else 0.0
    return Description(
        label=v.label,
        count=int(data.size),
        mean=float(np.mean(data)),
        stddev=stddev,
        min=float(np.min(data)),
        max=float(np.max(data)),
    )


def ecdf_points(v: SampleVector | Sequence[float]) -> list[tuple[float, float]]:
    """
    Right-continuous ECDF steps: one (value, fraction of sample <= value) per
    distinct value.

    Raises:
        EmptyInputError: If the sample is empty
    """
    data = _as_array(v)
    if data.size == 0:
        raise EmptyInputError("ecdf_points")
    result = stats.ecdf(data)
    return [
        (float(x), float(p))
        for x, p in zip(result.cdf.quantiles, result.cdf.probabilities)
    ]


def qq_pairs(
    a: SampleVector | Sequence[float], b: SampleVector | Sequence[float], q: int = 101
) -> list[tuple[float, float]]:
    """
    Matched empirical quantiles of two samples at q evenly spaced probabilities,
    interpolating linearly between order statistics.

    Raises:
        EmptyInputError: If either sample is empty or q < 2
    """
    xa, xb = _as_array(a), _as_array(b)
    if xa.size == 0 or xb.size == 0 or q < 2:
        raise EmptyInputError("qq_pairs")
    probabilities = np.linspace(0.0, 1.0, q)
    qa = np.quantile(xa, probabilities)
    qb = np.quantile(xb, probabilities)
    return [(float(x), float(y)) for x, y in zip(qa, qb)]


def correlations(a: Sequence[float], b: Sequence[float]) -> Correlations:
    """
    Pearson, Spearman and Kendall tau-b of paired samples.

    Raises:
        EmptyInputError: If the samples differ in length or have fewer than 2 pairs
        DegenerateInputError: If either sample is constant
    """
    xa, xb = _as_array(a), _as_array(b)
    if xa.size != xb.size or xa.size < 2:
        raise EmptyInputError("correlations")
    for name, data in (("first", xa), ("second", xb)):
        if np.all(data == data[0]):
            raise DegenerateInputError("correlations", f"{name} sample is constant")
    return Correlations(
        n=int(xa.size),
        pearson=float(np.clip(stats.pearsonr(xa, xb).statistic, -1.0, 1.0)),
        spearman=float(np.clip(stats.spearmanr(xa, xb).statistic, -1.0, 1.0)),
        kendall_tau_b=float(np.clip(stats.kendalltau(xa, xb, variant="b").statistic, -1.0, 1.0)),
    )


def _check_two_samples(xa: np.ndarray, xb: np.ndarray, operation: str):
    if xa.size < 2 or xb.size < 2:
        raise EmptyInputError(operation)


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> HypothesisResult:
    """
    Two-sample Kolmogorov-Smirnov test.

    The p-value comes from the limiting Kolmogorov distribution evaluated at
    sqrt(n * m / (n + m)) * D.

    Raises:
        EmptyInputError: If either sample has fewer than 2 values
    """
    xa, xb = _as_array(a), _as_array(b)
    _check_two_samples(xa, xb, "ks_two_sample")
    statistic = float(stats.ks_2samp(xa, xb, alternative="two-sided").statistic)
    effective_n = xa.size * xb.size / (xa.size + xb.size)
    p_value = float(stats.kstwobign.sf(math.sqrt(effective_n) * statistic))
    return HypothesisResult(statistic=statistic, p_value=float(np.clip(p_value, 0.0, 1.0)))


def mw_u(a: Sequence[float], b: Sequence[float]) -> HypothesisResult:
    """
    Two-sided Mann-Whitney U test, normal approximation with tie and continuity
    correction. The statistic is U of the first sample.

    Raises:
        EmptyInputError: If either sample has fewer than 2 values
    """
    xa, xb = _as_array(a), _as_array(b)
    _check_two_samples(xa, xb, "mw_u")
    result = stats.mannwhitneyu(
        xa, xb, alternative="two-sided", use_continuity=True, method="asymptotic"
    )
    return HypothesisResult(
        statistic=float(result.statistic), p_value=float(np.clip(result.pvalue, 0.0, 1.0))
    )


_TESTS = {TwoSampleTest.KS: ks_two_sample, TwoSampleTest.MW: mw_u}


def subsample_protocol(
    tood: SampleVector, pfet: SampleVector, cfg: StatsConfig
) -> list[SubsampleCell]:
    """
    Repeated-subsampling comparison of two samples.

    For every threshold the TOOD sample is cut to values <= threshold; the PFET
    sample is used whole. For every sample size and repetition, that many values are
    drawn without replacement from each sample and every configured test is run.
    Each cell reports the median p-value and the share of repetitions rejecting at
    alpha. Cells where either sample is smaller than the sample size are reported as
    'insufficient-data'.

    Repetition r draws from a generator seeded with (rng_seed, r), so results do not
    depend on evaluation order.
    """
    xt, xp = tood.array(), pfet.array()
    if xt.size == 0 or xp.size == 0:
        raise EmptyInputError("subsample_protocol")

    sorted_p = np.sort(xp)
    cells: list[SubsampleCell] = []
    for threshold in cfg.max_tood_thresholds:
        capped_t = np.sort(xt[xt <= threshold])
        for n in cfg.sample_sizes:
            try:
                for label, sample in ((tood.label, capped_t), (pfet.label, sorted_p)):
                    if sample.size < max(n, 2):
                        raise InsufficientDataError(label, int(sample.size), n)
            except InsufficientDataError as e:
                logger.debug(f"Cell threshold={threshold} n={n}: {e.message}")
                cells.extend(
                    SubsampleCell(
                        threshold=threshold,
                        sample_size=n,
                        test=test,
                        repetitions=0,
                        status="insufficient-data",
                    )
                    for test in cfg.tests
                )
                continue

            p_values: dict[TwoSampleTest, list[float]] = {test: [] for test in cfg.tests}
            for rep in range(cfg.repetitions):
                rng = np.random.default_rng([cfg.rng_seed, rep])
                draw_t = rng.choice(capped_t, size=n, replace=False)
                draw_p = rng.choice(sorted_p, size=n, replace=False)
                for test in cfg.tests:
                    p_values[test].append(_TESTS[test](draw_t, draw_p).p_value)

            for test in cfg.tests:
                values = np.asarray(p_values[test])
                cells.append(
                    SubsampleCell(
                        threshold=threshold,
                        sample_size=n,
                        test=test,
                        repetitions=cfg.repetitions,
                        median_p=float(np.median(values)),
                        rejection_fraction=float(np.mean(values < cfg.alpha)),
                    )
                )
    logger.info(f"Subsampling produced {len(cells)} cells")
    return cells


def fit_exponential(v: SampleVector) -> ExponentialFit:
    """
    Fit an exponential distribution by maximum likelihood (rate = 1 / mean) and run
    a one-sample KS test against it.

    Raises:
        EmptyInputError: If the sample is empty
        ZeroMeanError: If the sample mean is zero
    """
    data = v.array()
    if data.size == 0:
        raise EmptyInputError(f"fit_exponential({v.label})")
    mean = float(np.mean(data))
    if mean <= 0:
        raise ZeroMeanError(v.label)
    result = stats.kstest(data, "expon", args=(0.0, mean))
    return ExponentialFit(
        label=v.label,
        n=int(data.size),
        rate=1.0 / mean,
        ks_statistic=float(result.statistic),
        ks_gof_p=float(result.pvalue),
    )
