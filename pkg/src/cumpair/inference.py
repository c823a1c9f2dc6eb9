"""Bootstrap sign tests and the pair decision.

Procedure for one dataset:

1. Draw ``B`` resamples of size ``m = floor(m_fraction * n)`` with
   replacement and evaluate the edge statistic on each.
2. Sign-test the replicates for median zero.  Not rejected: no edge.
3. Otherwise test the two direction residuals the same way.  The direction
   whose residual is not rejected while the other one is becomes the verdict.

Every resample re-estimates the cumulants and re-solves the ratio quadratic.
"""

from __future__ import annotations

import enum
import logging
import math
import warnings
from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from cumpair import discovery
from cumpair.cumulants import PairedSample, cumulant_profile
from cumpair.discovery import ConfounderCoefficients, RatioPair
from cumpair.errors import CumpairError, TooManyFailedReplicates
from cumpair.model import make_rng

log = logging.getLogger(__name__)

DEFAULT_ALPHA = 1e-4
# Smallest sample size used in the reference simulations.
SMALL_SAMPLE_WARNING = 5000


class Verdict(str, enum.Enum):
    NO_EDGE = "NoEdge"
    X_TO_Y = "XtoY"
    Y_TO_X = "YtoX"
    BOTH_ACCEPTED = "InconclusiveBothAccepted"
    BOTH_REJECTED = "InconclusiveBothRejected"

    @property
    def definitive(self) -> bool:
        return self in (Verdict.NO_EDGE, Verdict.X_TO_Y, Verdict.Y_TO_X)

    def mirrored(self) -> Verdict:
        if self is Verdict.X_TO_Y:
            return Verdict.Y_TO_X
        if self is Verdict.Y_TO_X:
            return Verdict.X_TO_Y
        return self


class DirectionRule(str, enum.Enum):
    """How the two direction tests are turned into a verdict.

    ``four_outcome`` accepts a direction only when its residual test is not
    rejected and the opposite one is.  ``pvalue`` picks the direction whose
    residual test has the larger p-value; equal p-values are inconclusive.
    The benchmark scores Case 2 accuracy with ``pvalue``.
    """

    FOUR_OUTCOME = "four_outcome"
    PVALUE = "pvalue"


@dataclass(frozen=True)
class BootstrapConfig:
    m_fraction: float = 0.8
    B: int = 30
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.m_fraction <= 1.0:
            raise ValueError(f"m_fraction must lie in (0, 1], got {self.m_fraction}")
        if self.B < 1:
            raise ValueError(f"B must be positive, got {self.B}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def resample_size(self, n: int) -> int:
        m = math.floor(self.m_fraction * n)
        if m < 2:
            raise ValueError(f"resample size floor({self.m_fraction} * {n}) is below 2")
        return m


@dataclass(frozen=True)
class SignTestResult:
    positives: int
    negatives: int
    zeros: int
    p_value: float
    all_zero: bool = False

    def rejects(self, alpha: float) -> bool:
        # p <= alpha so that alpha = 1 rejects every null.
        return self.p_value <= alpha


def resample_indices(n: int, config: BootstrapConfig, replicate: int) -> np.ndarray:
    return make_rng(config.seed, replicate).integers(0, n, size=config.resample_size(n))


def bootstrap_statistics(
    sample: PairedSample,
    statistic: Callable[[PairedSample], float],
    config: BootstrapConfig = BootstrapConfig(),
) -> np.ndarray:
    """Evaluate ``statistic`` on ``config.B`` bootstrap resamples.

    Replicate ``r`` draws its indices from the stream ``(config.seed, r)``.
    Replicates whose statistic raises a :class:`CumpairError` are stored as
    NaN.  A statistic returning a tuple gives a ``(B, k)`` array, and a
    component may itself be NaN to mark a partial failure.
    """
    values = []
    failed = 0
    for r in range(config.B):
        idx = resample_indices(sample.n, config, r)
        try:
            values.append(statistic(sample.take(idx)))
        except CumpairError as exc:
            log.debug("replicate %d failed: %s", r, exc)
            values.append(None)
            failed += 1
    if failed > config.B / 2:
        raise TooManyFailedReplicates(f"{failed} of {config.B} bootstrap replicates failed")
    first = next(v for v in values if v is not None)
    shape = (config.B,) + np.shape(first)
    out = np.full(shape, np.nan)
    for r, v in enumerate(values):
        if v is not None:
            out[r] = v
    return out


def _binomial_tail(k: int, n: int) -> Fraction:
    return Fraction(sum(math.comb(n, i) for i in range(k + 1)), 2**n)


def sign_test(values) -> SignTestResult:
    """Exact two-sided sign test of median zero.

    Zeros are discarded; NaN entries (failed replicates) are ignored.  If no
    nonzero value remains the null is kept with ``p = 1`` and ``all_zero`` set.
    """
    v = np.asarray(values, dtype=float).ravel()
    v = v[~np.isnan(v)]
    pos = int((v > 0).sum())
    neg = int((v < 0).sum())
    zeros = int(v.size - pos - neg)
    trials = pos + neg
    if trials == 0:
        return SignTestResult(pos, neg, zeros, 1.0, all_zero=True)
    p = min(Fraction(1), 2 * _binomial_tail(min(pos, neg), trials))
    return SignTestResult(pos, neg, zeros, float(p))


@dataclass(frozen=True)
class PairDecision:
    verdict: Verdict
    edge_test: SignTestResult
    direction_tests: tuple[SignTestResult, SignTestResult] | None = None
    confounder_coefficients: ConfounderCoefficients | None = None
    ratios: RatioPair | None = None
    fourth_order_test: SignTestResult | None = None
    alpha: float = DEFAULT_ALPHA
    diagnostics: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        def st(t):
            return None if t is None else {
                "positives": t.positives, "negatives": t.negatives, "zeros": t.zeros,
                "p_value": t.p_value, "all_zero": t.all_zero,
            }

        out = {
            "verdict": self.verdict.value,
            "alpha": self.alpha,
            "edge_test": st(self.edge_test),
            "fourth_order_test": st(self.fourth_order_test),
            "direction_tests": None if self.direction_tests is None else {
                "x_to_y": st(self.direction_tests[0]),
                "y_to_x": st(self.direction_tests[1]),
            },
            "ratios": None if self.ratios is None else [self.ratios.theta_a, self.ratios.theta_b],
            "confounder_coefficients": None if self.confounder_coefficients is None else {
                "alpha1_hat": self.confounder_coefficients.alpha1_hat,
                "alpha2_hat": self.confounder_coefficients.alpha2_hat,
                "sign": "joint sign of the latent loadings is not identifiable",
            },
            "diagnostics": list(self.diagnostics),
        }
        return out


@dataclass
class PairEvidence:
    """Bootstrap replicates and sign tests for one dataset, independent of alpha.

    Columns of ``replicates``: edge statistic, R_{X->Y}, R_{Y->X}, and the
    fourth-order edge statistic.  A NaN marks a failed replicate.
    """

    replicates: np.ndarray
    edge_test: SignTestResult
    direction_tests: tuple[SignTestResult, SignTestResult]
    fourth_order_test: SignTestResult | None
    direction_failures: int
    full_sample_ratios: RatioPair | None
    confounder_coefficients: ConfounderCoefficients | None
    diagnostics: list[str] = field(default_factory=list)

    def decide(self, alpha: float = DEFAULT_ALPHA,
               direction_rule: DirectionRule | str = DirectionRule.FOUR_OUTCOME) -> PairDecision:
        rule = DirectionRule(direction_rule)
        notes = list(self.diagnostics)
        edge_rejected = self.edge_test.rejects(alpha)
        if self.fourth_order_test is not None:
            edge_rejected = edge_rejected or self.fourth_order_test.rejects(alpha)
        if not edge_rejected:
            coeffs = self.confounder_coefficients
            if coeffs is None:
                notes.append("latent loadings unavailable: non-positive radicand")
            return PairDecision(Verdict.NO_EDGE, self.edge_test, None, coeffs,
                                self.full_sample_ratios, self.fourth_order_test, alpha, tuple(notes))

        t_xy, t_yx = self.direction_tests
        B = self.replicates.shape[0]
        if self.direction_failures > B / 2:
            notes.append(f"{self.direction_failures} of {B} direction replicates failed "
                         "(degenerate or complex ratio quadratic)")
            verdict = Verdict.BOTH_REJECTED
        else:
            verdict = direction_verdict(t_xy.p_value, t_yx.p_value, alpha, rule)
        return PairDecision(verdict, self.edge_test, (t_xy, t_yx), None,
                            self.full_sample_ratios, self.fourth_order_test, alpha, tuple(notes))


def direction_verdict(p_xy: float, p_yx: float, alpha: float,
                      rule: DirectionRule | str = DirectionRule.FOUR_OUTCOME) -> Verdict:
    """Map the p-values of the null R_{X->Y} = 0 and R_{Y->X} = 0 to a verdict."""
    if DirectionRule(rule) is DirectionRule.PVALUE:
        if p_xy > p_yx:
            return Verdict.X_TO_Y
        if p_yx > p_xy:
            return Verdict.Y_TO_X
        return Verdict.BOTH_ACCEPTED if p_xy > alpha else Verdict.BOTH_REJECTED
    keep_xy = p_xy > alpha
    keep_yx = p_yx > alpha
    if keep_xy and keep_yx:
        return Verdict.BOTH_ACCEPTED
    if keep_xy:
        return Verdict.X_TO_Y
    if keep_yx:
        return Verdict.Y_TO_X
    return Verdict.BOTH_REJECTED


def _replicate_statistics(edge_ij, ratio_ij, fourth_order: bool):
    keys = set(discovery.edge_keys(*edge_ij)) | set(discovery.ratio_keys(*ratio_ij))
    keys |= set(discovery.DIRECTION_KEYS)
    if fourth_order:
        keys |= set(discovery.edge_keys(1, 1))
    keys = sorted(keys)

    def statistic(resample: PairedSample):
        profile = cumulant_profile(resample, keys)
        s = discovery.edge_statistic(profile, *edge_ij)
        s4 = discovery.edge_statistic(profile, 1, 1) if fourth_order else np.nan
        try:
            res = discovery.direction_residuals(profile, discovery.ratio_pair(profile, *ratio_ij))
            r_xy, r_yx = res.r_x_to_y, res.r_y_to_x
        except CumpairError:
            r_xy = r_yx = np.nan
        return (s, r_xy, r_yx, s4)

    return keys, statistic


def collect_evidence(
    sample: PairedSample,
    config: BootstrapConfig = BootstrapConfig(),
    *,
    edge_ij: tuple[int, int] = discovery.EDGE_KEYS_DEFAULT,
    ratio_ij: tuple[int, int] = discovery.RATIO_KEYS_DEFAULT,
    confounder_ij: tuple[int, int] = discovery.CONFOUNDER_KEYS_DEFAULT,
    fourth_order: bool = False,
) -> PairEvidence:
    """Run every bootstrap replicate once; verdicts for any alpha follow from it.

    The edge statistic and both direction residuals are computed on the same
    resamples.  ``fourth_order`` adds the order-4 edge statistic as a second
    condition for keeping the no-edge hypothesis.
    """
    diagnostics = []
    if sample.n < SMALL_SAMPLE_WARNING:
        msg = (f"sample size {sample.n} is below {SMALL_SAMPLE_WARNING}; "
               "order-5 cumulant estimates are unreliable")
        warnings.warn(msg, stacklevel=2)
        diagnostics.append(msg)

    keys, statistic = _replicate_statistics(edge_ij, ratio_ij, fourth_order)
    reps = bootstrap_statistics(sample, statistic, config)
    edge_col = reps[:, 0]
    failed_edge = int(np.isnan(edge_col).sum())
    if failed_edge > config.B / 2:
        raise TooManyFailedReplicates(f"{failed_edge} of {config.B} edge replicates failed")
    edge_test = sign_test(edge_col)
    if edge_test.all_zero:
        diagnostics.append("every edge replicate was exactly zero")
    fourth = sign_test(reps[:, 3]) if fourth_order else None
    direction_failures = int(np.isnan(reps[:, 1]).sum())
    direction_tests = (sign_test(reps[:, 1]), sign_test(reps[:, 2]))

    full = cumulant_profile(sample, sorted(set(keys) | set(discovery.confounder_keys(*confounder_ij))))
    try:
        ratios = discovery.ratio_pair(full, *ratio_ij)
    except CumpairError as exc:
        ratios = None
        diagnostics.append(f"full-sample ratio quadratic: {exc}")
    try:
        coeffs = discovery.estimate_confounder_coefficients(full, *confounder_ij)
    except CumpairError:
        coeffs = None

    return PairEvidence(reps, edge_test, direction_tests, fourth, direction_failures,
                        ratios, coeffs, diagnostics)


def decide_pair(
    sample: PairedSample,
    alpha: float = DEFAULT_ALPHA,
    config: BootstrapConfig = BootstrapConfig(),
    *,
    direction_rule: DirectionRule | str = DirectionRule.FOUR_OUTCOME,
    **evidence_kwargs,
) -> PairDecision:
    """Decide between no edge, X -> Y, Y -> X, or an inconclusive outcome."""
    return collect_evidence(sample, config, **evidence_kwargs).decide(alpha, direction_rule)
