"""Statistical verification toolkit: two-sample tests, generator tests,
a Markov-property test, and the conditional-law moment test.

All tests are deterministic functions of their input samples and return a
TestReport whose verdict is a pure function of statistic vs threshold.
Aggregation over bins or test functions is Bonferroni.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np

__all__ = [
    "SampleBatch",
    "TestReport",
    "TestFunction",
    "gaussian_bump",
    "indicator_bins",
    "ks_statistic",
    "ks_threshold",
    "ks_two_sample",
    "generator_test",
    "markov_property_test",
    "conditional_law_test",
]


@dataclass
class SampleBatch:
    """Exchangeable replicate values plus generating-configuration metadata."""

    values: np.ndarray
    meta: Dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)


@dataclass
class TestReport:
    """Outcome of one statistical check."""

    name: str
    statistic: float
    threshold: float
    verdict: str  # "pass" or "reject"
    standard_error: Optional[float] = None
    details: Dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def as_dict(self) -> Dict:
        out = {
            "name": self.name,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "verdict": self.verdict,
        }
        if self.standard_error is not None:
            out["standard_error"] = self.standard_error
        if self.details:
            out["details"] = self.details
        return out


def _values(batch) -> np.ndarray:
    return batch.values if isinstance(batch, SampleBatch) else np.asarray(batch, dtype=float)


def _meta(batch) -> Dict:
    return dict(batch.meta) if isinstance(batch, SampleBatch) else {}


# --------------------------------------------------------------------------
# Kolmogorov-Smirnov

def ks_statistic(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample KS statistic sup_x |F_a(x) - F_b(x)|."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_threshold(n_a: int, n_b: int, level: float) -> float:
    """Asymptotic rejection threshold c(alpha) sqrt((n+m)/(n m))."""
    c = math.sqrt(-0.5 * math.log(level / 2.0))
    return c * math.sqrt((n_a + n_b) / (n_a * n_b))


def ks_two_sample(a, b, level: float = 0.01) -> TestReport:
    """Two-sample KS test at the given asymptotic level (batch sizes >= 100)."""
    va, vb = _values(a), _values(b)
    if va.size < 100 or vb.size < 100:
        raise ValueError("KS test needs batches of size >= 100")
    stat = ks_statistic(va, vb)
    thr = ks_threshold(va.size, vb.size, level)
    return TestReport(
        "ks_two_sample",
        stat,
        thr,
        "pass" if stat <= thr else "reject",
        details={"level": level, "n_a": int(va.size), "n_b": int(vb.size), **_meta(a)},
    )


# --------------------------------------------------------------------------
# generator test

@dataclass(frozen=True)
class TestFunction:
    """C^2 test function with its first two derivatives."""

    f: Callable
    d1: Callable
    d2: Callable
    label: str = "f"


def gaussian_bump(center: float, width: float) -> TestFunction:
    """exp(-(x-c)^2 / (2 w^2)) with analytic derivatives."""

    def f(x):
        z = (x - center) / width
        return np.exp(-0.5 * z * z)

    def d1(x):
        z = (x - center) / width
        return -z / width * np.exp(-0.5 * z * z)

    def d2(x):
        z = (x - center) / width
        return (z * z - 1.0) / width**2 * np.exp(-0.5 * z * z)

    return TestFunction(f, d1, d2, f"bump({center},{width})")


def indicator_bins(edges: Sequence[float]):
    """Bounded indicator test functions 1[a < x <= b] for consecutive edges."""
    fns = []
    for a, b in zip(edges[:-1], edges[1:]):
        fns.append(lambda x, a=a, b=b: ((x > a) & (x <= b)).astype(float))
    return fns


def generator_test(samples, drift_fn: Callable, test_fn: TestFunction, h: float,
                   z_max: float = 3.0) -> TestReport:
    """z-score of E[f(X_{t+h}) - f(X_t) - h (f''/2 + drift f')(X_t)].

    Under the diffusion with generator (1/2) d^2/dr^2 + drift d/dr the mean is
    O(h^2), so |z| beyond z_max rejects the proposed drift.  samples holds the
    paired values (X_t, X_{t+h}) as rows.
    """
    v = _values(samples)
    if v.ndim != 2 or v.shape[0] != 2:
        raise ValueError("samples must contain two rows: X_t and X_{t+h}")
    x_now, x_next = v[0], v[1]
    lf = 0.5 * test_fn.d2(x_now) + np.asarray(drift_fn(x_now)) * test_fn.d1(x_now)
    d = test_fn.f(x_next) - test_fn.f(x_now) - h * lf
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        raise ValueError("degenerate variance in the generator statistic")
    se = sd / math.sqrt(d.size)
    z = float(d.mean()) / se
    return TestReport(
        "generator_test",
        z,
        z_max,
        "pass" if abs(z) <= z_max else "reject",
        standard_error=se,
        details={"h": h, "n": int(d.size), "test_fn": test_fn.label, **_meta(samples)},
    )


# --------------------------------------------------------------------------
# Markov property

def markov_property_test(mid, end, conditioner, bins: int = 15, level: float = 0.01,
                         residualize: bool = True, min_half: int = 50) -> TestReport:
    """Within quantile bins of the present value, split by an extra conditioning
    statistic and KS-compare the two futures; Bonferroni across bins.

    For a process Markov in its own filtration, any past-measurable
    conditioner leaves the conditional law of the future unchanged, so the
    split laws agree up to the finite bin width; `residualize` removes the
    first-order within-bin leakage by projecting the conditioner onto the
    within-bin variation of the present value.  Splitting instead on a
    non-adapted statistic (e.g. the driving noise itself) detects dependence
    even for processes that are Markov in their own filtration.
    """
    z_mid = _values(mid)
    z_end = _values(end)
    cond = _values(conditioner)
    if not (z_mid.size == z_end.size == cond.size):
        raise ValueError("mid, end and conditioner must be aligned")
    qs = np.quantile(z_mid, np.linspace(0.0, 1.0, bins + 1))
    worst_ratio = 0.0
    n_reject = 0
    used_bins = 0
    for i in range(bins):
        lo, hi = qs[i], qs[i + 1]
        sel = (z_mid >= lo) & ((z_mid <= hi) if i == bins - 1 else (z_mid < hi))
        if int(sel.sum()) < 2 * min_half:
            raise ValueError(f"sparse bin {i}: {int(sel.sum())} < {2 * min_half} samples")
        c = cond[sel].copy()
        z = z_mid[sel]
        e = z_end[sel]
        if residualize:
            zc = z - z.mean()
            denom = float(zc @ zc)
            if denom > 0.0:
                c -= (c @ zc) / denom * zc
        med = np.median(c)
        low_half, high_half = e[c <= med], e[c > med]
        if min(low_half.size, high_half.size) < min_half:
            raise ValueError(f"sparse split in bin {i}")
        stat = ks_statistic(low_half, high_half)
        thr = ks_threshold(low_half.size, high_half.size, level / bins)
        worst_ratio = max(worst_ratio, stat / thr)
        n_reject += stat > thr
        used_bins += 1
    return TestReport(
        "markov_property_test",
        worst_ratio,
        1.0,
        "pass" if n_reject == 0 else "reject",
        details={
            "level": level,
            "bins": used_bins,
            "bins_rejecting": int(n_reject),
            "residualized": residualize,
            **_meta(mid),
        },
    )


# --------------------------------------------------------------------------
# conditional law

def conditional_law_test(samples, lam: float, test_fns: Sequence[Callable], *,
                         ratio_fn: Optional[Callable] = None, z_max: float = 3.0,
                         kurtosis_cap: float = 500.0) -> TestReport:
    """Moment test of E[(e^{lam B_t} - K_lam(1/eta_t)/K_0(1/eta_t)) g_j(eta_t)] = 0.

    samples holds rows (B_t, eta_t).  Passes when every estimate is within
    z_max standard errors of zero.  ratio_fn overrides the Macdonald ratio
    (used by calibration tests with synthetic conditional means).  A
    heavy-tail warning is recorded when the empirical kurtosis of e^{lam B}
    exceeds kurtosis_cap.
    """
    if abs(lam) > 2.0:
        raise ValueError("|lam| <= 2 required to control the e^{lam B} tails")
    v = _values(samples)
    if v.ndim != 2 or v.shape[0] != 2:
        raise ValueError("samples must contain two rows: B_t and eta_t")
    b_t, eta_t = v[0], v[1]
    if ratio_fn is None:
        from .specialfn import macdonald_ratio

        def ratio_fn(e, lam=lam):
            return macdonald_ratio(lam, 1.0 / np.asarray(e, dtype=float))

    weight = np.exp(lam * b_t) - np.asarray(ratio_fn(eta_t))
    elb = np.exp(lam * b_t)
    centered = elb - elb.mean()
    m2 = float(np.mean(centered**2))
    kurt = float(np.mean(centered**4) / m2**2) if m2 > 0 else 0.0
    worst = 0.0
    rows = []
    for j, g in enumerate(test_fns):
        gv = np.asarray(g(eta_t), dtype=float)
        prod = weight * gv
        se = float(prod.std(ddof=1)) / math.sqrt(prod.size)
        est = float(prod.mean())
        zj = abs(est) / se if se > 0 else 0.0
        rows.append({"g": j, "estimate": est, "se": se, "z": zj})
        worst = max(worst, zj)
    return TestReport(
        "conditional_law_test",
        worst,
        z_max,
        "pass" if worst <= z_max else "reject",
        details={
            "lam": lam,
            "n": int(b_t.size),
            "per_function": rows,
            "kurtosis": kurt,
            "heavy_tail_warning": bool(kurt > kurtosis_cap),
            **_meta(samples),
        },
    )
