"""Gamma-process reliability on top of the deterministic damage trajectory.

The stochastic damage X(t) has independent increments
``X(t) - X(s) ~ Ga(v(t) - v(s), u)`` with shape function ``v(t) = c * g(t)``.
The basis ``g`` is the mean damage trajectory normalized to 1 at a reference
time, so choosing ``c = u * D(t_ref)`` makes ``E[X(t)]`` equal the mean
trajectory. Failure probability against a critical damage ``d_cr`` is the
regularized upper incomplete gamma ``Q(v(t), u * d_cr)``.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from . import _csv
from ._numerics import bisect_decreasing
from .errors import (CSVFormatError, DegenerateDataError, DomainError, InputError,
                     NonConvergenceError)
from .specfun import RandomStream, digamma, gamma_sample, ln_gamma, reg_gamma_q

INSPECTION_HEADER = ("t_years", "damage")


class ShapeBasis:
    """Piecewise-linear, non-decreasing g(t) with g(0) = 0 and g(t_ref) = 1.

    Values past the last knot are held constant.
    """

    def __init__(self, times, values, t_ref):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times[0] > 0:
            times = np.r_[0.0, times]
            values = np.r_[0.0, values]
        if times[0] != 0 or values[0] != 0:
            raise DomainError("shape basis must start at g(0) = 0")
        if np.any(np.diff(values) < 0):
            raise DomainError("shape basis must be non-decreasing")
        self.times = times
        self.values = values
        self.t_ref = float(t_ref)

    @classmethod
    def from_trajectory(cls, trajectory, t_ref=None):
        t_ref = trajectory.times[-1] if t_ref is None else float(t_ref)
        d_ref = float(trajectory.at(t_ref))
        if not d_ref > 0:
            raise DomainError(f"mean damage at t_ref = {t_ref:g} is zero; cannot normalize")
        return cls(trajectory.times, trajectory.damage / d_ref, t_ref), d_ref

    def __call__(self, t):
        return np.interp(t, self.times, self.values)


@dataclass(frozen=True)
class GammaProcessModel:
    shape_scale: float  # c
    rate: float  # u
    basis: ShapeBasis = field(repr=False)

    def __post_init__(self):
        if not (self.shape_scale > 0 and math.isfinite(self.shape_scale)):
            raise DomainError(f"shape scale c must be positive, got {self.shape_scale}")
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise DomainError(f"rate u must be positive, got {self.rate}")

    @property
    def t_ref(self):
        return self.basis.t_ref

    def shape(self, t):
        """v(t) = c * g(t)."""
        return self.shape_scale * self.basis(t)

    def mean(self, t):
        return self.shape(t) / self.rate

    def variance(self, t):
        return self.shape(t) / self.rate ** 2


def calibrate_shape(trajectory, u, t_ref=None):
    """Mean-matched model: E[X(t)] follows the trajectory for rate ``u``."""
    basis, d_ref = ShapeBasis.from_trajectory(trajectory, t_ref)
    return GammaProcessModel(u * d_ref, u, basis)


def calibrate_from_cov(trajectory, cov_ref, t_ref=None):
    """Mean-matched model whose X(t_ref) has coefficient of variation ``cov_ref``."""
    if not (cov_ref > 0 and math.isfinite(cov_ref)):
        raise DomainError(f"cov_ref must be positive, got {cov_ref}")
    _, d_ref = ShapeBasis.from_trajectory(trajectory, t_ref)
    return calibrate_shape(trajectory, 1.0 / (cov_ref ** 2 * d_ref), t_ref)


def _check_dcr(d_cr):
    if not 0 <= d_cr <= 1:
        raise DomainError(f"critical damage must lie in (0, 1], got {d_cr}")


def failure_probability(model, d_cr, t):
    """P(X(t) >= d_cr) = Gamma(v(t), u d_cr) / Gamma(v(t)).

    Defined as 0 while v(t) = 0 (no damage has accumulated yet); a zero
    threshold is always exceeded.
    """
    _check_dcr(d_cr)
    if not t >= 0:
        raise DomainError(f"time must be >= 0, got {t}")
    if d_cr == 0:
        return 1.0
    v = float(model.shape(t))
    if v == 0.0:
        return 0.0
    return reg_gamma_q(v, model.rate * d_cr)


def failure_curve(model, d_cr, grid):
    """F on an increasing grid.

    F is non-decreasing in t whenever v(t) is; a running maximum removes
    ulp-level reversals from Q rounding between nearly equal shapes, so the
    interval masses derived from the curve are never negative.
    """
    grid = _check_grid(grid)
    F = np.array([failure_probability(model, d_cr, t) for t in grid])
    return np.maximum.accumulate(F)


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("time grid must be a non-empty 1-D sequence")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("time grid must be strictly increasing")
    if grid[0] < 0:
        raise DomainError("time grid must start at t >= 0")
    return grid


def interval_failure_probability(model, d_cr, grid):
    """Per-interval failure mass: p_0 = F(t_0), p_i = F(t_i) - F(t_{i-1})."""
    grid = _check_grid(grid)
    F = failure_curve(model, d_cr, grid)
    return np.diff(F, prepend=0.0)


def damage_pdf(model, t, d):
    """Density of X(t) at damage level ``d``."""
    v = float(model.shape(t))
    if not v > 0:
        raise DomainError(f"shape v(t) must be positive, got {v} at t={t}")
    if not d > 0:
        raise DomainError(f"damage must be positive, got {d}")
    u = model.rate
    return math.exp(v * math.log(u) + (v - 1.0) * math.log(d) - u * d - ln_gamma(v))


@dataclass
class PrognosisResult:
    times: np.ndarray
    damage_mean: np.ndarray
    failure: dict  # d_cr -> F(t) array
    interval: dict  # d_cr -> p_i array

    @property
    def thresholds(self):
        return list(self.failure)


def prognosis(model, grid, d_cr_list):
    grid = _check_grid(grid)
    failure = {}
    interval = {}
    for d_cr in d_cr_list:
        _check_dcr(d_cr)
        F = failure_curve(model, d_cr, grid)
        failure[d_cr] = F
        interval[d_cr] = np.diff(F, prepend=0.0)
    return PrognosisResult(grid, model.mean(grid), failure, interval)


def percent_label(d_cr):
    """Threshold as percent text: 0.9 -> '90', 0.925 -> '92.5'."""
    return format(round(d_cr * 100.0, 6), "g")


def prognosis_header(d_cr_list):
    return (("t_years", "damage_mean")
            + tuple(f"F_{percent_label(d)}" for d in d_cr_list)
            + tuple(f"p_{percent_label(d)}" for d in d_cr_list))


def write_prognosis_csv(result, path_or_file):
    keys = result.thresholds
    cols = ([result.times, result.damage_mean] + [result.failure[d] for d in keys]
            + [result.interval[d] for d in keys])
    return _csv.write_table(path_or_file, prognosis_header(keys), zip(*cols))


def read_prognosis_csv(source, d_cr_list):
    rows = _csv.read_table(source, prognosis_header(d_cr_list))
    if not rows:
        raise CSVFormatError("empty input: no prognosis rows")
    data = np.array([r[1] for r in rows])
    k = len(d_cr_list)
    return PrognosisResult(
        data[:, 0], data[:, 1],
        {d: data[:, 2 + i] for i, d in enumerate(d_cr_list)},
        {d: data[:, 2 + k + i] for i, d in enumerate(d_cr_list)})


# --- inspections and estimation -------------------------------------------

@dataclass(frozen=True)
class InspectionRecord:
    time: float
    observed_damage: float

    def __post_init__(self):
        if not self.time >= 0:
            raise DomainError(f"inspection time must be >= 0, got {self.time}")
        if not 0 <= self.observed_damage < 1:
            raise DomainError(f"observed damage must lie in [0, 1), got {self.observed_damage}")


def read_inspections_csv(source):
    records = []
    for lineno, (t, x) in _csv.read_table(source, INSPECTION_HEADER):
        try:
            rec = InspectionRecord(t, x)
        except InputError as exc:
            field_name = "t_years" if "time" in str(exc) else "damage"
            raise CSVFormatError(str(exc), line=lineno, field=field_name) from None
        if records and rec.time <= records[-1].time:
            raise CSVFormatError("t_years: times must be strictly increasing",
                                 line=lineno, field="t_years")
        if records and rec.observed_damage < records[-1].observed_damage:
            raise CSVFormatError("damage: observed damage must be non-decreasing",
                                 line=lineno, field="damage")
        records.append(rec)
    return records


@dataclass(frozen=True)
class FitResult:
    method: str
    c: float  # None when unidentifiable
    u: float  # None when unidentifiable
    mean_rate: float  # c/u from mean matching
    n_increments: int
    loglik: float = None

    @property
    def identifiable(self):
        return self.c is not None and self.u is not None

    def cov_at(self, g_value=1.0):
        """Coefficient of variation of X(t) where g(t) = ``g_value``."""
        if self.c is None:
            return None
        return 1.0 / math.sqrt(self.c * g_value)


def _increments(times, damage, basis):
    t = np.asarray(times, dtype=float)
    x = np.asarray(damage, dtype=float)
    if t.ndim != 1 or t.shape != x.shape:
        raise InputError("inspection times and damage must be matching 1-D arrays")
    if t.size < 2:
        raise InputError(f"at least 2 inspections are required, got {t.size}")
    if np.any(np.diff(t) <= 0):
        raise InputError("inspection times must be strictly increasing")
    delta = np.diff(x)
    if np.any(delta < 0):
        raise InputError("observed damage must be non-decreasing")
    w = np.diff(np.asarray(basis(t), dtype=float))
    if np.any(w <= 0):
        raise DomainError("shape basis must strictly increase between inspections")
    total = x[-1] - x[0]
    if not total > 0:
        raise DegenerateDataError("no damage growth between first and last inspection",
                                  mean_rate=0.0)
    return delta, w


def estimate_mom(times, damage, basis):
    """Method-of-moments estimate of (c, u) from inspection data.

    Mean matching gives ``c/u = sum(delta) / sum(w)``; matching the spread of
    the increments about that mean gives ``u``. With a single increment only
    the ratio is available and ``c``, ``u`` are returned as ``None``.
    """
    delta, w = _increments(times, damage, basis)
    W = w.sum()
    m = delta.sum() / W
    if delta.size == 1:
        return FitResult("mom", None, None, m, 1)
    resid = delta - m * w
    S = float(np.dot(resid, resid))
    if S <= 1e-20 * float(np.dot(delta, delta)):
        raise DegenerateDataError(
            "increments are exactly proportional to the shape basis; "
            "variance carries no information about u", mean_rate=m)
    u = m * W * (1.0 - float(np.dot(w, w)) / W ** 2) / S
    return FitResult("mom", m * u, u, m, delta.size)


def increment_loglik(c, u, w, delta):
    """Log-likelihood of gamma increments ``delta`` with shape ``c*w`` and rate ``u``."""
    k = c * np.asarray(w, dtype=float)
    delta = np.asarray(delta, dtype=float)
    return float(np.sum(k * math.log(u) - ln_gamma(k) + (k - 1.0) * np.log(delta) - u * delta))


def estimate_mle(times, damage, basis, rtol=1e-8):
    """Maximum-likelihood estimate of (c, u) from inspection data.

    ``u`` is profiled out analytically (``u = c W / X``); the profile score in
    ``c`` is monotone and is solved by bisection on ``log c``.
    """
    delta, w = _increments(times, damage, basis)
    if np.any(delta <= 0):
        i = int(np.flatnonzero(delta <= 0)[0])
        raise DomainError(
            f"zero damage increment between inspections {i} and {i + 1}; "
            "the gamma likelihood requires strictly positive increments")
    if delta.size == 1:
        raise DegenerateDataError("a single increment cannot identify c", mean_rate=delta[0] / w[0])

    W = w.sum()
    X = delta.sum()
    sum_wlog = float(np.dot(w, np.log(delta)))
    # profile score tends to this value as c -> infinity; it is <= 0 by Jensen
    limit = W * math.log(W / X) + float(np.dot(w, np.log(delta / w)))
    if limit >= -1e-12 * W:
        raise DegenerateDataError(
            "increments are proportional to the shape basis; c is unbounded",
            mean_rate=X / W)

    def score(log_c):
        c = math.exp(log_c)
        return W * math.log(c * W / X) - float(np.dot(w, digamma(c * w))) + sum_wlog

    lo, hi = math.log(1e-3 / w.max()), math.log(1e3 / w.min())
    for _ in range(200):
        if score(lo) > 0:
            break
        lo -= 2.0
    else:
        raise NonConvergenceError(f"could not bracket MLE from below (log c = {lo:g})", 200)
    for _ in range(200):
        if score(hi) < 0:
            break
        hi += 2.0
    else:
        raise NonConvergenceError(
            f"could not bracket MLE from above (log c = {hi:g}, score = {score(hi):g})", 200)

    c = math.exp(bisect_decreasing(score, lo, hi, rtol))
    u = c * W / X
    return FitResult("mle", c, u, X / W, delta.size, increment_loglik(c, u, w, delta))


# --- Monte Carlo verification ---------------------------------------------

@dataclass
class SimulationResult:
    times: np.ndarray
    thresholds: list
    exceedance: np.ndarray  # (n_times, n_thresholds)
    mean: np.ndarray
    variance: np.ndarray  # population variance over paths
    n_paths: int


def _simulate_chunk(shape_inc, rate, thresholds, seed, start, stop):
    n = stop - start
    positive = shape_inc > 0
    paths = np.zeros((n, shape_inc.size))
    for row, idx in enumerate(range(start, stop)):
        gen = RandomStream(seed, idx).generator()
        if positive.any():
            paths[row, positive] = gamma_sample(shape_inc[positive], rate, gen)
    np.cumsum(paths, axis=1, out=paths)
    counts = np.stack([(paths >= d).sum(axis=0) for d in thresholds], axis=1)
    mean = paths.mean(axis=0)
    m2 = ((paths - mean) ** 2).sum(axis=0)
    return n, counts, mean, m2


def simulate_paths(model, grid, n_paths, seed, thresholds, workers=1, chunk_size=1000):
    """Monte Carlo sample paths of the gamma process on ``grid``.

    Path ``i`` draws its increments from ``RandomStream(seed, i)``; chunks are
    reduced in index order, so results are bit-identical for any ``workers``.
    """
    grid = _check_grid(grid)
    if int(n_paths) != n_paths or n_paths < 1:
        raise DomainError(f"n_paths must be a positive integer, got {n_paths}")
    if int(workers) < 1:
        raise DomainError("workers must be >= 1")
    thresholds = list(thresholds)
    for d in thresholds:
        _check_dcr(d)
    n_paths = int(n_paths)
    shape_inc = np.diff(model.shape(grid), prepend=0.0)
    shape_inc = np.maximum(shape_inc, 0.0)

    bounds = [(s, min(s + chunk_size, n_paths)) for s in range(0, n_paths, chunk_size)]
    job = lambda b: _simulate_chunk(shape_inc, model.rate, thresholds, int(seed), *b)
    if workers == 1:
        parts = [job(b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            parts = list(pool.map(job, bounds))

    total = 0
    counts = np.zeros((grid.size, len(thresholds)), dtype=np.int64)
    mean = np.zeros(grid.size)
    m2 = np.zeros(grid.size)
    for n, c, mu, s2 in parts:
        # Chan et al. pairwise combination, in chunk order
        delta = mu - mean
        new_total = total + n
        mean = mean + delta * (n / new_total)
        m2 = m2 + s2 + delta ** 2 * (total * n / new_total)
        total = new_total
        counts += c
    return SimulationResult(grid, thresholds, counts / n_paths, mean, m2 / n_paths, n_paths)
