"""S-N life model and nonlinear fatigue damage accumulation.

Life curve (stress ratio against log10 life)::

    sigma_max / sigma_ult = 1 + m * (exp(-(lg N / b)**a) - 1)

Damage law at constant amplitude::

    D(n) = 1 - (1 - (n / N)**B)**A,    A = p * B + q

Variable-amplitude loading is handled by equivalent-cycle transfer: before
each block, the current damage is converted to the cycle count that would
have produced it at the block's amplitude, and the block's cycles are added
to that count.
"""
from dataclasses import dataclass, replace
import math

import numpy as np

from . import _csv
from ._numerics import bisect_decreasing
from .errors import CSVFormatError, DomainError, InputError
from .windload import YEAR_SECONDS

TRAJECTORY_HEADER = ("t_years", "damage")

LG_N_MAX = 60.0
LG_N_TOL = 1e-10


@dataclass(frozen=True)
class SNCurve:
    a: float = 1.816
    b: float = 8.097
    m: float = 1.0
    sigma_ult: float = 1548.0

    def __post_init__(self):
        for name in ("a", "b", "m", "sigma_ult"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"S-N parameter {name} must be positive, got {value}")

    @property
    def asymptote(self):
        """Stress ratio approached as N -> infinity."""
        return 1.0 - self.m


def param_a(B, p=0.67, q=0.44):
    """Exponent A from the linear A-B relation."""
    if not B > 0:
        raise DomainError(f"B must be positive, got {B}")
    A = p * B + q
    if not A > 0:
        raise DomainError(f"A = p*B + q = {A} is not positive")
    return A


@dataclass(frozen=True)
class DamageParams:
    A: float
    B: float
    p: float = 0.67
    q: float = 0.44

    def __post_init__(self):
        if not (self.A > 0 and math.isfinite(self.A)):
            raise DomainError(f"A must be positive, got {self.A}")
        if not (self.B > 0 and math.isfinite(self.B)):
            raise DomainError(f"B must be positive, got {self.B}")

    @classmethod
    def from_b(cls, B=0.1, p=0.67, q=0.44):
        return cls(param_a(B, p, q), B, p, q)


@dataclass(frozen=True)
class DamageState:
    damage: float = 0.0
    elapsed_time: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.damage <= 1.0:
            raise DomainError(f"damage must lie in [0, 1], got {self.damage}")
        if not self.elapsed_time >= 0:
            raise DomainError(f"elapsed time must be >= 0, got {self.elapsed_time}")

    @property
    def failed(self):
        return self.damage >= 1.0


@dataclass(frozen=True)
class DamageTrajectory:
    """Mean damage sampled on a time grid (years).

    ``failed`` is set when the damage reached 1; the grid then stops at
    ``failure_time``.
    """

    times: np.ndarray
    damage: np.ndarray
    failed: bool = False
    failure_time: float = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        d = np.asarray(self.damage, dtype=float)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "damage", d)
        if t.ndim != 1 or t.shape != d.shape or t.size == 0:
            raise DomainError("trajectory needs matching non-empty 1-D time and damage arrays")
        if np.any(np.diff(t) <= 0):
            raise DomainError("trajectory times must be strictly increasing")
        if np.any(np.diff(d) < 0):
            raise DomainError("trajectory damage must be non-decreasing")
        if np.any(d < 0) or np.any(d > 1):
            raise DomainError("trajectory damage must lie in [0, 1]")

    def at(self, t):
        """Piecewise-linear interpolation; held constant past the last point."""
        return np.interp(t, self.times, self.damage)


def sn_ratio_lg(lg_n, curve):
    # (1 - m) + m*e rather than 1 + m*(e - 1): exact in the tail when m = 1
    return curve.asymptote + curve.m * math.exp(-((lg_n / curve.b) ** curve.a))


def sn_ratio(N, curve=SNCurve()):
    """Predicted ``sigma_max / sigma_ult`` for a life of ``N`` cycles."""
    if not N >= 1:
        raise DomainError(f"life N must be >= 1, got {N}")
    if math.isinf(N):
        return curve.asymptote
    return sn_ratio_lg(math.log10(N), curve)


def cycles_to_failure(sigma_max, curve=SNCurve()):
    """Invert the S-N curve for the life at stress amplitude ``sigma_max``.

    Bisection on lg N over [0, 60] to 1e-10.

    Raises
    ------
    DomainError
        If the stress ratio exceeds 1 or is at or below the curve asymptote
        ``1 - m`` (no finite life).
    NonConvergenceError
        If the life exceeds 10**60 cycles.
    """
    if not sigma_max > 0:
        raise DomainError(f"stress must be positive, got {sigma_max}")
    ratio = sigma_max / curve.sigma_ult
    if ratio > 1.0:
        raise DomainError(f"stress ratio {ratio:.6g} exceeds 1 (above ultimate stress)")
    if ratio <= curve.asymptote:
        raise DomainError(
            f"stress ratio {ratio:.6g} is at or below the S-N asymptote {curve.asymptote:.6g}")
    if ratio == 1.0:
        return 1.0
    lg_n = bisect_decreasing(lambda x: sn_ratio_lg(x, curve) - ratio,
                             0.0, LG_N_MAX, LG_N_TOL)
    return 10.0 ** lg_n


def damage_fraction(n, N, params):
    """Damage after ``n`` cycles at a level whose life is ``N`` cycles."""
    if not N >= 1:
        raise DomainError(f"life N must be >= 1, got {N}")
    if not 0 <= n <= N:
        raise DomainError(f"cycle count must lie in [0, N], got n={n}, N={N}")
    x = n / N
    d = 1.0 - (1.0 - x ** params.B) ** params.A
    return min(1.0, max(0.0, d))


def equivalent_cycles(D, N, params):
    """Cycles at life ``N`` that reproduce damage ``D`` (inverse damage law)."""
    if not 0 <= D < 1:
        raise DomainError(f"damage must lie in [0, 1) for equivalent cycles, got {D}")
    if not N >= 1:
        raise DomainError(f"life N must be >= 1, got {N}")
    if D == 0:
        return 0.0
    inner = -math.expm1(math.log1p(-D) / params.A)
    return N * inner ** (1.0 / params.B)


def block_life(stress_amplitude, curve):
    """Life for one block, or ``inf`` below the endurance asymptote.

    Stresses at or above the ultimate stress clamp to a single-cycle life.
    """
    ratio = stress_amplitude / curve.sigma_ult
    if ratio <= curve.asymptote or stress_amplitude <= 0:
        return math.inf
    if ratio >= 1.0:
        return 1.0
    return cycles_to_failure(stress_amplitude, curve)


def accumulate_block(state, block, curve, params, life=None):
    """Apply one load block to a damage state.

    ``life`` may carry a precomputed :func:`block_life` for the block's
    amplitude.
    """
    if state.damage >= 1.0:
        raise DomainError("cannot accumulate damage on a failed state")
    if block.cycles == 0:
        return state
    N = block_life(block.stress_amplitude, curve) if life is None else life
    if math.isinf(N):
        return state
    n_eq = equivalent_cycles(state.damage, N, params)
    d_new = damage_fraction(min(n_eq + block.cycles, N), N, params)
    return replace(state, damage=max(state.damage, d_new))


def damage_trajectory(schedule, curve, params, steps_per_year=12):
    """Fold a yearly spectrum schedule into the mean damage trajectory.

    Each year is split into ``steps_per_year`` equal steps; every step applies
    all blocks of the year with their cycles divided evenly, so constant
    amplitude loading reproduces the closed-form damage law at each grid
    point. Stops at the first grid point where the damage reaches 1.
    """
    if len(schedule) == 0:
        raise DomainError("schedule is empty")
    if int(steps_per_year) != steps_per_year or steps_per_year < 1:
        raise DomainError(f"steps_per_year must be a positive integer, got {steps_per_year}")

    lives = {}
    state = DamageState()
    times = [0.0]
    damage = [0.0]
    for spectrum in schedule:
        years = spectrum.duration / YEAR_SECONDS
        n_steps = max(1, int(round(steps_per_year * years)))
        dt = years / n_steps
        for b in spectrum.blocks:
            if b.stress_amplitude not in lives:
                lives[b.stress_amplitude] = block_life(b.stress_amplitude, curve)
        t0 = state.elapsed_time
        for k in range(1, n_steps + 1):
            for b in spectrum.blocks:
                step_block = replace(b, cycles=b.cycles / n_steps)
                state = accumulate_block(state, step_block, curve, params,
                                         life=lives[b.stress_amplitude])
                if state.failed:
                    break
            state = replace(state, elapsed_time=t0 + k * dt)
            times.append(state.elapsed_time)
            damage.append(state.damage)
            if state.failed:
                return DamageTrajectory(times, damage, True, state.elapsed_time)
    return DamageTrajectory(times, damage)


def write_trajectory_csv(trajectory, path_or_file):
    rows = zip(trajectory.times, trajectory.damage)
    return _csv.write_table(path_or_file, TRAJECTORY_HEADER, rows)


def read_trajectory_csv(source):
    rows = _csv.read_table(source, TRAJECTORY_HEADER)
    if not rows:
        raise CSVFormatError("empty input: no trajectory points")
    times = [r[1][0] for r in rows]
    damage = [r[1][1] for r in rows]
    for (lineno, (t, d)), prev in zip(rows[1:], rows):
        if t <= prev[1][0]:
            raise CSVFormatError("t_years: times must be strictly increasing",
                                 line=lineno, field="t_years")
        if d < prev[1][1]:
            raise CSVFormatError("damage: trajectory must be non-decreasing",
                                 line=lineno, field="damage")
    for lineno, (t, d) in rows:
        if not 0 <= d <= 1:
            raise CSVFormatError("damage: value outside [0, 1]", line=lineno, field="damage")
    try:
        return DamageTrajectory(times, damage, failed=damage[-1] >= 1.0,
                                failure_time=times[-1] if damage[-1] >= 1.0 else None)
    except InputError as exc:
        raise CSVFormatError(str(exc)) from None
