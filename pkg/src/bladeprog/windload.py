"""Wind records to blade stress-load spectra.

Pipeline: 5-minute mean wind speeds -> surface pressure ``P = rho V^2 Cp / 2``
-> stress amplitude ``k * P`` (a linear stand-in for the structural model)
-> binned ``(amplitude, cycles)`` spectrum, one stress cycle per rotor
revolution.
"""
from dataclasses import dataclass
import math
from pathlib import Path
import warnings

import numpy as np

from . import _csv
from .errors import CSVFormatError, DomainError
from .specfun import RandomStream

SAMPLE_SECONDS = 300.0
SAMPLE_MINUTES = 5.0
YEAR_SECONDS = 365.25 * 86400.0

WIND_HEADER = ("timestamp", "speed_ms")
SPECTRUM_HEADER = ("stress_mpa", "cycles")


class UnsortedRecordWarning(UserWarning):
    """Emitted when a wind record arrives out of timestamp order."""


@dataclass(frozen=True)
class WindConfig:
    rho: float = 1.29
    cp: float = 2.0

    def __post_init__(self):
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise DomainError(f"rho must be positive, got {self.rho}")
        if not (self.cp > 0 and math.isfinite(self.cp)):
            raise DomainError(f"cp must be positive, got {self.cp}")


@dataclass(frozen=True)
class WindSample:
    timestamp: int
    speed: float

    def __post_init__(self):
        if not math.isfinite(self.speed) or self.speed < 0:
            raise DomainError(f"speed must be finite and non-negative, got {self.speed}")


@dataclass(frozen=True)
class StressTransfer:
    """Stress per unit surface pressure, MPa/Pa."""

    k: float

    def __post_init__(self):
        if not (self.k > 0 and math.isfinite(self.k)):
            raise DomainError(f"transfer coefficient must be positive, got {self.k}")

    def stress(self, pressure):
        return self.k * pressure


@dataclass(frozen=True)
class LoadBlock:
    stress_amplitude: float
    cycles: float

    def __post_init__(self):
        if not self.stress_amplitude >= 0:
            raise DomainError(f"stress amplitude must be >= 0, got {self.stress_amplitude}")
        if not self.cycles >= 0:
            raise DomainError(f"cycle count must be >= 0, got {self.cycles}")


@dataclass(frozen=True)
class LoadSpectrum:
    blocks: tuple
    duration: float  # seconds

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.duration > 0:
            raise DomainError(f"spectrum duration must be positive, got {self.duration}")

    @property
    def total_cycles(self):
        return math.fsum(b.cycles for b in self.blocks)

    def scaled(self, factor, duration):
        return LoadSpectrum(
            tuple(LoadBlock(b.stress_amplitude, b.cycles * factor) for b in self.blocks),
            duration)


def wind_pressure(speed, cfg=WindConfig()):
    """Surface pressure in Pa for a wind speed in m/s."""
    speed = float(speed)
    if not math.isfinite(speed) or speed < 0:
        raise DomainError(f"wind speed must be finite and non-negative, got {speed}")
    return 0.5 * cfg.rho * speed * speed * cfg.cp


def calibrate_transfer(v_ref, sigma_ref, cfg=WindConfig()):
    """Choose k so that wind speed ``v_ref`` produces stress ``sigma_ref``."""
    if not v_ref > 0:
        raise DomainError(f"reference speed must be positive, got {v_ref}")
    if not sigma_ref > 0:
        raise DomainError(f"reference stress must be positive, got {sigma_ref}")
    p_ref = wind_pressure(v_ref, cfg)
    if p_ref == 0.0:
        raise DomainError("reference pressure is zero; cannot calibrate")
    return StressTransfer(sigma_ref / p_ref)


def ingest_wind_csv(source):
    """Parse a ``timestamp,speed_ms`` CSV into samples sorted by time.

    Out-of-order records are sorted with an :class:`UnsortedRecordWarning`;
    duplicate timestamps, negative or non-finite speeds are rejected.
    """
    rows = _csv.read_table(source, WIND_HEADER)
    if not rows:
        raise CSVFormatError("empty input: no wind samples")

    samples = []
    lines = {}
    for lineno, (ts, speed) in rows:
        if not float(ts).is_integer():
            raise CSVFormatError(f"timestamp: not an integer: {ts!r}",
                                 line=lineno, field="timestamp")
        if speed < 0:
            raise CSVFormatError(f"speed_ms: negative speed {speed}",
                                 line=lineno, field="speed_ms")
        samples.append(WindSample(int(ts), speed))
        lines.setdefault(int(ts), lineno)

    stamps = [s.timestamp for s in samples]
    if any(b <= a for a, b in zip(stamps, stamps[1:])):
        samples.sort(key=lambda s: s.timestamp)
        for a, b in zip(samples, samples[1:]):
            if a.timestamp == b.timestamp:
                raise CSVFormatError(f"timestamp: duplicate value {a.timestamp}",
                                     line=lines[a.timestamp], field="timestamp")
        warnings.warn("wind record was not in timestamp order; samples re-sorted",
                      UnsortedRecordWarning, stacklevel=2)
    return samples


def build_spectrum(samples, transfer, cfg=WindConfig(), rotor_rpm=12.1, n_bins=50):
    """Bin stress amplitudes of a wind record into a load spectrum.

    Every 5-minute sample contributes ``rotor_rpm * 5`` cycles at amplitude
    ``k * P(V)``. Amplitudes are binned into ``n_bins`` equal-width bins on
    ``[0, max amplitude]``; each non-empty bin becomes one block at its
    midpoint. A record with a single distinct amplitude yields one block at
    exactly that amplitude. Blocks are ordered by increasing amplitude.
    """
    if len(samples) == 0:
        raise DomainError("cannot build a spectrum from an empty record")
    if not (rotor_rpm > 0 and math.isfinite(rotor_rpm)):
        raise DomainError(f"rotor_rpm must be positive, got {rotor_rpm}")
    if int(n_bins) != n_bins or n_bins < 1:
        raise DomainError(f"n_bins must be a positive integer, got {n_bins}")
    n_bins = int(n_bins)

    amps = np.array([transfer.stress(wind_pressure(s.speed, cfg)) for s in samples])
    per_sample = rotor_rpm * SAMPLE_MINUTES
    duration = len(samples) * SAMPLE_SECONDS

    a_min, a_max = float(amps.min()), float(amps.max())
    if a_min == a_max:
        return LoadSpectrum((LoadBlock(a_max, len(amps) * per_sample),), duration)

    width = a_max / n_bins
    idx = np.minimum((amps / width).astype(np.int64), n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins)
    blocks = tuple(
        LoadBlock((i + 0.5) * width, int(c) * per_sample)
        for i, c in enumerate(counts) if c > 0)
    return LoadSpectrum(blocks, duration)


def tile_schedule(spectrum, horizon):
    """Annualize a measured spectrum and repeat it over ``horizon`` years.

    Returns ``ceil(horizon)`` spectra; a fractional final year carries the
    matching fraction of the annual cycles and duration.
    """
    if not (horizon > 0 and math.isfinite(horizon)):
        raise DomainError(f"horizon must be positive, got {horizon}")
    factor = YEAR_SECONDS / spectrum.duration
    annual = spectrum.scaled(factor, YEAR_SECONDS)
    n_full = int(math.floor(horizon))
    schedule = [annual] * n_full
    frac = horizon - n_full
    if frac > 1e-12:
        schedule.append(spectrum.scaled(factor * frac, YEAR_SECONDS * frac))
    return schedule


def write_spectrum_csv(spectrum, path_or_file):
    rows = [(b.stress_amplitude, b.cycles) for b in spectrum.blocks]
    return _csv.write_table(path_or_file, SPECTRUM_HEADER, rows)


def read_spectrum_csv(source, duration=YEAR_SECONDS):
    """Load a ``stress_mpa,cycles`` file; the spectrum is taken to span ``duration`` s."""
    blocks = []
    for lineno, (stress, cycles) in _csv.read_table(source, SPECTRUM_HEADER):
        if stress < 0:
            raise CSVFormatError("stress_mpa: negative amplitude", line=lineno, field="stress_mpa")
        if cycles < 0:
            raise CSVFormatError("cycles: negative count", line=lineno, field="cycles")
        blocks.append(LoadBlock(stress, cycles))
    return LoadSpectrum(tuple(blocks), duration)


def synthetic_wind(n_samples, weibull_shape=2.0, weibull_scale=9.0, seed=0, start=0):
    """Weibull-distributed 5-minute mean speeds at 300 s spacing."""
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    if not (weibull_shape > 0 and weibull_scale > 0):
        raise DomainError("Weibull shape and scale must be positive")
    gen = RandomStream(int(seed), 0).generator()
    speeds = weibull_scale * gen.weibull(weibull_shape, size=int(n_samples))
    return [WindSample(int(start + i * SAMPLE_SECONDS), float(v)) for i, v in enumerate(speeds)]


def write_wind_csv(samples, path_or_file):
    text = ",".join(WIND_HEADER) + "\n" + "".join(
        f"{s.timestamp},{_csv.fmt(s.speed)}\n" for s in samples)
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        Path(path_or_file).write_text(text, encoding="utf-8", newline="\n")
    return text
