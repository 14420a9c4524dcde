"""Sparse sinusoid model: atoms, spectra, and random problem instances."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
FREQ_ATTEMPTS = 10_000


class ModelError(ValueError):
    """Invalid spectrum, instance, or configuration."""


class FrequencyDrawError(RuntimeError):
    """Rejection sampling could not place the requested frequencies."""


@dataclass(frozen=True)
class SpectralLine:
    freq: float
    amplitude: float
    phase: float
    known: bool = False

    def __post_init__(self):
        if not 0.0 <= self.freq < 1.0:
            raise ModelError(f"frequency {self.freq!r} outside [0, 1)")
        if not self.amplitude > 0.0:
            raise ModelError(f"amplitude must be positive, got {self.amplitude!r}")
        if not 0.0 <= self.phase < TWO_PI:
            raise ModelError(f"phase {self.phase!r} outside [0, 2pi)")

    @property
    def coefficient(self) -> complex:
        return self.amplitude * complex(math.cos(self.phase), math.sin(self.phase))

    @classmethod
    def from_coefficient(cls, freq: float, coef: complex, known: bool = False) -> "SpectralLine":
        return cls(float(freq) % 1.0, abs(coef), wrap_phase(math.atan2(coef.imag, coef.real)), known)


@dataclass(frozen=True)
class LineSpectrum:
    lines: tuple[SpectralLine, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))
        freqs = [ln.freq for ln in self.lines]
        for i in range(len(freqs)):
            for j in range(i + 1, len(freqs)):
                if wrap_distance(freqs[i], freqs[j]) == 0.0:
                    raise ModelError(f"duplicate frequency {freqs[i]!r}")

    def __len__(self):
        return len(self.lines)

    def __iter__(self):
        return iter(self.lines)

    @property
    def freqs(self) -> np.ndarray:
        return np.array([ln.freq for ln in self.lines], dtype=float)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([ln.coefficient for ln in self.lines], dtype=complex)

    @property
    def known(self) -> tuple[SpectralLine, ...]:
        return tuple(ln for ln in self.lines if ln.known)

    @property
    def unknown(self) -> tuple[SpectralLine, ...]:
        return tuple(ln for ln in self.lines if not ln.known)

    def with_known_prefix(self, p: int) -> "LineSpectrum":
        """Flag exactly the first ``p`` lines as known."""
        if not 0 <= p <= len(self.lines):
            raise ModelError(f"p={p} outside [0, {len(self.lines)}]")
        return LineSpectrum(tuple(replace(ln, known=i < p) for i, ln in enumerate(self.lines)))


def wrap_phase(phi: float) -> float:
    out = phi % TWO_PI
    # fmod can round up to exactly 2pi for tiny negative inputs
    return 0.0 if out >= TWO_PI else out


def wrap_distance(f1: float, f2: float) -> float:
    d = abs(f1 - f2) % 1.0
    return min(d, 1.0 - d)


def atom_eval(freq: float, phase: float, indices) -> np.ndarray:
    idx = np.asarray(indices, dtype=float)
    return np.exp(1j * (TWO_PI * freq * idx + phase))


def atom_matrix(freqs, indices) -> np.ndarray:
    """Columns are phaseless atoms exp(2 pi i f l) evaluated on ``indices``."""
    idx = np.asarray(indices, dtype=float)
    return np.exp(2j * np.pi * np.outer(idx, np.asarray(freqs, dtype=float)))


def synthesize(spectrum: LineSpectrum, indices) -> np.ndarray:
    idx = np.asarray(indices)
    if len(spectrum) == 0:
        return np.zeros(idx.shape[0], dtype=complex)
    return atom_matrix(spectrum.freqs, idx) @ spectrum.coefficients


def draw_frequencies(s: int, min_separation: float | None, rng: np.random.Generator,
                     attempts: int = FREQ_ATTEMPTS) -> np.ndarray:
    """Uniform frequencies on [0, 1), conditioned on a wrap-around spacing floor.

    Whole sets are rejected until one satisfies the floor, so the accepted set is
    exactly uniform under the constraint.
    """
    if s < 0:
        raise ModelError("s must be non-negative")
    if not min_separation:
        for _ in range(attempts):
            f = rng.random(s)
            if len(np.unique(f)) == s:
                return f
        raise FrequencyDrawError("could not draw distinct frequencies")
    if s * min_separation > 1.0:
        raise FrequencyDrawError(f"{s} frequencies cannot be {min_separation:g} apart on the unit circle")
    for _ in range(attempts):
        f = rng.random(s)
        if s < 2:
            return f
        srt = np.sort(f)
        gaps = np.diff(np.append(srt, srt[0] + 1.0))
        if gaps.min() >= min_separation:
            return f
    raise FrequencyDrawError(f"no admissible draw of {s} frequencies with spacing {min_separation:g} "
                             f"after {attempts} attempts")


def nominal_separation(n: int) -> float:
    return 1.0 / ((n - 1) // 4)


@dataclass(frozen=True)
class InstanceConfig:
    n: int
    m: int
    s: int
    p: int = 0
    min_separation: float | None = None
    amplitude_law: str = "half_plus_chisq1"
    fixed_amplitude: float = 1.0
    master_seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.s < 0:
            raise ModelError("n, m must be positive and s non-negative")
        if self.m > self.n:
            raise ModelError(f"m={self.m} exceeds n={self.n}")
        if not 0 <= self.p <= self.s:
            raise ModelError(f"p={self.p} outside [0, s={self.s}]")
        if self.min_separation is not None:
            if self.min_separation <= 0:
                raise ModelError("min_separation must be positive")
            if self.s * self.min_separation > 1.0:
                raise ModelError(f"s*min_separation = {self.s * self.min_separation:g} > 1")
        if self.amplitude_law not in ("half_plus_chisq1", "fixed"):
            raise ModelError(f"unknown amplitude law {self.amplitude_law!r}")
        if self.amplitude_law == "fixed" and not self.fixed_amplitude > 0:
            raise ModelError("fixed amplitude must be positive")
        if self.master_seed < 0:
            raise ModelError("master_seed must be unsigned")

    @classmethod
    def from_dict(cls, d: dict) -> "InstanceConfig":
        try:
            return cls(**d)
        except TypeError as exc:
            raise ModelError(str(exc)) from exc


@dataclass(frozen=True)
class Instance:
    n: int
    observed: np.ndarray
    samples: np.ndarray
    truth: LineSpectrum
    seed: int = 0
    trial: int = 0

    def __post_init__(self):
        obs = np.asarray(self.observed, dtype=np.int64)
        smp = np.asarray(self.samples, dtype=complex)
        object.__setattr__(self, "observed", obs)
        object.__setattr__(self, "samples", smp)
        if obs.ndim != 1 or np.any(np.diff(obs) <= 0):
            raise ModelError("observed indices must be strictly increasing")
        if obs.size and (obs[0] < 0 or obs[-1] >= self.n):
            raise ModelError("observed index outside [0, n)")
        if smp.shape != obs.shape:
            raise ModelError("samples and observed differ in length")

    @property
    def m(self) -> int:
        return int(self.observed.size)

    @property
    def s(self) -> int:
        return len(self.truth)

    @property
    def p(self) -> int:
        return len(self.truth.known)

    @property
    def known_freqs(self) -> np.ndarray:
        return np.array([ln.freq for ln in self.truth.known], dtype=float)

    def with_known(self, p: int) -> "Instance":
        """Same realization with the first ``p`` truth lines known (nested in ``p``)."""
        return replace(self, truth=self.truth.with_known_prefix(p))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "observed": [int(i) for i in self.observed],
            "samples": [[float(z.real), float(z.imag)] for z in self.samples],
            "truth": [
                {"freq": ln.freq, "amplitude": ln.amplitude, "phase": ln.phase, "known": ln.known}
                for ln in self.truth
            ],
            "seed": int(self.seed),
            "trial": int(self.trial),
        }

    @classmethod
    def from_json(cls, d: dict) -> "Instance":
        try:
            truth = LineSpectrum(tuple(
                SpectralLine(float(ln["freq"]), float(ln["amplitude"]), float(ln["phase"]), bool(ln.get("known", False)))
                for ln in d.get("truth", [])
            ))
            samples = np.array([complex(re, im) for re, im in d["samples"]], dtype=complex)
            return cls(int(d["n"]), np.array(d["observed"], dtype=np.int64), samples, truth,
                       int(d.get("seed", 0)), int(d.get("trial", 0)))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ModelError):
                raise
            raise ModelError(f"malformed instance document: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(trial_index)]))


def draw_instance(config: InstanceConfig, trial_index: int = 0) -> Instance:
    """Random instance for one trial.

    The random stream depends only on ``(master_seed, trial_index)``; ``p`` only
    decides how many lines of a per-trial random ordering are flagged known,
    so known sets are nested across ``p`` for the same trial.
    """
    rng = trial_rng(config.master_seed, trial_index)
    s = config.s
    freqs = draw_frequencies(s, config.min_separation, rng)
    phases = rng.uniform(0.0, TWO_PI, size=s)
    if config.amplitude_law == "half_plus_chisq1":
        amps = 0.5 + rng.standard_normal(s) ** 2
    else:
        amps = np.full(s, float(config.fixed_amplitude))
    observed = np.sort(rng.choice(config.n, size=config.m, replace=False))
    order = rng.permutation(s)
    lines = tuple(
        SpectralLine(float(freqs[j]), float(amps[j]), wrap_phase(float(phases[j])), rank < config.p)
        for rank, j in enumerate(order)
    )
    truth = LineSpectrum(lines)
    return Instance(config.n, observed, synthesize(truth, observed), truth, config.master_seed, trial_index)


def make_instance(n: int, observed: Sequence[int], truth: LineSpectrum | Iterable[SpectralLine],
                  seed: int = 0) -> Instance:
    truth = truth if isinstance(truth, LineSpectrum) else LineSpectrum(tuple(truth))
    obs = np.asarray(observed, dtype=np.int64)
    return Instance(n, obs, synthesize(truth, obs), truth, seed)
