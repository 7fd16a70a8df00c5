"""Oscillating test functions and noise injection for the synthetic benchmarks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["FUNCTIONS", "DEFAULT_DOMAINS", "FunctionSpec", "sample_function", "add_noise"]


def f1(x):
    return (x + 1) * np.sin(100 * (x + 1) ** 2)


def f2(x):
    """Airy-type function, singular at 0."""
    return x ** (-0.25) * np.sin(2.0 / 3.0 * x**1.5)


def f3(x):
    """Chirp."""
    return np.sin(x / 4) * np.cos(x**2)


FUNCTIONS = {"f1": f1, "f2": f2, "f3": f3}
DEFAULT_DOMAINS = {"f1": (0.0, 1.0), "f2": (1.0, 100.0), "f3": (0.0, 4 * np.pi)}


@dataclass(frozen=True)
class FunctionSpec:
    id: str
    n: int = 4
    d: int = 10
    domain: tuple[float, float] | None = None

    def __post_init__(self):
        if self.id not in FUNCTIONS and self.id != "const":
            raise ValueError(f"unknown function {self.id!r}")
        if self.n < 2 or self.d < 2:
            raise ValueError("need n >= 2 and d >= 2")
        a, b = self.bounds
        if not b > a:
            raise ValueError(f"empty domain [{a}, {b}]")

    @property
    def bounds(self) -> tuple[float, float]:
        if self.domain is not None:
            return tuple(map(float, self.domain))
        return DEFAULT_DOMAINS.get(self.id, (0.0, 1.0))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d


def sample_function(spec: FunctionSpec) -> np.ndarray:
    """Samples on ``n**d`` uniform points of the closed domain."""
    a, b = spec.bounds
    if spec.id == "f2" and a <= 0:
        raise ArithmeticError("f2 is only defined for x > 0")
    x = np.linspace(a, b, spec.n**spec.d)
    if spec.id == "const":
        return np.ones_like(x)
    return FUNCTIONS[spec.id](x)


def add_noise(v: np.ndarray, snr_db: float, seed: int = 0) -> np.ndarray:
    """Add white Gaussian noise at the given signal-to-noise ratio.

    ``sigma**2 = ||v||^2 / (len(v) * 10**(snr_db / 10))``, so the expected
    noise energy matches the requested SNR.
    """
    v = np.asarray(v, dtype=np.float64)
    power = float(np.dot(v.ravel(), v.ravel()))
    if power == 0:
        raise ArithmeticError("cannot set an SNR for a zero signal")
    sigma = np.sqrt(power / (v.size * 10 ** (snr_db / 10)))
    rng = np.random.default_rng(seed)
    return v + sigma * rng.standard_normal(v.shape)
