"""Seeded generators for the six simulated benchmark families.

Every generator is a pure function of its ``SimSpec``: the seed fully
determines the output, bit for bit. Segment boundaries are placed by
splitting the series into near-equal parts with +/-10% seeded jitter, and the
returned bundle carries them as ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import ChangePointSet, SignalBundle, TimeSeries

#: family name -> default number of segments (intermediate CPs = segments - 1)
FAMILY_SEGMENTS = {
    "piecewise_constant": 7,
    "piecewise_linear": 6,
    "changing_variance": 7,
    "autoregressive": 6,
    "exponential_decay": 6,
    "oscillating": 12,
}

#: families whose noise parameter scales an additive Gaussian term
_ADDITIVE_NOISE_DEFAULT = 0.1


def canonical_family(name: str) -> str:
    key = name.strip().lower().replace("-", "_").replace(" ", "_")
    aliases = {
        "piecewiseconstant": "piecewise_constant",
        "piecewiselinear": "piecewise_linear",
        "changingvariance": "changing_variance",
        "ar": "autoregressive",
        "exponentialdecay": "exponential_decay",
        "exp_decay": "exponential_decay",
        "oscillating_data": "oscillating",
    }
    key = aliases.get(key, key)
    if key not in FAMILY_SEGMENTS:
        raise ValueError(f"unknown dataset family {name!r}")
    return key


@dataclass(frozen=True)
class SimSpec:
    """Recipe for one simulated dataset.

    ``noise`` is interpreted per family: a scale on the per-segment standard
    deviations for the piecewise-constant / changing-variance / autoregressive
    families (default 1.0) and the standard deviation of additive Gaussian
    noise for the remaining ones (default 0.1). ``None`` picks the default;
    0 yields the deterministic skeleton.
    """

    family: str
    n: int = 1400
    segments: int | None = None
    seed: int = 0
    noise: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", canonical_family(self.family))
        segs = self.segments if self.segments is not None else FAMILY_SEGMENTS[self.family]
        if segs < 2:
            raise ValueError("need at least two segments")
        if self.n < 10 * segs:
            raise ValueError(f"n={self.n} too small for {segs} segments (need >= {10 * segs})")
        if self.noise is not None and self.noise < 0:
            raise ValueError("noise must be nonnegative")
        object.__setattr__(self, "segments", segs)


def _boundaries(rng: np.random.Generator, n: int, segments: int) -> np.ndarray:
    """Near-equal segment boundaries with +/-10% jitter, strictly increasing."""
    base = n / segments
    raw = base * np.arange(1, segments) + rng.uniform(-0.1, 0.1, segments - 1) * base
    pts = np.round(raw).astype(int)
    min_gap = max(2, int(base * 0.5))
    pts = np.clip(pts, min_gap, n - min_gap)
    for i in range(1, pts.size):  # restore strict ordering after clipping
        pts[i] = max(pts[i], pts[i - 1] + min_gap)
    return pts


def _segment_slices(bounds: np.ndarray, n: int) -> list[tuple[int, int]]:
    edges = [0, *bounds.tolist(), n]
    return list(zip(edges[:-1], edges[1:]))


def _bundle(spec: SimSpec, values: np.ndarray, bounds: np.ndarray) -> SignalBundle:
    ts = TimeSeries(values, dt=1.0, t0=0.0, label=spec.family)
    return SignalBundle((ts,), truth=ChangePointSet(tuple(int(b) for b in bounds), spec.n))


def gen_piecewise_constant(spec: SimSpec) -> SignalBundle:
    """Independent Gaussian segments with randomised mean and spread.

    Means are uniform on (-10, 10) and consecutive means are kept at least
    one unit apart so every boundary is an actual level change; per-segment
    standard deviations are |U(-1, 1)| times the noise scale.
    """
    rng = np.random.default_rng(spec.seed)
    bounds = _boundaries(rng, spec.n, spec.segments)
    scale = 1.0 if spec.noise is None else spec.noise
    means: list[float] = []
    for _ in range(spec.segments):
        mu = rng.uniform(-10.0, 10.0)
        while means and abs(mu - means[-1]) < 1.0:
            mu = rng.uniform(-10.0, 10.0)
        means.append(mu)
    sigmas = scale * np.abs(rng.uniform(-1.0, 1.0, spec.segments))
    y = np.empty(spec.n)
    for j, (a, b) in enumerate(_segment_slices(bounds, spec.n)):
        y[a:b] = rng.normal(means[j], sigmas[j], b - a)
    return _bundle(spec, y, bounds)


def gen_piecewise_linear(spec: SimSpec) -> SignalBundle:
    """Continuous piecewise-linear mean scaled to [-1, 1] plus i.i.d. noise.

    Slopes alternate in sign with magnitudes in U(0.5, 2), so both sign and
    magnitude change at every boundary.
    """
    rng = np.random.default_rng(spec.seed)
    bounds = _boundaries(rng, spec.n, spec.segments)
    sigma = _ADDITIVE_NOISE_DEFAULT if spec.noise is None else spec.noise
    sign = rng.choice([-1.0, 1.0])
    line = np.empty(spec.n)
    level = 0.0
    for a, b in _segment_slices(bounds, spec.n):
        slope = sign * rng.uniform(0.5, 2.0)
        line[a:b] = level + slope * np.arange(b - a)
        level = line[b - 1] + slope  # keep the next segment continuous
        sign = -sign
    lo, hi = line.min(), line.max()
    line = 2.0 * (line - lo) / (hi - lo) - 1.0
    y = line + rng.normal(0.0, sigma, spec.n) if sigma > 0 else line
    return _bundle(spec, y, bounds)


def gen_changing_variance(spec: SimSpec) -> SignalBundle:
    """Zero-mean Gaussian segments whose spread changes at every boundary."""
    rng = np.random.default_rng(spec.seed)
    bounds = _boundaries(rng, spec.n, spec.segments)
    scale = 1.0 if spec.noise is None else spec.noise
    sigmas: list[float] = []
    for _ in range(spec.segments):
        s = abs(rng.uniform(-1.0, 1.0))
        if scale > 0:
            while sigmas and (0.8 <= s / max(sigmas[-1], 1e-12) <= 1.25):
                s = abs(rng.uniform(-1.0, 1.0))
        sigmas.append(s)
    y = np.empty(spec.n)
    for j, (a, b) in enumerate(_segment_slices(bounds, spec.n)):
        y[a:b] = rng.normal(0.0, scale * sigmas[j], b - a)
    return _bundle(spec, y, bounds)


def gen_autoregressive(spec: SimSpec) -> SignalBundle:
    """Two AR(1) regimes alternating across the segments.

    The pattern (c_A, phi_A) -> (c_B, phi_B) repeats, giving a strong lag
    structure change and a mild stationary-mean change at each boundary (the
    mean gap stays below the stationary spread, so mean-tracking costs see a
    much weaker signal than model-fitting ones). Innovations are standard
    normal times the noise scale.
    """
    rng = np.random.default_rng(spec.seed)
    bounds = _boundaries(rng, spec.n, spec.segments)
    scale = 1.0 if spec.noise is None else spec.noise
    phi_a = rng.uniform(0.5, 0.75)
    phi_b = rng.uniform(-0.75, -0.35)
    mean_a = rng.uniform(0.4, 0.8)
    mean_b = -mean_a
    params = [(mean_a * (1 - phi_a), phi_a), (mean_b * (1 - phi_b), phi_b)]
    y = np.empty(spec.n)
    prev = mean_a + scale * rng.standard_normal()
    eps = scale * rng.standard_normal(spec.n)
    for j, (a, b) in enumerate(_segment_slices(bounds, spec.n)):
        c, phi = params[j % 2]
        for t in range(a, b):
            prev = c + phi * prev + eps[t]
            y[t] = prev
    return _bundle(spec, y, bounds)


def gen_exponential_decay(spec: SimSpec) -> SignalBundle:
    """Repeats of (exponential decay -> linear rise), continuous throughout."""
    if spec.segments % 2:
        raise ValueError("exponential_decay needs an even segment count")
    rng = np.random.default_rng(spec.seed)
    bounds = _boundaries(rng, spec.n, spec.segments)
    sigma = _ADDITIVE_NOISE_DEFAULT if spec.noise is None else spec.noise
    slices = _segment_slices(bounds, spec.n)
    peaks = rng.uniform(5.0, 10.0, spec.segments // 2 + 1)
    y = np.empty(spec.n)
    for r in range(spec.segments // 2):
        a, b = slices[2 * r]
        length = b - a
        decay = peaks[r] * np.exp(-5.0 * np.arange(length) / length)
        y[a:b] = decay
        a2, b2 = slices[2 * r + 1]
        start = peaks[r] * np.exp(-5.0)
        y[a2:b2] = np.linspace(start, peaks[r + 1], b2 - a2, endpoint=False)
    if sigma > 0:
        y = y + rng.normal(0.0, sigma, spec.n)
    return _bundle(spec, y, bounds)


def gen_oscillating(spec: SimSpec) -> SignalBundle:
    """Repeated motif: sigmoid rise, damped oscillation, plateau, linear decay."""
    if spec.segments % 4:
        raise ValueError("oscillating needs a multiple of four segments")
    rng = np.random.default_rng(spec.seed)
    bounds = _boundaries(rng, spec.n, spec.segments)
    sigma = _ADDITIVE_NOISE_DEFAULT if spec.noise is None else spec.noise
    slices = _segment_slices(bounds, spec.n)
    y = np.empty(spec.n)
    for r in range(spec.segments // 4):
        plateau = rng.uniform(3.0, 8.0)
        a, b = slices[4 * r]
        tau = np.arange(b - a) / (b - a)
        y[a:b] = plateau / (1.0 + np.exp(-12.0 * (tau - 0.5)))
        a, b = slices[4 * r + 1]
        tau = np.arange(b - a)
        damping = 4.0 / (b - a)
        cycles = 2.0 * np.pi * 6.0 / (b - a)
        y[a:b] = plateau + (plateau / 2.0) * np.exp(-damping * tau) * np.cos(cycles * tau)
        a, b = slices[4 * r + 2]
        y[a:b] = plateau
        a, b = slices[4 * r + 3]
        y[a:b] = np.linspace(plateau, 0.0, b - a, endpoint=False)
    if sigma > 0:
        y = y + rng.normal(0.0, sigma, spec.n)
    return _bundle(spec, y, bounds)


_GENERATORS = {
    "piecewise_constant": gen_piecewise_constant,
    "piecewise_linear": gen_piecewise_linear,
    "changing_variance": gen_changing_variance,
    "autoregressive": gen_autoregressive,
    "exponential_decay": gen_exponential_decay,
    "oscillating": gen_oscillating,
}


def generate(spec: SimSpec) -> SignalBundle:
    """Dispatch to the family generator."""
    return _GENERATORS[spec.family](spec)
