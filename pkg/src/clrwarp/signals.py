"""Signal containers, the synthetic experiment pairs, noise, and acoustic envelopes."""

import logging
import struct
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .numerics import Grid
from .warp import WarpField, clr_forward

__all__ = [
    "Signal",
    "GroundTruth",
    "gaussian_mixture",
    "make_toy_pair",
    "add_noise",
    "rms_envelope",
    "parse_wav_pcm16",
    "WavFormatError",
    "EnvelopeError",
    "noisy_pair",
    "EXPERIMENTS",
]

log = logging.getLogger(__name__)

EXPERIMENTS = ("triangle_2to1", "inverse_seesaw", "three_gaussian")


@dataclass(frozen=True, eq=False)
class Signal:
    grid: Grid
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n_points,):
            raise ValueError(f"signal needs {self.grid.n_points} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("signal values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.grid.n_points


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Analytic true warp with its CLR field and closed-form derivatives."""

    warp: WarpField
    psi0: np.ndarray
    psi0_d1: np.ndarray
    psi0_d2: np.ndarray


def gaussian_mixture(amps, centers, widths, grid):
    """Sum of Gaussian bumps ``A exp(-(t - mu)^2 / (2 s^2))`` sampled on ``grid``."""
    amps, centers, widths = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (amps, centers, widths))
    if not (amps.shape == centers.shape == widths.shape):
        raise ValueError("amps, centers and widths must have equal length")
    if np.any(widths <= 0):
        raise ValueError("Gaussian widths must be positive")
    t = grid.nodes[:, None]
    vals = (amps * np.exp(-((t - centers) ** 2) / (2.0 * widths**2))).sum(axis=1)
    return Signal(grid, vals, "gaussian_mixture")


def _sine_series_truth(grid, coefs):
    """Truth for ``gamma(t) = t + sum_k a_k sin(k pi t)``.

    Derivatives of ``log gamma'`` are closed form: with v = gamma',
    psi' = v'/v and psi'' = v''/v - (v'/v)^2.
    """
    t = grid.nodes
    k = np.arange(1, len(coefs) + 1)[:, None] * np.pi
    a = np.asarray(coefs, dtype=float)[:, None]
    gamma = t + (a * np.sin(k * t)).sum(axis=0)
    v = 1.0 + (a * k * np.cos(k * t)).sum(axis=0)
    v1 = -(a * k**2 * np.sin(k * t)).sum(axis=0)
    v2 = -(a * k**3 * np.cos(k * t)).sum(axis=0)
    gamma[0], gamma[-1] = 0.0, 1.0
    warp = WarpField.from_samples(grid, gamma, v)
    d1 = v1 / v
    d2 = v2 / v - d1**2
    return GroundTruth(warp, clr_forward(v, grid), d1, d2)


def _triangle(t, peak):
    return np.where(t <= 0.5, 2.0 * peak * t, 2.0 * peak * (1.0 - t))


SEESAW_WARP = (0.22,)
HARMONIC_WARP = (0.25, 0.06, 0.05)


def make_toy_pair(name, grid=None):
    """Noise-free ``(f, g, truth)`` for a named experiment.

    ``f`` is the target and ``g`` the source to be warped (``f ~ g o gamma``).

    * ``triangle_2to1``: triangle waves of height 2 and 1; truth is the identity.
    * ``inverse_seesaw``: Gaussian pairs with swapped peak shapes,
      ``gamma(t) = t + 0.22 sin(pi t)``.
    * ``three_gaussian``: ``f = 1.05 g o gamma`` with
      ``gamma(t) = t + 0.25 sin(pi t) + 0.06 sin(2 pi t) + 0.05 sin(3 pi t)``.
    """
    grid = grid or Grid(1000)
    t = grid.nodes
    if name == "triangle_2to1":
        f = Signal(grid, _triangle(t, 2.0), "f")
        g = Signal(grid, _triangle(t, 1.0), "g")
        return f, g, _sine_series_truth(grid, ())
    if name == "inverse_seesaw":
        g = gaussian_mixture([0.6, 1.5], [0.3, 0.7], [0.10, 0.04], grid)
        truth = _sine_series_truth(grid, SEESAW_WARP)
        latent = _mixture_at(truth.warp.gamma, [1.4, 0.5], [0.3, 0.7], [0.04, 0.10])
        return Signal(grid, latent, "f"), Signal(grid, g.values, "g"), truth
    if name == "three_gaussian":
        amps, centers, widths = [0.7, 0.4, 1.0], [0.25, 0.5, 0.75], [0.11, 0.08, 0.11]
        g = gaussian_mixture(amps, centers, widths, grid)
        truth = _sine_series_truth(grid, HARMONIC_WARP)
        f = 1.05 * _mixture_at(truth.warp.gamma, amps, centers, widths)
        return Signal(grid, f, "f"), Signal(grid, g.values, "g"), truth
    raise ValueError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")


def _mixture_at(x, amps, centers, widths):
    x = np.asarray(x, dtype=float)[:, None]
    amps, centers, widths = (np.asarray(a, dtype=float) for a in (amps, centers, widths))
    return (amps * np.exp(-((x - centers) ** 2) / (2.0 * widths**2))).sum(axis=1)


def add_noise(signal, sigma, seed):
    """Add i.i.d. N(0, sigma^2) noise.

    Draws come from numpy's PCG64 bit generator seeded with ``seed``, so the
    output is a deterministic function of ``(seed, N)``.
    """
    if sigma < 0:
        raise ValueError("noise level must be non-negative")
    if sigma == 0:
        return Signal(signal.grid, signal.values, signal.label)
    rng = np.random.Generator(np.random.PCG64(seed))
    noise = rng.normal(0.0, sigma, size=signal.grid.n_points)
    return Signal(signal.grid, signal.values + noise, signal.label)


def rms_envelope(samples, sample_rate, window_seconds, n_points=1000, normalize=True):
    """Moving-window RMS envelope, resampled to ``n_points`` and min-max normalized.

    The window is centered and keeps its full length near the edges by
    sliding inward. A flat envelope cannot be normalized and maps to zeros.
    Pass ``normalize=False`` to get the raw RMS level instead.

    Raises
    ------
    EnvelopeError
        ``window-exceeds-signal`` when the window is longer than the recording.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("need a non-empty 1-D sample array")
    if sample_rate <= 0 or window_seconds <= 0:
        raise ValueError("sample rate and window length must be positive")
    win = int(round(window_seconds * sample_rate))
    if win > x.size:
        raise EnvelopeError("window-exceeds-signal", f"{win} samples > {x.size}")
    if win < 2:
        raise ValueError("window must cover at least 2 samples")

    csum = np.concatenate([[0.0], np.cumsum(x * x)])
    idx = np.arange(x.size)
    lo = np.clip(idx - win // 2, 0, x.size)
    hi = np.clip(lo + win, 0, x.size)
    lo = np.maximum(hi - win, 0)
    env = np.sqrt(np.maximum((csum[hi] - csum[lo]) / (hi - lo), 0.0))

    grid = Grid(n_points)
    src_t = np.linspace(0.0, 1.0, x.size) if x.size > 1 else np.zeros(1)
    if x.size >= 4:
        env = CubicSpline(src_t, env, bc_type="natural")(grid.nodes)
    else:
        env = np.interp(grid.nodes, src_t, env)
    if not normalize:
        return Signal(grid, env, "envelope")
    span = env.max() - env.min()
    if span <= 1e-12 * max(1.0, abs(env.max())):
        log.warning("flat envelope cannot be min-max normalized; returning zeros")
        return Signal(grid, np.zeros(n_points), "envelope")
    env = np.clip((env - env.min()) / span, 0.0, 1.0)
    return Signal(grid, env, "envelope")


class EnvelopeError(ValueError):
    """Envelope extraction failed; ``reason`` is a stable short code."""

    def __init__(self, reason, detail=""):
        self.reason = reason
        super().__init__(f"{reason}: {detail}" if detail else reason)


class WavFormatError(ValueError):
    """Unsupported or malformed WAV input; ``reason`` is a stable short code."""

    def __init__(self, reason, detail=""):
        self.reason = reason
        super().__init__(f"{reason}: {detail}" if detail else reason)


def parse_wav_pcm16(data):
    """Decode a RIFF/WAVE PCM16 mono byte string.

    Returns ``(samples, sample_rate)`` with samples scaled by 1/32768.
    """
    data = bytes(data)
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavFormatError("malformed-container", "missing RIFF/WAVE header")
    pos = 12
    fmt = None
    payload = None
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if len(body) < size and cid != b"data":
            raise WavFormatError("malformed-container", f"truncated {cid!r} chunk")
        if cid == b"fmt ":
            if size < 16:
                raise WavFormatError("malformed-container", "fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data":
            payload = body
            break
        pos += 8 + size + (size & 1)
    if fmt is None:
        raise WavFormatError("malformed-container", "no fmt chunk")
    if payload is None:
        raise WavFormatError("malformed-container", "no data chunk")
    code, channels, rate, _, _, bits = fmt
    if code != 1:
        raise WavFormatError("unsupported-format-code", f"format code {code}")
    if bits != 16:
        raise WavFormatError("unsupported-bit-depth", f"{bits} bits per sample")
    if channels != 1:
        raise WavFormatError("unsupported-channel-count", f"{channels} channels")
    n = len(payload) // 2
    samples = np.frombuffer(payload[: 2 * n], dtype="<i2").astype(float) / 32768.0
    return samples, float(rate)


def load_envelope(path, window_seconds=0.025, n_points=1000):
    with open(path, "rb") as fh:
        samples, rate = parse_wav_pcm16(fh.read())
    env = rms_envelope(samples, rate, window_seconds, n_points)
    return Signal(env.grid, env.values, str(path))


def noisy_pair(name, sigma, seed, grid=None):
    """Toy pair with independent noise on both signals.

    ``f`` uses stream ``2 * seed`` and ``g`` uses ``2 * seed + 1`` so the two
    noise draws never coincide.
    """
    f, g, truth = make_toy_pair(name, grid)
    return add_noise(f, sigma, 2 * seed), add_noise(g, sigma, 2 * seed + 1), truth
