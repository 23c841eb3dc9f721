"""Samplers for finite-alphabet processes and Langevin diffusions.

All randomness flows through counter-based Philox streams keyed by
explicit 64-bit seeds, spawned deterministically for substreams, so every
sampler is reproducible across runs and across parallel execution.
Samplers pre-draw their uniforms and then step deterministically, which
keeps the compiled and fallback backends on identical paths.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .core import Alphabet, MarkovMeasure, PathSample, format_float
from .errors import Diverged, InsufficientLength, InvalidParameter


def rng_from_seed(seed: int, *spawn_key) -> np.random.Generator:
    """Philox generator for a seed, optionally descended along a spawn key."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(spawn_key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class ObservedSystemSpec:
    """An observation source plus an optional symbol-wise noise channel.

    ``source`` is a MarkovMeasure or a Gibbs model (anything carrying a
    ``markov`` attribute).  ``channel`` maps each source symbol to a
    distribution over the observation alphabet; None means the identity
    channel.  Substreams for the source and channel are spawned from the
    caller's seed, recorded by ``seed_policy``.
    """

    source: object
    obs_alphabet: Alphabet | None = None
    channel: np.ndarray | None = None
    seed_policy: str = "spawn(source=0, channel=1)"

    def __post_init__(self):
        if self.channel is not None:
            ch = np.array(self.channel, dtype=float)
            ch.setflags(write=False)
            object.__setattr__(self, "channel", ch)
            rows = ch.sum(axis=1)
            if np.abs(rows - 1.0).max() > 1e-12 or ch.min() < 0:
                raise ValueError("channel rows must be probability vectors")

    @property
    def source_markov(self) -> MarkovMeasure:
        src = self.source
        return src if isinstance(src, MarkovMeasure) else src.markov


@dataclass(frozen=True)
class LangevinSpec:
    """Overdamped Langevin step data: dx = -grad W dt + sqrt(2) dB.

    The noise coefficient is fixed at sqrt(2), so a strongly convex W
    with curvature rho has stationary variance 1/rho per coordinate.
    """

    gradient: object
    dt: float
    x0: np.ndarray
    sigma_scale: float = math.sqrt(2.0)

    def __post_init__(self):
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)
        if not self.dt > 0:
            raise InvalidParameter(f"dt must be positive, got {self.dt}")
        if self.sigma_scale != math.sqrt(2.0):
            raise InvalidParameter("the noise scale is fixed at sqrt(2)")
        g0 = np.asarray(self.gradient(x0), dtype=float)
        if not np.all(np.isfinite(g0)):
            raise InvalidParameter("gradient is not finite at x0")


def _markov_symbols(model: MarkovMeasure, t: int, rng: np.random.Generator) -> np.ndarray:
    k = model.order
    size = model.alphabet.size
    u_init = rng.random()
    us = rng.random(t - k)
    cum_init = np.cumsum(model.stationary.weights)
    ctx = min(int(np.searchsorted(cum_init, u_init, side="right")), size**k - 1)
    head = np.array(
        [(ctx // size**i) % size for i in range(k - 1, -1, -1)], dtype=np.int64
    )
    cum_kernel = np.cumsum(model.kernel, axis=1)
    tail = _backend.kernels().markov_path(
        np.ascontiguousarray(cum_kernel), ctx, np.ascontiguousarray(us), size, size**k
    )
    return np.concatenate([head, tail])


def sample_markov(model: MarkovMeasure, t: int, seed: int, origin: str = "markov") -> PathSample:
    """Stationary sample: initial block from the stationary law, then kernel steps."""
    if t < max(model.order, 1):
        raise InsufficientLength(f"horizon {t} below the model order {model.order}")
    return PathSample(model.alphabet, _markov_symbols(model, t, rng_from_seed(seed)), seed, origin)


def sample_gibbs(model, t: int, seed: int) -> PathSample:
    """Sample of a Gibbs model through its Markov representation."""
    return sample_markov(model.markov, t, seed, origin="gibbs")


def sample_langevin(spec: LangevinSpec, t_steps: int, seed: int) -> np.ndarray:
    """Euler-Maruyama path of shape (t_steps + 1, d), starting at x0."""
    if t_steps < 1:
        raise InsufficientLength("need at least one step")
    rng = rng_from_seed(seed)
    d = spec.x0.shape[0]
    noise = rng.standard_normal((t_steps, d)) * math.sqrt(2.0 * spec.dt)
    path = np.empty((t_steps + 1, d))
    path[0] = spec.x0
    x = spec.x0.astype(float)
    for n in range(t_steps):
        x = x - np.asarray(spec.gradient(x), dtype=float) * spec.dt + noise[n]
        if not np.all(np.isfinite(x)):
            raise Diverged(f"non-finite state at step {n + 1}", step=n + 1)
        path[n + 1] = x
    return path


def generate_observation(spec: ObservedSystemSpec, t: int, seed: int) -> PathSample:
    """Observation path: source sample pushed through the channel when present."""
    if t < 1:
        raise InsufficientLength("horizon must be positive")
    ss = np.random.SeedSequence(entropy=int(seed))
    source_seed, channel_seed = ss.spawn(2)
    source = spec.source_markov
    rng_src = np.random.Generator(np.random.Philox(source_seed))
    horizon = max(t, source.order)
    symbols = _markov_symbols(source, horizon, rng_src)[:t]
    if spec.channel is None:
        return PathSample(source.alphabet, symbols, seed, origin="observation")
    out_alpha = spec.obs_alphabet or source.alphabet
    rng_ch = np.random.Generator(np.random.Philox(channel_seed))
    u_ch = rng_ch.random(t)
    cum_ch = np.cumsum(spec.channel, axis=1)
    observed = np.empty(t, dtype=np.int64)
    for s in range(spec.channel.shape[0]):
        mask = symbols == s
        if mask.any():
            hits = np.searchsorted(cum_ch[s], u_ch[mask], side="right")
            observed[mask] = np.minimum(hits, spec.channel.shape[1] - 1)
    return PathSample(out_alpha, observed, seed, origin="observation")


def write_path_text(path, sample: PathSample) -> None:
    """One symbol label per line."""
    with open(path, "w", newline="") as fh:
        for s in sample.symbols:
            fh.write(sample.alphabet.symbols[s] + "\n")


def write_langevin_csv(path, trajectory: np.ndarray) -> None:
    """CSV with columns step, x_1..x_d."""
    trajectory = np.atleast_2d(trajectory)
    d = trajectory.shape[1]
    header = "step," + ",".join(f"x_{i + 1}" for i in range(d))
    lines = [header]
    for n, row in enumerate(trajectory):
        lines.append(str(n) + "," + ",".join(format_float(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
