"""Pressure, Gibbs measures, and Gibbs-property certification.

Potentials have finite range r on the one-sided full shift, so the
transfer operator is a nonnegative matrix on (r-1)-blocks and the Gibbs
measure is an exact order-(r-1) Markov measure built from its principal
eigenvectors.  The Gibbs constant N is certified empirically by sweeping
all cylinder words up to a recorded depth.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (
    Alphabet,
    BlockMeasure,
    MarkovMeasure,
    block_marginal,
    decode_word,
    encode_word,
    format_word,
    parse_word,
)
from .errors import EmptyFamily, SolverStall, TooLarge

STATE_GUARD = 10**6
ENUM_GUARD = 10**7


@dataclass(frozen=True)
class FiniteRangePotential:
    """A real function of the first ``range`` symbols, tabulated per word."""

    alphabet: Alphabet
    range: int
    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)
        if self.range < 1:
            raise ValueError("potential range must be positive")
        expected = self.alphabet.size**self.range
        if t.shape != (expected,):
            raise ValueError(f"table must cover all {expected} words, got {t.shape}")
        if not np.all(np.isfinite(t)):
            raise ValueError("potential values must be finite")


def potential_to_json(potential: FiniteRangePotential) -> dict:
    alpha = potential.alphabet
    return {
        "range": potential.range,
        "table": {
            format_word(alpha, decode_word(c, potential.range, alpha.size)): float(v)
            for c, v in enumerate(potential.table)
        },
    }


def potential_from_json(alphabet: Alphabet, doc: dict) -> FiniteRangePotential:
    r = int(doc["range"])
    table = np.zeros(alphabet.size**r)
    for key, value in doc["table"].items():
        table[encode_word(parse_word(alphabet, key), alphabet.size)] = float(value)
    return FiniteRangePotential(alphabet, r, table)


class _Transfer:
    """Functional form of the transfer matrix on (r-1)-blocks.

    Row u, symbol s carries weight exp(phi(u s) - shift); the successor
    state is the code of (u s) modulo S**(r-1).  Never materialized as a
    dense matrix.
    """

    def __init__(self, size: int, r: int, log_weights: np.ndarray):
        self.n = size ** (r - 1)
        self.size = size
        self.shift = float(log_weights.max())
        self.w = np.exp(log_weights - self.shift).reshape(self.n, size)
        states = np.arange(self.n, dtype=np.int64)[:, None]
        self.succ = (states * size + np.arange(size)[None, :]) % self.n

    def right(self, v: np.ndarray) -> np.ndarray:
        return (self.w * v[self.succ]).sum(axis=1)

    def left(self, u: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n)
        np.add.at(out, self.succ, u[:, None] * self.w)
        return out


def _principal(transfer: _Transfer, apply_fn, rtol: float = 1e-14, max_iter: int = 200000):
    """Perron eigenvalue and eigenvector by normalized iteration.

    The min/max of the per-state ratios bracket the eigenvalue for a
    primitive nonnegative matrix; iteration stops when the bracket closes
    to ``rtol`` relative width.
    """
    v = np.ones(transfer.n)
    lam = 1.0
    stale_since = 0
    best_width = math.inf
    for it in range(max_iter):
        w = apply_fn(v)
        if w.min() <= 0:
            raise SolverStall("transfer iteration left the positive cone")
        ratios = w / v
        lo, hi = float(ratios.min()), float(ratios.max())
        lam = 0.5 * (lo + hi)
        width = hi - lo
        if width <= rtol * lam:
            return lam, w / w.max()
        if width < best_width * (1 - 1e-3):
            best_width, stale_since = width, it
        elif it - stale_since > 200:
            # bracket stopped improving; accept if close, else stall
            if width <= 100 * rtol * lam:
                return lam, w / w.max()
            raise SolverStall(
                f"eigenvalue bracket stalled at relative width {width / lam:.3e}"
            )
        v = w / w.max()
    raise SolverStall(f"no convergence within {max_iter} iterations")


def pressure(potential: FiniteRangePotential) -> float:
    """Log spectral radius of the transfer matrix of the potential."""
    size = potential.alphabet.size
    if size**potential.range > STATE_GUARD:
        raise TooLarge(
            f"{size}**{potential.range} transfer states exceed the {STATE_GUARD} guard"
        )
    transfer = _Transfer(size, potential.range, potential.table)
    lam, _ = _principal(transfer, transfer.right, rtol=1e-13)
    return math.log(lam) + transfer.shift


def _rpf_decomposition(potential: FiniteRangePotential):
    """(log lambda, right v, left u, transfer) with u, v normalized positive."""
    size = potential.alphabet.size
    if size**potential.range > STATE_GUARD:
        raise TooLarge(
            f"{size}**{potential.range} transfer states exceed the {STATE_GUARD} guard"
        )
    transfer = _Transfer(size, potential.range, potential.table)
    lam, v = _principal(transfer, transfer.right)
    lam_left, u = _principal(transfer, transfer.left)
    log_lam = math.log(0.5 * (lam + lam_left)) + transfer.shift
    return log_lam, v, u, transfer


def gibbs_markov_measure(potential: FiniteRangePotential) -> MarkovMeasure:
    """Order-(r-1) Markov measure of the potential via its eigenvectors.

    Kernel k(u, s) = exp(phi(u s)) v(next) / (lambda v(u)); stationary law
    proportional to the entrywise product of left and right eigenvectors.
    """
    log_lam, v, u, transfer = _rpf_decomposition(potential)
    lam_shifted = math.exp(log_lam - transfer.shift)
    kernel = transfer.w * v[transfer.succ] / (lam_shifted * v[:, None])
    kernel /= kernel.sum(axis=1, keepdims=True)
    pi = u * v
    pi /= pi.sum()
    alpha = potential.alphabet
    order = potential.range - 1
    return MarkovMeasure(alpha, order, kernel, BlockMeasure(alpha, order, pi))


@dataclass(frozen=True)
class GibbsModel:
    """A potential with its pressure, Markov representation, and certificate.

    ``gibbs_constant`` is the empirical Gibbs-property constant certified
    by sweeping all words up to ``certified_depth``.
    """

    potential: FiniteRangePotential
    pressure: float
    markov: MarkovMeasure
    gibbs_constant: float
    certified_depth: int

    def __post_init__(self):
        if self.gibbs_constant < 1.0:
            raise ValueError("the Gibbs constant is at least 1")


class GibbsCheck(NamedTuple):
    n_hat: float
    worst_word: tuple
    t_max: int


def _cylinder_log_masses(markov: MarkovMeasure, symbols: np.ndarray) -> np.ndarray:
    """log mu([w]) for each row of a (chunk, t) symbol matrix."""
    t = symbols.shape[1]
    k = markov.order
    size = markov.alphabet.size
    if t <= k:
        marg = block_marginal(markov, t)
        powers = size ** np.arange(t - 1, -1, -1)
        with np.errstate(divide="ignore"):
            return np.log(marg.weights)[symbols @ powers]
    with np.errstate(divide="ignore"):
        log_pi = np.log(markov.stationary.weights)
        log_kernel = np.log(markov.kernel)
    if k == 0:
        out = np.zeros(symbols.shape[0])
    else:
        powers = size ** np.arange(k - 1, -1, -1)
        out = log_pi[symbols[:, :k] @ powers]
    ctx = symbols[:, :k] @ (size ** np.arange(k - 1, -1, -1)) if k else np.zeros(
        symbols.shape[0], dtype=np.int64
    )
    for j in range(k, t):
        out = out + log_kernel[ctx, symbols[:, j]]
        if k:
            ctx = (ctx * size + symbols[:, j]) % (size**k)
    return out


def _birkhoff_sums(potential: FiniteRangePotential, extended: np.ndarray, t: int) -> np.ndarray:
    """phi^t along rows of an already-extended (chunk, t + r - 1) symbol matrix."""
    size = potential.alphabet.size
    r = potential.range
    powers = size ** np.arange(r - 1, -1, -1)
    total = np.zeros(extended.shape[0])
    for j in range(t):
        codes = extended[:, j : j + r] @ powers
        total = total + potential.table[codes]
    return total


def _decode_block(codes: np.ndarray, length: int, size: int) -> np.ndarray:
    out = np.empty((codes.shape[0], length), dtype=np.int64)
    rem = codes.copy()
    for pos in range(length - 1, -1, -1):
        rem, out[:, pos] = np.divmod(rem, size)
    return out


def verify_gibbs_property(model: GibbsModel, t_max: int) -> GibbsCheck:
    """Worst cylinder-mass ratio against exp(-P t + phi^t) up to depth t_max.

    The representative point of each word is its periodic extension.
    Returns the certified constant N_hat (max of ratio and 1/ratio over
    all words of length 1..t_max) and the maximizing word.
    """
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    size = model.potential.alphabet.size
    if size**t_max > ENUM_GUARD:
        raise TooLarge(f"{size}**{t_max} words exceed the {ENUM_GUARD} enumeration guard")
    r = model.potential.range
    best = -1.0
    worst = ()
    chunk = 1 << 18
    for t in range(1, t_max + 1):
        total = size**t
        for start in range(0, total, chunk):
            codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
            symbols = _decode_block(codes, t, size)
            log_mass = _cylinder_log_masses(model.markov, symbols)
            extended = np.hstack([symbols, symbols[:, : r - 1]]) if r > 1 else symbols
            phi_t = _birkhoff_sums(model.potential, extended, t)
            log_ratio = log_mass + model.pressure * t - phi_t
            idx = int(np.abs(log_ratio).argmax())
            if abs(log_ratio[idx]) > best:
                best = abs(log_ratio[idx])
                worst = tuple(
                    model.potential.alphabet.symbols[s] for s in symbols[idx]
                )
    return GibbsCheck(float(math.exp(best)), worst, t_max)


def build_gibbs_model(potential: FiniteRangePotential, certify_depth: int = 8) -> GibbsModel:
    """Assemble pressure, Markov representation, and the certified constant."""
    p = pressure(potential)
    markov = gibbs_markov_measure(potential)
    provisional = GibbsModel(potential, p, markov, 1.0, 0)
    check = verify_gibbs_property(provisional, certify_depth)
    return GibbsModel(potential, p, markov, max(check.n_hat, 1.0), certify_depth)


def check_exponential_tilting(model: GibbsModel, t: int, n_events: int, seed: int) -> float:
    """Counting-measure form of the Gibbs bounds on random depth-(t-1) events.

    For each random cylinder-union event E, compares mu(E) against
    |S|^t int_E exp(-P t + phi^t) d(sigma) with sigma the uniform product
    measure, both by exact enumeration.  Returns the worst factor by which
    the ratio escapes [1/N, N] for the model's certified constant; 0 means
    the bounds hold on every probed event.
    """
    from .simulate import rng_from_seed

    size = model.potential.alphabet.size
    if size**t > STATE_GUARD:
        raise TooLarge(f"{size}**{t} words exceed the {STATE_GUARD} guard")
    if t < 2:
        raise ValueError("events live in the depth-(t-1) algebra; need t >= 2")
    r = model.potential.range
    mu_w = block_marginal(model.markov, t - 1).weights
    # integral of exp(-P t + phi^t) over each (t-1)-cylinder under sigma
    full = size ** (t + r - 1)
    integral = np.zeros(size ** (t - 1))
    chunk = 1 << 18
    for start in range(0, full, chunk):
        codes = np.arange(start, min(start + chunk, full), dtype=np.int64)
        symbols = _decode_block(codes, t + r - 1, size)
        phi_t = _birkhoff_sums(model.potential, symbols, t)
        dens = np.exp(phi_t - model.pressure * t)
        np.add.at(integral, codes // size**r, dens)
    integral *= size**t / float(full)
    rng = rng_from_seed(seed)
    n_hat = model.gibbs_constant
    worst = 0.0
    for _ in range(n_events):
        mask = rng.random(size ** (t - 1)) < 0.5
        while not mask.any():
            mask = rng.random(size ** (t - 1)) < 0.5
        ratio = mu_w[mask].sum() / integral[mask].sum()
        worst = max(worst, ratio / n_hat - 1.0, 1.0 / (n_hat * ratio) - 1.0)
    return float(worst)


class FamilyConstants(NamedTuple):
    n_uniform: float
    pressures: list
    max_adjacent_jump: float


def uniform_family_constants(potentials, t_max: int) -> FamilyConstants:
    """Shared Gibbs constant and pressure profile of a potential family.

    N_uniform is the max of the per-member certified constants; the max
    adjacent pressure jump reports the sampled-sense continuity of the
    pressure along the family order.
    """
    potentials = list(potentials)
    if not potentials:
        raise EmptyFamily("the potential family is empty")
    n_uniform = 1.0
    pressures = []
    for phi in potentials:
        model = build_gibbs_model(phi, certify_depth=t_max)
        n_uniform = max(n_uniform, model.gibbs_constant)
        pressures.append(model.pressure)
    jumps = np.abs(np.diff(pressures)) if len(pressures) > 1 else np.array([0.0])
    return FamilyConstants(n_uniform, pressures, float(jumps.max()))
