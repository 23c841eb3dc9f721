"""Relative entropy, entropy rates, and finite-horizon divergence curves.

Closed forms are provided for every process class with an exact rate:
i.i.d. laws, finite-order Markov chains, uniform-product references,
Gibbs models, and (by Monte Carlo) Langevin-type diffusions.  Values are
nats per time step.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import BlockMeasure, MarkovMeasure, block_marginal, format_float
from .errors import InsufficientSamples, RangeViolation, ShapeMismatch


def shannon_entropy(weights) -> float:
    """Shannon entropy in nats with the 0*log(0) = 0 convention."""
    w = np.asarray(weights, dtype=float)
    pos = w[w > 0]
    return float(-(pos * np.log(pos)).sum())


@dataclass(frozen=True)
class EntropyRateResult:
    """A relative entropy rate together with the formula that produced it."""

    value: float
    formula: str
    finite: bool

    def __post_init__(self):
        if not self.finite and self.value != math.inf:
            raise ValueError("non-finite results must carry the +inf marker")


def _result(value: float, formula: str) -> EntropyRateResult:
    return EntropyRateResult(value, formula, finite=math.isfinite(value))


@dataclass(frozen=True)
class DriftPair:
    """Two drift fields sharing one diffusion matrix, plus a sampling law.

    ``drift_a`` and ``drift_b`` map (n, d) point arrays to (n, d) drift
    arrays.  ``sample_source`` maps (n, rng) to n draws from the law the
    divergence is taken under.  ``sigma`` is the diffusion matrix (the
    squared noise coefficient), symmetric positive semidefinite.
    """

    drift_a: object
    drift_b: object
    sigma: np.ndarray
    sample_source: object

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        object.__setattr__(self, "sigma", s)
        if s.shape[0] != s.shape[1]:
            raise ShapeMismatch("diffusion matrix must be square")
        if np.abs(s - s.T).max() > 1e-10:
            raise ValueError("diffusion matrix must be symmetric within 1e-10")


def relative_entropy(p: BlockMeasure, q: BlockMeasure) -> float:
    """K(p || q) = sum p log(p/q); +inf when p charges a q-null word."""
    if p.depth != q.depth or p.alphabet.size != q.alphabet.size:
        raise ShapeMismatch(
            f"depth/alphabet mismatch: ({p.depth}, {p.alphabet.size}) vs "
            f"({q.depth}, {q.alphabet.size})"
        )
    pw, qw = p.weights, q.weights
    support = pw > 0
    if np.any(qw[support] == 0):
        return math.inf
    ps = pw[support]
    return float((ps * (np.log(ps) - np.log(qw[support]))).sum())


def ks_entropy(model: MarkovMeasure) -> float:
    """Entropy rate -sum_w pi(w) sum_s k(w,s) log k(w,s) of a Markov law."""
    pi = model.stationary.weights
    k = model.kernel
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(k > 0, k * np.log(np.where(k > 0, k, 1.0)), 0.0)
    return float(-(pi[:, None] * plogp).sum())


def entropy_rate_iid(mu0: BlockMeasure, eta0: BlockMeasure) -> EntropyRateResult:
    """Rate of an i.i.d. law eta against an i.i.d. model mu: K(eta0 || mu0)."""
    if mu0.depth != 1 or eta0.depth != 1:
        raise ShapeMismatch("i.i.d. rate takes depth-1 marginals")
    return _result(relative_entropy(eta0, mu0), "iid")


def _kernel_divergence(eta: MarkovMeasure, mu: MarkovMeasure) -> float:
    """sum_w eta_pi(w) K(eta_kernel(w,.) || mu_kernel(w,.)) for equal orders."""
    total = 0.0
    for w in range(eta.kernel.shape[0]):
        pw = eta.stationary.weights[w]
        if pw == 0:
            continue
        q, p = eta.kernel[w], mu.kernel[w]
        support = q > 0
        if np.any(p[support] == 0):
            return math.inf
        qs = q[support]
        total += pw * float((qs * (np.log(qs) - np.log(p[support]))).sum())
    return total


def entropy_rate_markov(mu: MarkovMeasure, eta: MarkovMeasure) -> EntropyRateResult:
    """Rate for order-1 chains: K(eta0 (x) q || mu0 (x) p).

    Equals the initial-law divergence plus the stationary average of the
    per-state kernel divergence.
    """
    if mu.order != 1 or eta.order != 1:
        raise ShapeMismatch("markov rate takes order-1 chains")
    if mu.alphabet.size != eta.alphabet.size:
        raise ShapeMismatch("alphabet sizes differ")
    init = relative_entropy(eta.stationary, mu.stationary)
    if not math.isfinite(init):
        return _result(math.inf, "markov")
    step = _kernel_divergence(eta, mu)
    return _result(init + step, "markov")


def entropy_rate_vs_uniform_product(eta: MarkovMeasure, alphabet_size: int) -> EntropyRateResult:
    """log |S| - h(eta): the rate against the uniform product law."""
    if eta.alphabet.size != alphabet_size:
        raise ShapeMismatch("alphabet size does not match the measure")
    return _result(math.log(alphabet_size) - ks_entropy(eta), "uniform-product")


def entropy_rate_gibbs(eta: MarkovMeasure, model) -> EntropyRateResult:
    """P - int phi d(eta) - h(eta) against a Gibbs model.

    ``model`` carries a finite-range potential and its pressure.  The
    potential expectation uses the exact block marginal of eta at the
    potential's range.
    """
    potential = model.potential
    marg = block_marginal(eta, potential.range)
    phi_mean = float(marg.weights @ potential.table)
    value = model.pressure - phi_mean - ks_entropy(eta)
    return _result(value, "gibbs")


def entropy_rate_diffusion_mc(pair: DriftPair, n_samples: int, seed: int) -> tuple:
    """Monte Carlo rate (1/2) E[(a-b)^T Sigma^+ (a-b)] for two diffusions.

    Returns (estimate, std_error).  Sigma^+ is the spectral pseudo-inverse
    with eigenvalue cutoff 1e-10 times the largest eigenvalue.  Raises
    RangeViolation when a sampled drift difference leaves the range of the
    diffusion, in which case the rate is +inf rather than the quadratic
    form.
    """
    if n_samples < 2:
        raise InsufficientSamples(f"need at least 2 samples, got {n_samples}")
    from .simulate import rng_from_seed

    rng = rng_from_seed(seed)
    x = np.atleast_2d(np.asarray(pair.sample_source(n_samples, rng), dtype=float))
    if x.shape[0] != n_samples:
        x = x.T
    diff = np.atleast_2d(np.asarray(pair.drift_a(x), dtype=float)) - np.atleast_2d(
        np.asarray(pair.drift_b(x), dtype=float)
    )
    if diff.shape[0] != n_samples:
        diff = diff.T
    evals, evecs = np.linalg.eigh(pair.sigma)
    cutoff = 1e-10 * max(evals.max(), 0.0)
    keep = evals > cutoff
    if not np.all(keep):
        # range check through the orthogonal projector onto kept modes
        proj = evecs[:, keep] @ evecs[:, keep].T
        residual = diff - diff @ proj.T
        worst = np.abs(residual).max() if residual.size else 0.0
        if worst > 1e-8:
            idx = int(np.abs(residual).max(axis=1).argmax())
            raise RangeViolation(
                f"drift difference leaves range(sigma) at sample {idx} "
                f"(residual {worst:.3e}); the rate is +inf"
            )
    inv = np.zeros_like(evals)
    inv[keep] = 1.0 / evals[keep]
    half = diff @ evecs
    quad = 0.5 * ((half**2) * inv).sum(axis=1)
    estimate = float(quad.mean())
    std_error = float(quad.std(ddof=1) / math.sqrt(n_samples))
    return estimate, std_error


def _lifted_kernel(model: MarkovMeasure, order: int) -> np.ndarray:
    """Kernel reindexed by order-``order`` contexts (order >= model.order)."""
    size = model.alphabet.size
    ctx = np.arange(size**order) % (size**model.order)
    return model.kernel[ctx]


def finite_horizon_entropy_curve(lam: MarkovMeasure, mu: MarkovMeasure, t_values) -> list:
    """K_t and K_t/t for K_t = K(lam restricted to t blocks || mu restricted).

    Uses the exact Markov telescoping K_t = K_kbar + (t - kbar) * step,
    where kbar is the larger order and step is the stationary per-step
    conditional divergence, so t can be large without materializing
    exponential tables.  Returns rows (t, K_t, K_t/t); +inf propagates.
    """
    if lam.alphabet.size != mu.alphabet.size:
        raise ShapeMismatch("alphabet sizes differ")
    t_values = [int(t) for t in t_values]
    if any(t < 1 for t in t_values):
        raise ValueError("horizons must be positive")
    kbar = max(lam.order, mu.order)
    if kbar == 0:
        step = relative_entropy(block_marginal(lam, 1), block_marginal(mu, 1))
        init, base = 0.0, 0
    else:
        init = relative_entropy(block_marginal(lam, kbar), block_marginal(mu, kbar))
        base = kbar
        lam_l = MarkovMeasure(
            lam.alphabet, kbar, _lifted_kernel(lam, kbar), block_marginal(lam, kbar)
        )
        mu_l = MarkovMeasure(
            mu.alphabet, kbar, _lifted_kernel(mu, kbar), block_marginal(mu, kbar)
        )
        step = _kernel_divergence(lam_l, mu_l)
    rows = []
    for t in t_values:
        if t <= base:
            kt = relative_entropy(block_marginal(lam, t), block_marginal(mu, t))
        else:
            kt = math.inf if not (math.isfinite(init) and math.isfinite(step)) else init + (t - base) * step
        rows.append((t, kt, kt / t))
    return rows


def write_entropy_curve_csv(path, rows) -> None:
    """CSV with columns t, K_t, K_t_over_t at 15 significant digits."""
    lines = ["t,K_t,K_t_over_t"]
    for t, kt, rate in rows:
        lines.append(f"{t},{format_float(kt)},{format_float(rate)}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
