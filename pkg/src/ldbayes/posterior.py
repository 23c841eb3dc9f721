"""Loss-based posteriors over a parameter grid.

The partition function Z_t(y) = sum_w mu([w]) exp(-L^t(w, y)) is computed
exactly by a forward recursion over symbol windows of width
W = max(model order, loss range - 1) in log space; the same sweep yields
every requested horizon at once.  All posterior arithmetic stays in
natural-log space with max-shift normalization.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .core import (
    Alphabet,
    BlockMeasure,
    MarkovMeasure,
    PathSample,
    block_marginal,
    format_float,
)
from .errors import (
    EmptyNeighborhood,
    InsufficientLength,
    InsufficientSamples,
    ShapeMismatch,
    TooLarge,
)

DP_STATE_GUARD = 10**6


@dataclass(frozen=True)
class LossSpec:
    """A bounded loss on paired symbol windows of a fixed range.

    ``table[x_code, y_code]`` is the loss of the (model window,
    observation window) pair; ``bound`` is max |table|.  ``modulus`` is a
    nondecreasing function with modulus(0) = 0 used by the continuity
    probe; None means no continuity certificate is claimed.
    """

    s_alphabet: Alphabet
    a_alphabet: Alphabet
    range: int
    table: np.ndarray
    modulus: object = None

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)
        if self.range < 1:
            raise ValueError("loss range must be positive")
        shape = (self.s_alphabet.size**self.range, self.a_alphabet.size**self.range)
        if t.shape != shape:
            raise ShapeMismatch(f"loss table shape {t.shape}, expected {shape}")
        if not np.all(np.isfinite(t)):
            raise ValueError("loss entries must be finite")
        if self.modulus is not None and abs(float(self.modulus(0.0))) > 0:
            raise ValueError("the modulus must vanish at 0")

    @property
    def bound(self) -> float:
        return float(np.abs(self.table).max())

    def shifted(self, c: float) -> "LossSpec":
        return LossSpec(self.s_alphabet, self.a_alphabet, self.range, self.table + c, self.modulus)


@dataclass(frozen=True)
class ThetaGrid:
    """Finite ordered parameter grid with a metric and a full-support prior."""

    points: np.ndarray
    prior: np.ndarray
    metric: object = None

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.points, dtype=float))
        pts.setflags(write=False)
        pr = np.array(self.prior, dtype=float)
        pr.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "prior", pr)
        if self.metric is None:
            object.__setattr__(self, "metric", lambda a, b: abs(a - b))
        if pr.shape != pts.shape:
            raise ShapeMismatch("prior and points must align")
        if abs(pr.sum() - 1.0) > 1e-12:
            raise ValueError(f"prior sums to {pr.sum()!r}, expected 1")
        if pr.min() <= 0:
            raise ValueError("the prior must charge every grid point")

    @classmethod
    def uniform(cls, points, metric=None) -> "ThetaGrid":
        points = np.atleast_1d(np.asarray(points, dtype=float))
        n = points.shape[0]
        return cls(points, np.full(n, 1.0 / n), metric)

    def __len__(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True)
class PosteriorResult:
    """Per-theta normalized log partition values and posterior weights."""

    t: int
    log_partition_per_theta: np.ndarray
    weights: np.ndarray
    log_z_pi: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if abs(w.sum() - 1.0) > 1e-10:
            raise ValueError(f"posterior weights sum to {w.sum()!r}")


def _window_codes(symbols: np.ndarray, m: int, size: int) -> np.ndarray:
    powers = size ** np.arange(m - 1, -1, -1)
    return np.lib.stride_tricks.sliding_window_view(symbols, m) @ powers


def integrated_loss(loss: LossSpec, x: PathSample, y: PathSample, t: int) -> float:
    """Sum of the t window losses along the pair of paths."""
    r = loss.range
    if len(x) < t + r - 1 or len(y) < t + r - 1:
        raise InsufficientLength(
            f"need paths of length {t + r - 1}, got {len(x)} and {len(y)}"
        )
    xc = _window_codes(x.symbols[: t + r - 1], r, loss.s_alphabet.size)
    yc = _window_codes(y.symbols[: t + r - 1], r, loss.a_alphabet.size)
    return float(loss.table[xc, yc].sum())


def _model_of(family_member) -> MarkovMeasure:
    if isinstance(family_member, MarkovMeasure):
        return family_member
    return family_member.markov


def log_partition_curve(model, loss: LossSpec, y: PathSample, t_values) -> np.ndarray:
    """(1/t) log Z_t(y) for every horizon in one forward sweep.

    Horizons must be increasing.  The model may be a MarkovMeasure or a
    Gibbs model (its Markov representation is used).
    """
    model = _model_of(model)
    r = loss.range
    size = model.alphabet.size
    t_values = [int(t) for t in t_values]
    if any(b <= a for a, b in zip(t_values, t_values[1:])):
        raise ValueError("horizons must be strictly increasing")
    if t_values[0] < 1:
        raise ValueError("horizons must be positive")
    t_max = t_values[-1]
    if len(y) < t_max + r - 1:
        raise InsufficientLength(
            f"observation length {len(y)} below horizon demand {t_max + r - 1}"
        )
    width = max(model.order, r - 1)
    if size**width > DP_STATE_GUARD:
        raise TooLarge(f"{size}**{width} recursion states exceed {DP_STATE_GUARD}")
    ycodes = _window_codes(y.symbols, r, loss.a_alphabet.size)

    if width == 0:
        # i.i.d. model with range-1 loss: per-coordinate factorization
        with np.errstate(divide="ignore"):
            col = np.log(model.kernel[0])[:, None] - loss.table[:, ycodes[:t_max]]
        perstep = np.logaddexp.reduce(col, axis=0)
        cum = np.cumsum(perstep)
        return np.array([cum[t - 1] / t for t in t_values])

    out = np.empty(len(t_values))
    rec, direct = [], []
    for i, t in enumerate(t_values):
        # step j appends the symbol at absolute position width + j; horizon
        # t is complete once position t + r - 2 has been processed
        j = t + r - 2 - width
        (rec if j >= 0 else direct).append((i, t, j))
    if rec:
        n = size**width
        with np.errstate(divide="ignore"):
            log_marg = np.log(block_marginal(model, width).weights)
            log_kernel = np.log(model.kernel)
        alpha0 = log_marg.copy()
        codes = np.arange(n, dtype=np.int64)
        for s in range(0, width - r + 1):
            win = (codes // size ** (width - s - r)) % size**r
            alpha0 -= loss.table[win, ycodes[s]]
        klift = np.ascontiguousarray(log_kernel[codes % size**model.order])
        xcode = np.ascontiguousarray(
            ((codes % size ** (r - 1))[:, None] * size + np.arange(size)[None, :]).astype(np.int64)
        )
        steps = np.ascontiguousarray([j for _, _, j in rec], dtype=np.int64)
        ystep = np.ascontiguousarray(
            ycodes[width - r + 1 : width - r + 2 + steps[-1]], dtype=np.int64
        )
        vals = _backend.kernels().dp_log_partition(
            np.ascontiguousarray(alpha0),
            klift,
            xcode,
            np.ascontiguousarray(loss.table),
            ystep,
            size,
            n // size,
            steps,
        )
        for (i, t, _), v in zip(rec, vals):
            out[i] = v / t
    for i, t, _ in direct:
        # horizon shorter than the recursion width: enumerate directly
        length = t + r - 1
        marg = block_marginal(model, length)
        codes_d = np.arange(size**length, dtype=np.int64)
        total = np.zeros(size**length)
        for s in range(t):
            win = (codes_d // size ** (length - s - r)) % size**r
            total -= loss.table[win, ycodes[s]]
        with np.errstate(divide="ignore"):
            logw = np.log(marg.weights) + total
        out[i] = np.logaddexp.reduce(logw) / t
    return out


def log_partition_dp(model, loss: LossSpec, y: PathSample, t: int) -> float:
    """(1/t) log of the exact partition function at one horizon."""
    return float(log_partition_curve(model, loss, y, [t])[0])


def log_partition_mc(model, loss: LossSpec, y: PathSample, t: int, n_samples: int, seed: int):
    """Monte Carlo (1/t) log Z_t with a delta-method standard error.

    Averages exp(-L^t) over stationary model samples; the estimator is
    unbiased for Z_t itself, and the reported error is the first-order
    error of its log divided by t.
    """
    from .simulate import rng_from_seed, sample_markov

    if n_samples < 2:
        raise InsufficientSamples(f"need at least 2 samples, got {n_samples}")
    model = _model_of(model)
    r = loss.range
    base = rng_from_seed(seed)
    seeds = base.integers(0, 2**63 - 1, size=n_samples)
    vals = np.empty(n_samples)
    for i in range(n_samples):
        x = sample_markov(model, t + r - 1, int(seeds[i]))
        vals[i] = -integrated_loss(loss, x, y, t)
    shift = vals.max()
    scaled = np.exp(vals - shift)
    mean = scaled.mean()
    estimate = (shift + math.log(mean)) / t
    std_error = float(scaled.std(ddof=1) / (mean * math.sqrt(n_samples) * t))
    return float(estimate), std_error


def _losses_of(loss_family, n: int) -> list:
    if isinstance(loss_family, LossSpec):
        return [loss_family] * n
    loss_family = list(loss_family)
    if len(loss_family) != n:
        raise ShapeMismatch("loss family does not align with the grid")
    return loss_family


def posterior_over_grid(family, grid: ThetaGrid, loss_family, y: PathSample, t: int) -> PosteriorResult:
    """Posterior weights pi_0(theta) exp(t l(theta)) / Z over the grid.

    l(theta) is the normalized log partition value of theta's model and
    loss; the normalization applies a max shift before exponentiating.
    """
    family = list(family)
    if len(family) != len(grid):
        raise ShapeMismatch("model family does not align with the grid")
    losses = _losses_of(loss_family, len(grid))
    ell = np.array(
        [log_partition_dp(mdl, ls, y, t) for mdl, ls in zip(family, losses)]
    )
    return _posterior_from_ell(grid, ell, t)


def _posterior_from_ell(grid: ThetaGrid, ell: np.ndarray, t: int) -> PosteriorResult:
    score = np.log(grid.prior) + t * ell
    shift = score.max()
    w = np.exp(score - shift)
    total = w.sum()
    return PosteriorResult(t, ell, w / total, float(shift + math.log(total)))


def consistency_curve(family, grid: ThetaGrid, loss_family, y: PathSample, t_values, subset) -> list:
    """Posterior mass outside a grid subset, per horizon.

    ``subset`` is a boolean mask or an index list naming the neighborhood
    U; returns rows (t, mass outside U).  All horizons reuse one forward
    sweep per grid point.
    """
    family = list(family)
    losses = _losses_of(loss_family, len(grid))
    subset_arr = np.asarray(subset)
    if subset_arr.dtype == bool:
        if subset_arr.shape != (len(grid),):
            raise ShapeMismatch("subset mask does not match the grid")
        mask = subset_arr.copy()
    else:
        mask = np.zeros(len(grid), dtype=bool)
        if subset_arr.size:
            mask[subset_arr.astype(int)] = True
    if not mask.any():
        raise EmptyNeighborhood("the neighborhood contains no grid point")
    t_values = [int(t) for t in t_values]
    curves = np.stack(
        [log_partition_curve(mdl, ls, y, t_values) for mdl, ls in zip(family, losses)]
    )
    rows = []
    for i, t in enumerate(t_values):
        res = _posterior_from_ell(grid, curves[:, i], t)
        rows.append((t, float(res.weights[~mask].sum())))
    return rows


def theta_neighborhood(grid: ThetaGrid, centers, radius: float) -> np.ndarray:
    """Boolean mask of grid points within ``radius`` of any center."""
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    mask = np.array(
        [any(grid.metric(p, c) <= radius for c in centers) for p in grid.points]
    )
    if not mask.any():
        raise EmptyNeighborhood(f"no grid point within {radius} of {centers}")
    return mask


def check_loss_assumption(loss_family, grid: ThetaGrid, n_probes: int, seed: int) -> float:
    """Continuity probe: worst excess of |L - L'| over the moduli.

    Draws random (theta, theta', x-window, x'-window, y-window) tuples and
    returns max |L_theta(x,y) - L_theta'(x',y)| - w(d(theta, theta'))
    - w(d(x, x')); a nonpositive value means the continuity bound held on
    every probe.  The path metric is 2^(-first disagreement index).
    """
    from .simulate import rng_from_seed

    losses = _losses_of(loss_family, len(grid))
    if losses[0].modulus is None:
        raise ValueError("the loss family carries no modulus")
    rng = rng_from_seed(seed)
    r = losses[0].range
    n_x = losses[0].s_alphabet.size**r
    n_y = losses[0].a_alphabet.size**r
    size = losses[0].s_alphabet.size
    worst = -math.inf
    for _ in range(n_probes):
        i, j = rng.integers(0, len(grid), size=2)
        xc, xc2 = rng.integers(0, n_x, size=2)
        yc = rng.integers(0, n_y)
        delta = abs(losses[i].table[xc, yc] - losses[j].table[xc2, yc])
        d_theta = grid.metric(grid.points[i], grid.points[j])
        if xc == xc2:
            d_x = 0.0
        else:
            pos = 0
            a, b = int(xc), int(xc2)
            digits_a = [(a // size**p) % size for p in range(r - 1, -1, -1)]
            digits_b = [(b // size**p) % size for p in range(r - 1, -1, -1)]
            while digits_a[pos] == digits_b[pos]:
                pos += 1
            d_x = 2.0**-pos
        omega = losses[i].modulus
        worst = max(worst, float(delta - omega(d_theta) - omega(d_x)))
    return worst


def write_posterior_csv(path, grid: ThetaGrid, result: PosteriorResult) -> None:
    """CSV with columns theta, log_partition, posterior_weight."""
    lines = ["theta,log_partition,posterior_weight"]
    for p, ell, w in zip(grid.points, result.log_partition_per_theta, result.weights):
        lines.append(f"{format_float(p)},{format_float(ell)},{format_float(w)}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
