"""Finite-alphabet measures and path primitives.

Words of length m over an alphabet of size S are encoded as integers in
base S (first symbol is the most significant digit), so every depth-m
table is a flat array of length S**m indexed by word code.  All
probabilities are plain weights; log-space handling is local to the
routines that need it.  Entropies and divergences everywhere in the
library are in nats.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import InsufficientLength, NonErgodic, ShapeMismatch

SIMPLEX_TOL = 1e-12
INVARIANCE_TOL = 1e-10


def format_float(x) -> str:
    """Render a float with 15 significant digits for CSV output."""
    return format(float(x), ".15g")


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite set of symbol labels."""

    symbols: tuple

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if len(symbols) < 1:
            raise ValueError("alphabet must contain at least one symbol")
        if len(set(symbols)) != len(symbols):
            raise ValueError("alphabet symbols must be distinct")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol) -> int:
        return self.symbols.index(str(symbol))


def encode_word(indices, size: int) -> int:
    """Base-``size`` integer code of a symbol-index sequence."""
    code = 0
    for i in indices:
        code = code * size + int(i)
    return code


def decode_word(code: int, length: int, size: int) -> tuple:
    """Inverse of :func:`encode_word`."""
    out = []
    for _ in range(length):
        code, rem = divmod(code, size)
        out.append(rem)
    return tuple(reversed(out))


def format_word(alphabet: Alphabet, indices) -> str:
    """Human-readable label of a word; used as the JSON table key."""
    labels = [alphabet.symbols[i] for i in indices]
    if all(len(s) == 1 for s in alphabet.symbols):
        return "".join(labels)
    return ",".join(labels)


def parse_word(alphabet: Alphabet, text: str) -> tuple:
    """Parse a word label back into symbol indices."""
    if text == "":
        return ()
    if "," in text:
        parts = text.split(",")
    elif all(len(s) == 1 for s in alphabet.symbols):
        parts = list(text)
    else:
        raise ValueError(f"ambiguous word label {text!r}")
    return tuple(alphabet.index(p) for p in parts)


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class BlockMeasure:
    """Probability weights on words of a fixed depth.

    ``weights[code]`` is the mass of the word with that base-S code.
    Depth 0 is the trivial measure on the empty word (a single weight 1);
    it appears as the stationary field of order-0 Markov measures.
    """

    alphabet: Alphabet
    depth: int
    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        object.__setattr__(self, "weights", w)
        if self.depth < 0:
            raise ValueError("depth must be nonnegative")
        expected = self.alphabet.size ** self.depth
        if w.shape != (expected,):
            raise ShapeMismatch(
                f"depth-{self.depth} measure needs {expected} weights, got {w.shape}"
            )
        if w.min() < -SIMPLEX_TOL:
            raise ValueError(f"negative weight {w.min():g}")
        total = w.sum()
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"weights sum to {total!r}, expected 1")


def _lift_kernel_index(size: int, order: int) -> np.ndarray:
    """idx[w, s] = code of the k-block obtained by shifting ``w`` and appending ``s``."""
    n = size**order
    w = np.arange(n)[:, None]
    s = np.arange(size)[None, :]
    return (w * size + s) % n


@dataclass(frozen=True)
class MarkovMeasure:
    """Stationary Markov law of order k on a finite alphabet.

    ``kernel`` has shape (S**k, S): row w is the next-symbol distribution
    given the previous k symbols with code w.  ``stationary`` is the
    stationary k-block marginal.  Order 0 is an i.i.d. law whose single
    kernel row is the symbol distribution.
    """

    alphabet: Alphabet
    order: int
    kernel: np.ndarray
    stationary: BlockMeasure

    def __post_init__(self):
        k = _frozen(self.kernel)
        object.__setattr__(self, "kernel", k)
        size = self.alphabet.size
        n = size**self.order
        if k.shape != (n, size):
            raise ShapeMismatch(f"kernel shape {k.shape}, expected {(n, size)}")
        if k.min() < 0:
            raise ValueError("kernel entries must be nonnegative")
        rowsums = k.sum(axis=1)
        bad = np.argmax(np.abs(rowsums - 1.0))
        if abs(rowsums[bad] - 1.0) > SIMPLEX_TOL:
            raise ValueError(
                f"kernel row {bad} sums to {rowsums[bad]!r}, expected 1"
            )
        if self.stationary.depth != self.order:
            raise ShapeMismatch("stationary marginal depth must equal the order")
        if self.order > 0:
            pi = self.stationary.weights
            idx = _lift_kernel_index(size, self.order)
            pushed = np.zeros(n)
            np.add.at(pushed, idx, pi[:, None] * k)
            residual = np.abs(pushed - pi).sum()
            if residual > INVARIANCE_TOL:
                raise ValueError(
                    f"stationary field not invariant: L1 residual {residual:g}"
                )

    @classmethod
    def from_kernel(cls, alphabet: Alphabet, order: int, kernel) -> "MarkovMeasure":
        """Build a stationary measure from a kernel alone (order 0 allowed)."""
        kernel = np.asarray(kernel, dtype=float)
        if order == 0:
            stationary = BlockMeasure(alphabet, 0, np.array([1.0]))
        else:
            stationary = stationary_distribution(kernel, alphabet, order)
        return cls(alphabet, order, kernel, stationary)

    @classmethod
    def iid(cls, alphabet: Alphabet, probs) -> "MarkovMeasure":
        return cls.from_kernel(alphabet, 0, np.asarray(probs, dtype=float)[None, :])


@dataclass(frozen=True)
class PathSample:
    """A finite symbol trajectory with its generation record."""

    alphabet: Alphabet
    symbols: np.ndarray
    seed: int | None = None
    origin: str = ""

    def __post_init__(self):
        s = np.array(self.symbols, dtype=np.int64)
        s.setflags(write=False)
        object.__setattr__(self, "symbols", s)
        if s.ndim != 1 or s.shape[0] < 1:
            raise InsufficientLength("path must contain at least one symbol")
        if s.min() < 0 or s.max() >= self.alphabet.size:
            raise ValueError("path symbol outside the alphabet")

    def __len__(self) -> int:
        return int(self.symbols.shape[0])


def _communication_failure(kernel: np.ndarray, size: int, order: int) -> str | None:
    """Describe why the k-block chain is not ergodic, or None if it is."""
    from scipy.sparse import csr_matrix

    n = size**order
    idx = _lift_kernel_index(size, order)
    rows = np.repeat(np.arange(n), size)
    cols = idx.ravel()
    mask = kernel.ravel() > 0.0
    adj = csr_matrix(
        (np.ones(mask.sum()), (rows[mask], cols[mask])), shape=(n, n)
    )
    ncomp, labels = connected_components(adj, directed=True, connection="strong")
    if ncomp > 1:
        classes = [np.flatnonzero(labels == c).tolist() for c in range(ncomp)]
        return f"reducible: {ncomp} communicating classes {classes}"
    # period = gcd over all edges of the level defect on a search tree
    level = np.full(n, -1)
    level[0] = 0
    frontier = [0]
    visited = []
    while frontier:
        u = frontier.pop()
        visited.append(u)
        for v in adj.indices[adj.indptr[u] : adj.indptr[u + 1]]:
            if level[v] < 0:
                level[v] = level[u] + 1
                frontier.append(v)
    g = 0
    for u in visited:
        for v in adj.indices[adj.indptr[u] : adj.indptr[u + 1]]:
            g = np.gcd(g, level[u] + 1 - level[v])
    if abs(g) != 1:
        return f"periodic with period {abs(g)}"
    return None


def stationary_distribution(kernel, alphabet: Alphabet, order: int | None = None) -> BlockMeasure:
    """Unique stationary k-block distribution of an order-k kernel.

    Parameters
    ----------
    kernel : array of shape (S**k, S)
        Row-stochastic next-symbol kernel.
    alphabet : Alphabet
    order : int, optional
        Inferred from the kernel shape when omitted.

    Returns
    -------
    BlockMeasure of depth k with fixed-point residual below 1e-12.

    Raises
    ------
    NonErgodic
        If the induced k-block chain is reducible or periodic; the message
        names the offending communication structure.
    """
    kernel = np.asarray(kernel, dtype=float)
    size = alphabet.size
    if order is None:
        order = 0
        while size**order < kernel.shape[0]:
            order += 1
    if order == 0:
        return BlockMeasure(alphabet, 0, np.array([1.0]))
    n = size**order
    failure = _communication_failure(kernel, size, order)
    if failure is not None:
        raise NonErgodic(f"order-{order} block chain is not ergodic: {failure}")
    idx = _lift_kernel_index(size, order)
    pi = np.full(n, 1.0 / n)
    for _ in range(10**6):
        new = np.zeros(n)
        np.add.at(new, idx, pi[:, None] * kernel)
        new /= new.sum()
        if np.abs(new - pi).sum() < 1e-14:
            pi = new
            break
        pi = new
    else:
        raise NonErgodic("power iteration did not converge within 10^6 sweeps")
    pushed = np.zeros(n)
    np.add.at(pushed, idx, pi[:, None] * kernel)
    assert np.abs(pushed - pi).sum() < 1e-12
    return BlockMeasure(alphabet, order, pi)


def block_marginal(model: MarkovMeasure, m: int) -> BlockMeasure:
    """Exact m-block marginal of a stationary Markov measure."""
    if m < 0:
        raise ValueError("depth must be nonnegative")
    size = model.alphabet.size
    k = model.order
    if m == k:
        return model.stationary
    if m < k:
        w = model.stationary.weights.reshape(size**m, size ** (k - m)).sum(axis=1)
        return BlockMeasure(model.alphabet, m, w)
    w = model.stationary.weights
    nk = size**k
    for depth in range(k, m):
        ctx = np.arange(size**depth) % nk
        w = (w[:, None] * model.kernel[ctx]).ravel()
    return BlockMeasure(model.alphabet, m, w)


def _window_codes(symbols: np.ndarray, m: int, size: int) -> np.ndarray:
    powers = size ** np.arange(m - 1, -1, -1)
    windows = np.lib.stride_tricks.sliding_window_view(symbols, m)
    return windows @ powers


def empirical_block_measure(path: PathSample, m: int, periodic: bool = False) -> BlockMeasure:
    """Frequencies of the overlapping m-blocks of a path.

    Non-periodic: the t-m+1 windows of the path itself.  Periodic: the t
    windows of the t-periodic extension, so every cylinder event of depth
    up to t gets well-defined mass from a length-t path.
    """
    t = len(path)
    if m < 1:
        raise ValueError("block depth must be at least 1")
    size = path.alphabet.size
    if periodic:
        extended = np.concatenate([path.symbols, path.symbols[: m - 1]])
        codes = _window_codes(extended, m, size)
    else:
        if t < m:
            raise InsufficientLength(f"path length {t} below block depth {m}")
        codes = _window_codes(path.symbols, m, size)
    counts = np.bincount(codes, minlength=size**m).astype(float)
    return BlockMeasure(path.alphabet, m, counts / counts.sum())


def markov_to_json(model: MarkovMeasure) -> dict:
    """Serialize to ``{alphabet, order, kernel, stationary}``."""
    alpha = model.alphabet
    size = alpha.size
    kernel = {
        format_word(alpha, decode_word(w, model.order, size)): [
            float(p) for p in model.kernel[w]
        ]
        for w in range(size**model.order)
    }
    stationary = {
        format_word(alpha, decode_word(w, model.order, size)): float(p)
        for w, p in enumerate(model.stationary.weights)
    }
    return {
        "alphabet": list(alpha.symbols),
        "order": model.order,
        "kernel": kernel,
        "stationary": stationary,
    }


def markov_from_json(doc: dict) -> MarkovMeasure:
    """Inverse of :func:`markov_to_json`; field order in the document is irrelevant."""
    alpha = Alphabet(tuple(doc["alphabet"]))
    order = int(doc["order"])
    size = alpha.size
    n = size**order
    kernel = np.zeros((n, size))
    for key, row in doc["kernel"].items():
        kernel[encode_word(parse_word(alpha, key), size)] = np.asarray(row, dtype=float)
    pi = np.zeros(n)
    for key, p in doc["stationary"].items():
        pi[encode_word(parse_word(alpha, key), size)] = float(p)
    return MarkovMeasure(alpha, order, kernel, BlockMeasure(alpha, order, pi))
