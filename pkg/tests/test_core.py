import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldbayes.core import (
    Alphabet,
    BlockMeasure,
    MarkovMeasure,
    PathSample,
    block_marginal,
    decode_word,
    empirical_block_measure,
    encode_word,
    format_word,
    markov_from_json,
    markov_to_json,
    parse_word,
    stationary_distribution,
)
from ldbayes.errors import InsufficientLength, NonErgodic, ShapeMismatch


def random_chain(alphabet, order, seed):
    rng = np.random.default_rng(seed)
    kernel = rng.dirichlet(np.full(alphabet.size, 2.0), size=alphabet.size**order)
    return MarkovMeasure.from_kernel(alphabet, order, kernel)


def test_alphabet_basics():
    ab = Alphabet(("a", "b", "c"))
    assert ab.size == 3
    assert ab.index("b") == 1
    with pytest.raises(ValueError):
        Alphabet(("a", "a"))
    with pytest.raises(ValueError):
        Alphabet(())


@given(
    size=st.integers(2, 4),
    word=st.lists(st.integers(0, 3), min_size=0, max_size=6),
)
def test_encode_decode_roundtrip(size, word):
    word = [w % size for w in word]
    code = encode_word(word, size)
    assert decode_word(code, len(word), size) == tuple(word)


def test_word_labels():
    ab = Alphabet(("0", "1"))
    assert format_word(ab, (0, 1, 1)) == "011"
    assert parse_word(ab, "011") == (0, 1, 1)
    assert parse_word(ab, "") == ()
    multi = Alphabet(("lo", "hi"))
    assert format_word(multi, (1, 0)) == "hi,lo"
    assert parse_word(multi, "hi,lo") == (1, 0)
    with pytest.raises(ValueError):
        parse_word(multi, "hilo")


def test_block_measure_validation():
    ab = Alphabet(("0", "1"))
    with pytest.raises(ShapeMismatch):
        BlockMeasure(ab, 2, np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        BlockMeasure(ab, 1, np.array([0.7, 0.2]))
    with pytest.raises(ValueError):
        BlockMeasure(ab, 1, np.array([1.5, -0.5]))
    trivial = BlockMeasure(ab, 0, np.array([1.0]))
    assert trivial.weights.shape == (1,)


def test_stationary_distribution_matches_dense_eigenvector():
    ab = Alphabet(("0", "1", "2"))
    rng = np.random.default_rng(0)
    kernel = rng.dirichlet((1.5, 1.5, 1.5), size=3)
    pi = stationary_distribution(kernel, ab, 1).weights
    vals, vecs = np.linalg.eig(kernel.T)
    lead = np.real(vecs[:, np.argmax(np.real(vals))])
    lead = lead / lead.sum()
    assert np.abs(pi - lead).max() < 1e-12


def test_stationary_distribution_rejects_bad_chains():
    ab = Alphabet(("0", "1"))
    with pytest.raises(NonErgodic, match="reducible"):
        stationary_distribution(np.array([[1.0, 0.0], [0.0, 1.0]]), ab, 1)
    with pytest.raises(NonErgodic, match="periodic"):
        stationary_distribution(np.array([[0.0, 1.0], [1.0, 0.0]]), ab, 1)


@pytest.mark.parametrize("order", [0, 1, 2])
def test_block_marginal_shift_consistency(order):
    # dropping the first or the last symbol of the (m+1)-marginal must both
    # reproduce the m-marginal
    ab = Alphabet(("0", "1"))
    model = random_chain(ab, order, seed=order + 10)
    for m in range(max(order, 1), order + 4):
        up = block_marginal(model, m + 1).weights
        down = block_marginal(model, m).weights
        drop_last = up.reshape(-1, ab.size).sum(axis=1)
        drop_first = up.reshape(ab.size, -1).sum(axis=0)
        assert np.abs(drop_last - down).max() < 1e-10
        assert np.abs(drop_first - down).max() < 1e-10


def test_block_marginal_order1_product_formula():
    ab = Alphabet(("0", "1"))
    model = random_chain(ab, 1, seed=3)
    pi, k = model.stationary.weights, model.kernel
    want = np.array(
        [
            pi[a] * k[a, b] * k[b, c]
            for a in range(2)
            for b in range(2)
            for c in range(2)
        ]
    )
    assert np.abs(block_marginal(model, 3).weights - want).max() < 1e-14


def test_block_marginal_below_order():
    ab = Alphabet(("0", "1"))
    model = random_chain(ab, 2, seed=5)
    one = block_marginal(model, 1).weights
    direct = model.stationary.weights.reshape(2, 2).sum(axis=1)
    assert np.abs(one - direct).max() < 1e-14
    assert block_marginal(model, 0).weights.tolist() == [1.0]


def test_empirical_block_measure_hand_counts():
    ab = Alphabet(("0", "1"))
    path = PathSample(ab, np.array([0, 1, 1, 0]))
    plain = empirical_block_measure(path, 2).weights
    assert plain.tolist() == [0.0, 1 / 3, 1 / 3, 1 / 3]
    periodic = empirical_block_measure(path, 2, periodic=True).weights
    # wrap adds the closing 00 window
    assert periodic.tolist() == [0.25, 0.25, 0.25, 0.25]
    with pytest.raises(InsufficientLength):
        empirical_block_measure(path, 9)


def test_periodic_empirical_is_exactly_shift_invariant():
    ab = Alphabet(("0", "1"))
    rng = np.random.default_rng(1)
    path = PathSample(ab, rng.integers(0, 2, size=157))
    w = empirical_block_measure(path, 3, periodic=True).weights
    drop_first = w.reshape(2, -1).sum(axis=0)
    drop_last = w.reshape(-1, 2).sum(axis=1)
    # both are counts of the same cyclic 2-windows, so equality is exact
    assert np.array_equal(drop_first, drop_last)


def test_periodic_vs_plain_window_function_gap():
    """The two empirical functionals differ by at most 2(m-1)max|f|/t."""
    rng = np.random.default_rng(7)
    ab = Alphabet(("0", "1"))
    for trial in range(20):
        t = int(rng.integers(20, 400))
        m = int(rng.integers(2, 5))
        path = PathSample(ab, rng.integers(0, 2, size=t))
        f = rng.uniform(-3.0, 3.0, size=2**m)
        plain = empirical_block_measure(path, m).weights
        periodic = empirical_block_measure(path, m, periodic=True).weights
        gap = abs(float(plain @ f) - float(periodic @ f))
        assert gap <= 2.0 * (m - 1) * np.abs(f).max() / t + 1e-12


def test_empirical_tv_decreases_with_horizon():
    from ldbayes.simulate import sample_markov

    ab = Alphabet(("0", "1"))
    model = random_chain(ab, 1, seed=2)
    exact = block_marginal(model, 2).weights
    for seed in range(5):
        tvs = []
        for t in (10**3, 10**5):
            emp = empirical_block_measure(sample_markov(model, t, seed), 2).weights
            tvs.append(0.5 * np.abs(emp - exact).sum())
        assert tvs[1] < tvs[0]


@pytest.mark.parametrize("order", [0, 1, 2])
def test_markov_json_roundtrip_is_exact(order):
    ab = Alphabet(("0", "1"))
    model = random_chain(ab, order, seed=order)
    doc = json.loads(json.dumps(markov_to_json(model)))
    back = markov_from_json(doc)
    assert back.order == order
    assert np.array_equal(back.kernel, model.kernel)
    assert np.array_equal(back.stationary.weights, model.stationary.weights)


def test_markov_json_field_order_irrelevant():
    ab = Alphabet(("0", "1"))
    model = random_chain(ab, 1, seed=9)
    doc = markov_to_json(model)
    shuffled = {k: doc[k] for k in ("stationary", "kernel", "order", "alphabet")}
    back = markov_from_json(shuffled)
    assert np.array_equal(back.kernel, model.kernel)


def test_markov_measure_validation():
    ab = Alphabet(("0", "1"))
    good = random_chain(ab, 1, seed=4)
    with pytest.raises(ShapeMismatch):
        MarkovMeasure(ab, 1, good.kernel[:, :1], good.stationary)
    with pytest.raises(ValueError):
        MarkovMeasure(ab, 1, np.array([[0.7, 0.2], [0.5, 0.5]]), good.stationary)
    # a valid kernel paired with a non-invariant marginal
    with pytest.raises(ValueError, match="invariant"):
        MarkovMeasure(ab, 1, good.kernel, BlockMeasure(ab, 1, np.array([0.9, 0.1])))


def test_path_sample_validation():
    ab = Alphabet(("0", "1"))
    with pytest.raises(ValueError):
        PathSample(ab, np.array([0, 2]))
    with pytest.raises(InsufficientLength):
        PathSample(ab, np.array([], dtype=np.int64))
    p = PathSample(ab, [0, 1, 0], seed=5, origin="test")
    assert len(p) == 3 and p.seed == 5


@settings(max_examples=30, deadline=None)
@given(order=st.integers(0, 2), m_extra=st.integers(1, 3), seed=st.integers(0, 50))
def test_block_marginal_chain_consistency_property(order, m_extra, seed):
    ab = Alphabet(("0", "1"))
    model = random_chain(ab, order, seed)
    m = max(order, 1) + m_extra
    w = block_marginal(model, m).weights
    assert abs(w.sum() - 1.0) < 1e-12
    assert np.abs(w.reshape(-1, 2).sum(axis=1) - block_marginal(model, m - 1).weights).max() < 1e-10
