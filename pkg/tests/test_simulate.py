import math

import numpy as np
import pytest

from ldbayes import _backend
from ldbayes.core import Alphabet, MarkovMeasure, block_marginal, empirical_block_measure
from ldbayes.errors import Diverged, InsufficientLength, InvalidParameter
from ldbayes.gibbs import FiniteRangePotential, build_gibbs_model
from ldbayes.simulate import (
    LangevinSpec,
    ObservedSystemSpec,
    generate_observation,
    rng_from_seed,
    sample_gibbs,
    sample_langevin,
    sample_markov,
    write_langevin_csv,
    write_path_text,
)

AB = Alphabet(("0", "1"))
STICKY = MarkovMeasure.from_kernel(AB, 1, np.array([[0.9, 0.1], [0.1, 0.9]]))


def test_rng_streams_are_keyed():
    a = rng_from_seed(5).random(4)
    b = rng_from_seed(5).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, rng_from_seed(6).random(4))
    assert not np.array_equal(a, rng_from_seed(5, 0).random(4))
    assert not np.array_equal(rng_from_seed(5, 0).random(4), rng_from_seed(5, 1).random(4))


def test_sample_markov_reproducible():
    one = sample_markov(STICKY, 500, seed=9)
    two = sample_markov(STICKY, 500, seed=9)
    assert np.array_equal(one.symbols, two.symbols)
    assert one.seed == 9 and one.origin == "markov"
    assert len(one.symbols) == 500
    assert not np.array_equal(one.symbols, sample_markov(STICKY, 500, seed=10).symbols)
    with pytest.raises(InsufficientLength):
        sample_markov(STICKY, 0, seed=0)


def test_sample_markov_backends_agree():
    try:
        _backend.use("python")
        plain = sample_markov(STICKY, 2000, seed=3).symbols
        _backend.use("compiled")
        fast = sample_markov(STICKY, 2000, seed=3).symbols
    finally:
        _backend.use("auto")
    assert np.array_equal(plain, fast)


def test_sample_gibbs_wraps_markov_representation():
    model = build_gibbs_model(
        FiniteRangePotential(AB, 2, 0.8 * np.array([1.0, 0.0, 0.0, 1.0]))
    )
    g = sample_gibbs(model, 300, seed=4)
    assert g.origin == "gibbs"
    assert np.array_equal(g.symbols, sample_markov(model.markov, 300, seed=4).symbols)


def test_birkhoff_averages_near_stationary_mean():
    # 2-block observable, 5 seeds, gap below 5 sup|f| / sqrt(t)
    t = 100000
    f = np.array([1.0, 0.0, 0.0, 1.0])
    want = float(block_marginal(STICKY, 2).weights @ f)
    bound = 5.0 / math.sqrt(t)
    for seed in range(5):
        path = sample_markov(STICKY, t, seed=seed)
        emp = empirical_block_measure(path, 2, periodic=True)
        assert abs(float(emp.weights @ f) - want) <= bound


def test_observation_identity_channel_matches_source():
    spec_none = ObservedSystemSpec(STICKY)
    spec_eye = ObservedSystemSpec(STICKY, AB, np.eye(2))
    raw = generate_observation(spec_none, 400, seed=12)
    eye = generate_observation(spec_eye, 400, seed=12)
    assert np.array_equal(raw.symbols, eye.symbols)
    assert raw.origin == "observation"
    flip = ObservedSystemSpec(STICKY, AB, np.array([[0.0, 1.0], [1.0, 0.0]]))
    flipped = generate_observation(flip, 400, seed=12)
    assert np.array_equal(flipped.symbols, 1 - raw.symbols)


def test_observation_gibbs_source_and_noise_level():
    model = build_gibbs_model(FiniteRangePotential(AB, 1, np.zeros(2)))
    noisy = ObservedSystemSpec(model, AB, np.array([[0.8, 0.2], [0.2, 0.8]]))
    t = 100000
    obs = generate_observation(noisy, t, seed=2)
    clean = generate_observation(ObservedSystemSpec(model), t, seed=2)
    flips = float(np.mean(obs.symbols != clean.symbols))
    assert abs(flips - 0.2) <= 5.0 / math.sqrt(t)
    with pytest.raises(InsufficientLength):
        generate_observation(noisy, 0, seed=0)


def test_channel_validation():
    with pytest.raises(ValueError):
        ObservedSystemSpec(STICKY, AB, np.array([[0.7, 0.2], [0.5, 0.5]]))
    with pytest.raises(ValueError):
        ObservedSystemSpec(STICKY, AB, np.array([[1.2, -0.2], [0.5, 0.5]]))


def test_langevin_spec_validation():
    grad = lambda x: x
    with pytest.raises(InvalidParameter):
        LangevinSpec(grad, 0.0, np.zeros(1))
    with pytest.raises(InvalidParameter):
        LangevinSpec(grad, 1e-3, np.zeros(1), sigma_scale=1.0)
    with pytest.raises(InvalidParameter):
        LangevinSpec(lambda x: x * math.inf, 1e-3, np.ones(1))


def test_langevin_euler_scheme_is_exact():
    # reconstruct the path from the documented recurrence and noise stream
    dt = 1e-3
    spec = LangevinSpec(lambda x: 2.0 * x, dt, np.array([1.0, -1.0]))
    t_steps = 500
    path = sample_langevin(spec, t_steps, seed=7)
    assert path.shape == (t_steps + 1, 2)
    noise = rng_from_seed(7).standard_normal((t_steps, 2)) * math.sqrt(2.0 * dt)
    x = np.array([1.0, -1.0])
    for n in range(t_steps):
        x = x - 2.0 * x * dt + noise[n]
        assert np.array_equal(path[n + 1], x)
    assert np.array_equal(path[0], spec.x0)


@pytest.mark.filterwarnings("ignore:overflow")
def test_langevin_divergence_reports_step():
    spec = LangevinSpec(lambda x: -1e155 * x, 1e-3, np.ones(1))
    with pytest.raises(Diverged) as err:
        sample_langevin(spec, 100, seed=0)
    assert 1 <= err.value.step <= 100
    with pytest.raises(InsufficientLength):
        sample_langevin(spec, 0, seed=0)


def test_path_text_writer(tmp_path):
    sample = sample_markov(STICKY, 6, seed=1)
    out = tmp_path / "path.txt"
    write_path_text(out, sample)
    lines = out.read_text().splitlines()
    assert lines == [AB.symbols[s] for s in sample.symbols]


def test_langevin_csv_writer(tmp_path):
    traj = np.array([[0.0, 1.0], [0.5, -0.25]])
    out = tmp_path / "traj.csv"
    write_langevin_csv(out, traj)
    lines = out.read_text().splitlines()
    assert lines[0] == "step,x_1,x_2"
    assert lines[1] == "0,0,1"
    assert lines[2] == "1,0.5,-0.25"
