import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from wncsim.detect import (
    DetectorInput,
    PosteriorMarginals,
    joint_map_detect,
    map_detect,
    message_scores,
    naive_detect,
)
from wncsim.errors import ComplexityError, DimensionError, WncError
from wncsim.gf2 import Gf2Matrix
from wncsim.network import modulate, validate

from conftest import NET1_G
from oracles import map_oracle, random_rounds, relative_marginal_error


def detect_one(code, y, h, n0, p_e):
    return map_detect(DetectorInput(y, h, n0, code, p_e))


class TestMapExamples:
    def test_noiseless_direct_slot(self):
        code = validate(Gf2Matrix.identity(1), (1,))
        h = np.array([0.8 - 0.3j])
        post = detect_one(code, h, h, 1e-6, [0.0])
        assert post.p1[0, 0] < 1e-100
        assert post.hard[0, 0] == 0

    def test_zero_reliability_drops_error_sum(self, net1_code, rng):
        _, y, h, n0, rnd = random_rounds(rng, net1_code, 200, 5.0)
        a = map_detect(DetectorInput(y, h, n0, net1_code, np.zeros_like(rnd.p_e)))
        b = naive_detect(DetectorInput(y, h, n0, net1_code, rnd.p_e))
        assert np.array_equal(a.llr, b.llr)

    @pytest.mark.parametrize("snr", [0.0, 10.0, 20.0])
    def test_net1_matches_oracle(self, net1_code, snr):
        rng = np.random.default_rng(int(snr))
        _, y, h, n0, rnd = random_rounds(rng, net1_code, 40, snr)
        post = detect_one(net1_code, y, h, n0, rnd.p_e)
        for b in range(40):
            ref = map_oracle(NET1_G, y[b], h[b], n0, rnd.p_e[b])
            assert relative_marginal_error(post.log_p0[b], post.log_p1[b], ref) < 1e-12


def _random_code(rng, k, n_extra):
    """Identity slots followed by random combined slots (always realizable)."""
    extra = rng.integers(0, 2, (k, n_extra), dtype=np.uint8)
    G = Gf2Matrix.from_array(np.concatenate([np.eye(k, dtype=np.uint8), extra], axis=1))
    v = tuple(range(1, k + 1)) + tuple(int(x) for x in rng.integers(1, k + 1, n_extra))
    return validate(G, v)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 6), snr=st.sampled_from([-3.0, 8.0, 18.0]))
def test_random_codes_match_oracle(seed, k, snr):
    rng = np.random.default_rng(seed)
    n_extra = int(rng.integers(0, 10 - k + 1))
    code = _random_code(rng, k, n_extra)
    _, y, h, n0, rnd = random_rounds(rng, code, 2, snr)
    post = detect_one(code, y, h, n0, rnd.p_e)
    for b in range(2):
        ref = map_oracle(code.G, y[b], h[b], n0, rnd.p_e[b])
        assert relative_marginal_error(post.log_p0[b], post.log_p1[b], ref) < 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), snr=st.floats(-10, 40))
def test_marginal_consistency(seed, snr):
    rng = np.random.default_rng(seed)
    code = _random_code(rng, 3, 4)
    _, y, h, n0, rnd = random_rounds(rng, code, 16, snr)
    post = detect_one(code, y, h, n0, rnd.p_e)
    assert np.all(np.abs(post.p0 + post.p1 - 1.0) < 1e-12)
    assert np.all((post.p1 >= 0) & (post.p1 <= 1))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), perm=st.permutations(range(4)))
def test_slot_permutation_invariance(seed, perm):
    G = NET1_G.select_columns(perm)
    v = tuple((1, 2, 3, 2)[j] for j in perm)
    try:
        permuted = validate(G, v)
    except WncError:
        assume(False)
    code = validate(NET1_G, (1, 2, 3, 2))
    rng = np.random.default_rng(seed)
    _, y, h, n0, rnd = random_rounds(rng, code, 16, 8.0)
    a = detect_one(code, y, h, n0, rnd.p_e)
    b = detect_one(permuted, y[:, perm], h[:, perm], n0, rnd.p_e[:, perm])
    assert np.allclose(a.llr, b.llr, rtol=1e-10, atol=1e-10)


def test_naive_equals_map_without_relay_errors(g1_code, rng):
    _, y, h, n0, rnd = random_rounds(rng, g1_code, 500, 12.0, genie=True)
    inp = DetectorInput(y, h, n0, g1_code, rnd.p_e)
    assert np.array_equal(map_detect(inp).llr, naive_detect(inp).llr)
    assert np.array_equal(map_detect(inp).hard, naive_detect(inp).hard)


def test_naive_trusts_injected_relay_error(net1_code, rng):
    B = 10_000
    n0 = 10 ** (-30 / 10)
    u = rng.integers(0, 2, (B, 3), dtype=np.uint8)
    c = (u.astype(int) @ NET1_G.to_array().astype(int)) % 2
    e = np.zeros_like(c)
    e[:, 2] = 1
    h = (rng.standard_normal((B, 4)) + 1j * rng.standard_normal((B, 4))) / np.sqrt(2)
    w = np.sqrt(n0 / 2) * (rng.standard_normal((B, 4)) + 1j * rng.standard_normal((B, 4)))
    y = h * modulate(c ^ e) + w
    p_e = np.zeros((B, 4))
    p_e[:, 2] = 0.05
    post = naive_detect(DetectorInput(y, h, n0, net1_code, p_e))
    p_true = np.where(u[:, 2] == 1, post.p1[:, 2], post.p0[:, 2])
    assert np.mean(p_true < 0.5) > 0.5


def test_flat_likelihood_gives_half(net1_code, rng):
    _, y, h, _, rnd = random_rounds(rng, net1_code, 50, 0.0)
    post = detect_one(net1_code, y, h, 1e12, rnd.p_e)
    assert np.allclose(post.p1, 0.5, atol=1e-9)


class TestJointMap:
    def test_noiseless(self, g1_code, rng):
        u, y, h, _, rnd = random_rounds(rng, g1_code, 100, 0.0, genie=True)
        y = h * rnd.s
        est = joint_map_detect(DetectorInput(y, h, 1e-3, g1_code, rnd.p_e))
        assert np.array_equal(est, u)

    def test_flat_picks_first_message(self, net1_code):
        inp = DetectorInput(np.zeros(4), np.ones(4), 1.0, net1_code, np.zeros(4))
        assert joint_map_detect(inp).tolist() == [[0, 0, 0]]

    def test_agrees_with_per_symbol_at_high_snr(self, net1_code, rng):
        _, y, h, n0, rnd = random_rounds(rng, net1_code, 20_000, 20.0)
        inp = DetectorInput(y, h, n0, net1_code, rnd.p_e)
        agree = np.all(joint_map_detect(inp) == map_detect(inp).hard, axis=1)
        assert agree.mean() > 0.999


class TestInputs:
    def test_shape_mismatch(self, net1_code):
        with pytest.raises(DimensionError):
            DetectorInput(np.zeros(3), np.ones(4), 1.0, net1_code, np.zeros(4))

    def test_reliability_range(self, net1_code):
        with pytest.raises(ValueError):
            DetectorInput(np.zeros(4), np.ones(4), 1.0, net1_code, [0, 0, 0.6, 0])

    def test_guard(self):
        n = 28
        G = Gf2Matrix.from_rows([[1, 0] + [1] * (n - 2), [0, 1] + [1] * (n - 2)])
        code = validate(G, (1, 2) + (1,) * (n - 2))
        p_e = np.full(n, 0.1)
        p_e[:2] = 0
        with pytest.raises(ComplexityError):
            message_scores(DetectorInput(np.zeros(n), np.ones(n), 1.0, code, p_e))


def test_tie_decides_zero():
    post = PosteriorMarginals(np.array([[0.0, -1e-300, 1e-300]]))
    assert post.hard.tolist() == [[0, 1, 0]]
    assert post.max_posterior[0, 0] == 0.5
