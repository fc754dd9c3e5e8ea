import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mvnmt import autograd as ag
from mvnmt.autograd import Tensor
from mvnmt.errors import ConfigError, EmptyBatchError
from mvnmt.model import TwoStreamLogits
from mvnmt.objectives import (
    LossConfig,
    build_dark_mask,
    consistency_kl,
    dark_mode_str,
    multiview_loss,
    mv_nll,
    parse_dark_mode,
    stream_nll,
    total_loss,
)


def f64(x, grad=False):
    return Tensor(np.asarray(x, dtype=np.float64), requires_grad=grad)


def two(lp, la, grad=False):
    return TwoStreamLogits(f64(lp, grad), f64(la, grad))


def rand_logits(seed, b=2, t=3, v=6):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(b, t, v)) * 2, rng.normal(size=(b, t, v)) * 2, rng.integers(0, v, size=(b, t))


def kl_oracle(p, q):
    return sum(pi * math.log(pi / qi) for pi, qi in zip(p, q) if pi > 0)


# ------------------------------------------------------------------ NLL


def test_uniform_single_token_nll_is_log_v():
    logits = two(np.zeros((1, 1, 4)), np.zeros((1, 1, 4)))
    pri, aux, joint = mv_nll(logits, np.array([[2]]), np.array([[False]]), 0.0)
    assert pri.item() == pytest.approx(math.log(4), abs=1e-12)
    assert joint.item() == pytest.approx(pri.item(), abs=1e-15)


def test_joint_is_mean_of_streams():
    lp, la, gold = rand_logits(0)
    mask = np.zeros(gold.shape, dtype=bool)
    mask[1, 2] = True
    pri, aux, joint = mv_nll(two(lp, la), gold, mask, 0.1)
    assert joint.item() == pytest.approx((pri.item() + aux.item()) / 2, abs=1e-12)


def test_pads_are_ignored_and_all_pad_fails():
    lp, la, gold = rand_logits(1)
    mask = np.zeros(gold.shape, dtype=bool)
    mask[:, -1] = True
    base = stream_nll(f64(lp), gold, mask, 0.0).item()
    lp2 = lp.copy()
    lp2[:, -1] += 100.0
    assert stream_nll(f64(lp2), gold, mask, 0.0).item() == pytest.approx(base, abs=1e-12)
    with pytest.raises(EmptyBatchError):
        stream_nll(f64(lp), gold, np.ones(gold.shape, dtype=bool), 0.0)


# --------------------------------------------------------------- consistency


def test_consistency_three_label_oracle():
    p = np.array([0.9, 0.05, 0.05])
    logits = two(np.log(p)[None, None], np.zeros((1, 1, 3)))
    cr = consistency_kl(logits, np.array([[False]]), LossConfig())
    expected = kl_oracle(p, [1 / 3] * 3)
    assert expected == pytest.approx(0.7042145970, abs=1e-9)
    assert cr.item() == pytest.approx(expected, abs=1e-9)


def test_identical_streams_have_zero_consistency():
    lp, _, gold = rand_logits(2)
    cr = consistency_kl(two(lp, lp), np.zeros(gold.shape, dtype=bool), LossConfig())
    assert cr.item() == 0.0


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), scale=st.floats(0.01, 30.0))
def test_consistency_nonnegative_and_matches_oracle(seed, scale):
    rng = np.random.default_rng(seed)
    lp, la = rng.normal(size=(1, 2, 5)) * scale, rng.normal(size=(1, 2, 5)) * scale
    cr = consistency_kl(two(lp, la), np.zeros((1, 2), dtype=bool), LossConfig()).item()
    assert cr >= 0.0

    def sm(z):
        e = np.exp(z - z.max())
        return e / e.sum()

    oracle = np.mean([kl_oracle(sm(lp[0, j]), sm(la[0, j])) for j in range(2)])
    assert cr == pytest.approx(oracle, rel=1e-6, abs=1e-9)


def test_shift_invariance():
    lp, la, gold = rand_logits(3)
    mask = np.zeros(gold.shape, dtype=bool)
    a = consistency_kl(two(lp, la), mask, LossConfig()).item()
    b = consistency_kl(two(lp + 7.0, la - 3.0), mask, LossConfig()).item()
    assert a == pytest.approx(b, abs=1e-10)


@pytest.mark.parametrize("detach", [False, True])
def test_detach_controls_teacher_gradient(detach):
    lp, la, gold = rand_logits(4)
    logits = two(lp, la, grad=True)
    cr = consistency_kl(logits, np.zeros(gold.shape, dtype=bool), LossConfig(detach_teacher=detach))
    cr.backward()
    g = logits.logits_pri.grad
    if detach:
        assert g is None or np.max(np.abs(g)) == 0.0
    else:
        assert np.max(np.abs(g)) > 1e-4
    assert np.max(np.abs(logits.logits_aux.grad)) > 1e-4


def test_temperature_applies_to_both_streams():
    lp, la, gold = rand_logits(5)
    mask = np.zeros(gold.shape, dtype=bool)
    hot = consistency_kl(two(lp, la), mask, LossConfig(tau=2.0)).item()
    ref = consistency_kl(two(lp / 2, la / 2), mask, LossConfig()).item()
    assert hot == pytest.approx(ref, abs=1e-12)


# ---------------------------------------------------------------- dark masks


def test_mask_definitions():
    p = np.array([[0.1, 0.2, 0.3, 0.4]])
    gold = np.array([2])
    assert build_dark_mask(p, gold, "full").sum() == 4
    dark = build_dark_mask(p, gold, "dark_only")
    assert dark.sum() == 3 and not dark[0, 2]
    assert build_dark_mask(p, gold, "gold_only").tolist() == [[False, False, True, False]]


def test_rank_range_example():
    p = np.array([[0.5, 0.3, 0.15, 0.05]])
    keep = build_dark_mask(p, np.array([0]), "dark_rank_range(1,2)")
    assert set(np.flatnonzero(keep[0])) == {1, 2}


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 10_000), a=st.integers(1, 6), width=st.integers(1, 6), v=st.integers(2, 12))
def test_rank_range_against_sort_oracle(seed, a, width, v):
    b = a + width
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(v), size=4)
    gold = rng.integers(0, v, size=4)
    if a > v - 1:
        with pytest.raises(ConfigError):
            build_dark_mask(p, gold, (a, b))
        return
    keep = build_dark_mask(p, gold, (a, b))
    for row in range(4):
        others = [i for i in range(v) if i != gold[row]]
        ranked = sorted(others, key=lambda i: (-p[row, i], i))
        assert set(np.flatnonzero(keep[row])) == set(ranked[a - 1: b])


def test_open_ended_rank_range():
    p = np.array([[0.4, 0.3, 0.2, 0.1]])
    keep = build_dark_mask(p, np.array([0]), "rank:2-0")
    assert set(np.flatnonzero(keep[0])) == {2, 3}


@pytest.mark.parametrize("bad", ["rank:0-3", "rank:3-2", "most", (5, 5)])
def test_invalid_dark_modes(bad):
    with pytest.raises(ConfigError):
        parse_dark_mode(bad)


def test_dark_mode_string_roundtrip():
    for m in ("full", "gold_only", "dark_only", (1, 100), (100, 0)):
        assert parse_dark_mode(dark_mode_str(m)) == parse_dark_mode(m)


def test_full_mode_equals_unmasked_bitwise():
    lp, la, gold = rand_logits(6)
    mask = np.zeros(gold.shape, dtype=bool)
    a = consistency_kl(two(lp, la), mask, LossConfig(dark_mode="full"), gold).item()
    b = consistency_kl(two(lp, la), mask, LossConfig()).item()
    assert a == b


def test_dark_only_equals_renormalized_kl():
    lp, la, gold = rand_logits(7, b=1, t=1)
    cr = consistency_kl(two(lp, la), np.array([[False]]), LossConfig(dark_mode="dark_only"), gold).item()
    keep = [i for i in range(lp.shape[-1]) if i != gold[0, 0]]
    p = np.exp(lp[0, 0, keep])
    q = np.exp(la[0, 0, keep])
    assert cr == pytest.approx(kl_oracle(p / p.sum(), q / q.sum()), abs=1e-10)


def test_gold_only_is_gold_log_ratio():
    lp, la, gold = rand_logits(8, b=1, t=1)
    cr = consistency_kl(two(lp, la), np.array([[False]]), LossConfig(dark_mode="gold_only"), gold).item()

    def sm(z):
        e = np.exp(z - z.max())
        return e / e.sum()

    g = gold[0, 0]
    p, q = sm(lp[0, 0])[g], sm(la[0, 0])[g]
    assert cr == pytest.approx(max(p * math.log(p / q), 0.0), abs=1e-10)


def test_masked_modes_need_gold():
    lp, la, _ = rand_logits(9)
    with pytest.raises(ConfigError):
        consistency_kl(two(lp, la), np.zeros((2, 3), dtype=bool), LossConfig(dark_mode="dark_only"))


# -------------------------------------------------------------------- total


def test_total_loss_arithmetic():
    assert total_loss(3.0, 1.0, 0.4) == pytest.approx(2.2)
    assert total_loss(3.0, 1.0, 0.0) == 3.0
    with pytest.raises(ConfigError):
        total_loss(3.0, 1.0, 1.5)


def test_alpha_one_on_identical_streams_is_zero():
    lp, _, gold = rand_logits(10)
    bd = multiview_loss(two(lp, lp), gold, np.zeros(gold.shape, dtype=bool), LossConfig(alpha=1.0))
    assert bd.total == 0.0


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), alpha=st.floats(0.0, 1.0), eps=st.sampled_from([0.0, 0.1]))
def test_breakdown_identities(seed, alpha, eps):
    lp, la, gold = rand_logits(seed)
    bd = multiview_loss(two(lp, la), gold, np.zeros(gold.shape, dtype=bool), LossConfig(alpha=alpha, eps_ls=eps))
    bd.check(1e-6)


def test_loss_config_validation():
    with pytest.raises(ConfigError):
        LossConfig(alpha=-0.1)
    with pytest.raises(ConfigError):
        LossConfig(eps_ls=1.0)
    with pytest.raises(ConfigError):
        LossConfig(tau=0.0)
