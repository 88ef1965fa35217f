import json
import math

import numpy as np
import pytest

from calc import channels as ch
from calc import matcore as mc
from common.errors import DimensionError, InvalidChannelError, InvalidStateError


def _same_map(A, B, atol=1e-10):
    return ch.choi_distance(ch.choi(A), ch.choi(B)) <= atol


def test_identity_and_unitary_apply():
    rho = mc.random_density(3, seed=0)
    assert np.allclose(ch.apply(ch.identity(3), rho).mat, rho.mat)
    U = mc.random_haar_unitary(3, seed=1)
    assert np.allclose(ch.apply(ch.unitary_channel(U), rho).mat, U @ rho.mat @ U.conj().T)


def test_make_channel_names_the_violated_invariant():
    with pytest.raises(InvalidChannelError, match="trace preservation"):
        ch.make_channel([np.eye(2), np.eye(2)])
    with pytest.raises(InvalidChannelError, match="Kraus count"):
        ch.make_channel([])
    with pytest.raises(InvalidChannelError, match="shape"):
        ch.make_channel([np.eye(2), np.eye(3)])


def test_apply_rejects_wrong_dimension():
    with pytest.raises(DimensionError):
        ch.apply(ch.identity(2), np.eye(3) / 3)


def test_fully_depolarizing_outputs_maximally_mixed():
    T = ch.depolarizing(2, 0.0)
    out = ch.apply(T, mc.pure_density([0.6, 0.8j]))
    assert np.allclose(out.mat, np.eye(2) / 2)


@pytest.mark.parametrize("d,lam", [(2, 0.5), (3, 0.2), (2, -1 / 3), (3, -1 / 8)])
def test_depolarizing_formula(d, lam):
    T = ch.depolarizing(d, lam)
    rho = mc.random_density(d, seed=d)
    expected = lam * rho.mat + (1 - lam) * np.eye(d) / d
    assert np.allclose(ch.apply(T, rho).mat, expected)


def test_depolarizing_range():
    with pytest.raises(InvalidChannelError):
        ch.depolarizing(2, 1.5)
    with pytest.raises(InvalidChannelError):
        ch.depolarizing(2, -0.5)


def test_depolarizing_endpoints_match_named_channels():
    assert _same_map(ch.depolarizing(2, 1.0), ch.identity(2))
    assert _same_map(ch.depolarizing(3, 0.0), ch.constant_channel(mc.maximally_mixed(3)))


def test_werner_holevo_output_spectrum():
    T = ch.werner_holevo(3)
    for seed in range(3):
        out = ch.apply(T, mc.random_pure(3, seed=seed))
        assert np.allclose(np.sort(np.linalg.eigvalsh(out.mat)), [0, 0.5, 0.5], atol=1e-10)
    assert np.allclose(ch.apply(T, mc.pure_density([1, 0, 0])).mat, np.diag([0, 0.5, 0.5]))


def test_werner_holevo_is_transpose_formula():
    T = ch.werner_holevo(4)
    rho = mc.random_density(4, seed=9)
    assert np.allclose(ch.apply(T, rho).mat, (np.eye(4) - rho.mat.T) / 3)


def test_dephasing_kills_coherences():
    rho = mc.random_density(3, seed=2)
    out = ch.apply(ch.dephasing(3), rho).mat
    assert np.allclose(out, np.diag(np.diag(rho.mat)))
    half = ch.apply(ch.dephasing(3, 0.5), rho).mat
    assert np.allclose(half, 0.5 * rho.mat + 0.5 * np.diag(np.diag(rho.mat)))
    with pytest.raises(InvalidChannelError):
        ch.dephasing(2, 1.5)


def test_constant_channel_ignores_input():
    sigma = mc.random_density(2, seed=3)
    T = ch.constant_channel(sigma, d_in=3)
    assert (T.d_in, T.d_out) == (3, 2)
    assert np.allclose(ch.apply(T, mc.random_density(3, seed=4)).mat, sigma.mat)


def test_partial_trace_channel_matches_partial_trace():
    rho = mc.random_density(6, seed=5)
    TB = ch.partial_trace_channel(2, 3, "B")
    TA = ch.partial_trace_channel(2, 3, "A")
    assert np.allclose(ch.apply(TB, rho).mat, mc.partial_trace(rho.mat, [2, 3], [0]))
    assert np.allclose(ch.apply(TA, rho).mat, mc.partial_trace(rho.mat, [2, 3], [1]))
    with pytest.raises(InvalidChannelError):
        ch.partial_trace_channel(2, 2, "C")


def test_mixed_unitary_and_unital():
    Us = ch.weyl_operators(2)
    T = ch.mixed_unitary([0.4, 0.3, 0.2, 0.1], Us)
    assert ch.is_unital(T)
    assert ch.is_unital(ch.werner_holevo(3))
    assert not ch.is_unital(ch.constant_channel(mc.pure_density([1, 0])))
    with pytest.raises(DimensionError):
        ch.is_unital(ch.partial_trace_channel(2, 2))
    with pytest.raises(InvalidChannelError):
        ch.mixed_unitary([0.5, 0.5], [np.eye(2), np.ones((2, 2))])


def test_random_channel_is_seeded_cptp():
    T = ch.random_channel(2, 3, 2, seed=11)
    assert (T.d_in, T.d_out, T.n_kraus) == (2, 3, 2)
    gram = np.einsum("kai,kaj->ij", T.kraus.conj(), T.kraus)
    assert np.allclose(gram, np.eye(2))
    assert np.array_equal(T.kraus, ch.random_channel(2, 3, 2, seed=11).kraus)
    with pytest.raises(InvalidChannelError):
        ch.random_channel(5, 2, 2)


def test_choi_of_identity_is_unnormalized_max_entangled():
    C = ch.choi(ch.identity(2)).mat
    phi = np.array([1, 0, 0, 1])
    assert np.allclose(C, np.outer(phi, phi))


def test_choi_of_fully_depolarizing():
    assert np.allclose(ch.choi(ch.depolarizing(2, 0.0)).mat, np.eye(4) / 2)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_choi_kraus_round_trip_preserves_action(seed):
    T = ch.random_channel(3, 2, 3, seed=seed)
    back = ch.kraus_from_choi(ch.choi(T))
    rho = mc.random_density(3, seed=seed + 10)
    assert np.allclose(ch.apply(back, rho).mat, ch.apply(T, rho).mat, atol=1e-9)
    assert back.n_kraus <= 3


def test_apply_via_choi_agrees_with_kraus():
    T = ch.random_channel(2, 3, 2, seed=7)
    rho = mc.random_density(2, seed=8)
    assert np.allclose(ch.apply_via_choi(ch.choi(T), rho), ch.apply(T, rho).mat)


def test_make_choi_rejects_non_channels():
    with pytest.raises(InvalidChannelError, match="trace preservation"):
        ch.make_choi(np.eye(4), 2, 2)
    with pytest.raises(InvalidChannelError, match="PSD"):
        ch.make_choi(np.diag([1.0, -0.5, 0.5, 1.0]), 2, 2)
    with pytest.raises(DimensionError):
        ch.make_choi(np.eye(3), 2, 2)


def test_adjoint_is_dual_to_apply():
    T = ch.random_channel(2, 3, 2, seed=4)
    rho = mc.random_density(2, seed=5).mat
    Y = mc.random_density(3, seed=6).mat
    lhs = np.trace(ch.apply_raw(T, rho) @ Y)
    rhs = np.trace(rho @ ch.adjoint(T, Y))
    assert lhs == pytest.approx(rhs)


def test_tensor_acts_factorwise():
    T1 = ch.random_channel(2, 2, 2, seed=1)
    T2 = ch.random_channel(3, 2, 2, seed=2)
    a, b = mc.random_density(2, seed=3).mat, mc.random_density(3, seed=4).mat
    out = ch.apply(ch.tensor(T1, T2), np.kron(a, b)).mat
    assert np.allclose(out, np.kron(ch.apply(T1, a).mat, ch.apply(T2, b).mat))
    assert _same_map(ch.tensor(ch.identity(2), ch.identity(2)), ch.identity(4))


def test_direct_sum_blocks():
    T1 = ch.random_channel(2, 3, 2, seed=1)
    T2 = ch.depolarizing(2, 0.5)
    S = ch.direct_sum([T1, T2])
    assert (S.d_in, S.d_out, S.n_kraus) == (4, 5, T1.n_kraus + T2.n_kraus)
    a, b = mc.random_density(2, seed=2).mat, mc.random_density(2, seed=3).mat
    out = ch.apply(S, mc.direct_sum_mat([0.3 * a, 0.7 * b])).mat
    assert np.allclose(out, mc.direct_sum_mat([0.3 * ch.apply(T1, a).mat, 0.7 * ch.apply(T2, b).mat]))
    assert _same_map(ch.direct_sum([T1]), T1)
    with pytest.raises(InvalidChannelError):
        ch.direct_sum([])


def test_direct_sum_kills_cross_block_coherence():
    S = ch.direct_sum([ch.identity(1), ch.identity(1)])
    out = ch.apply(S, np.full((2, 2), 0.5)).mat
    assert np.allclose(out, np.eye(2) / 2)


def test_pad_output_appends_state():
    T = ch.random_channel(2, 2, 3, seed=5)
    sigma = mc.random_density(3, rank=2, seed=6)
    P = ch.pad_output(T, sigma)
    expected = ch.choi_of_map(lambda E: np.kron(ch.apply_raw(T, E), sigma.mat), 2, 6)
    assert ch.choi_distance(ch.choi(P), expected) <= 1e-10
    assert P.n_kraus == T.n_kraus * 2


def test_complementary_of_unitary_is_constant_pure():
    Tc = ch.complementary(ch.unitary_channel(mc.random_haar_unitary(3, seed=2)))
    assert Tc.d_out == 1
    assert np.allclose(ch.apply(Tc, mc.random_density(3, seed=1)).mat, [[1.0]])


@pytest.mark.parametrize("seed", [0, 1])
def test_complementary_entropy_matches_joint_output(seed):
    T = ch.random_channel(2, 2, 3, seed=seed)
    Tc = ch.complementary(T)
    psi = mc.random_pure(2, seed=seed + 5)
    assert mc.von_neumann_entropy(ch.apply(Tc, psi)) == pytest.approx(
        mc.von_neumann_entropy(ch.apply(T, psi)), abs=1e-9)
    rho = mc.random_density(2, seed=seed + 7)
    joint = ch.apply(ch.tensor(T, ch.identity(2)), mc.purify(rho))
    assert mc.von_neumann_entropy(ch.apply(Tc, rho)) == pytest.approx(mc.von_neumann_entropy(joint), abs=1e-9)


def test_reindex_channel_validates_permutations():
    T = ch.identity(3)
    with pytest.raises(DimensionError):
        ch.reindex_channel(T, [0, 0, 1], [0, 1, 2])
    R = ch.reindex_channel(ch.werner_holevo(3), [2, 0, 1], [2, 0, 1])
    assert R.d_in == 3


def test_sector_order_is_a_permutation():
    perm = ch.sector_order([2, 1], [1, 3])
    assert sorted(perm.tolist()) == list(range(12))
    assert ch.sector_indices([2, 1], [1, 3], 1, 0).tolist() == [8]


def test_embed_sector():
    idx = ch.sector_indices([1, 2], [1, 2], 0, 1)
    rho = ch.embed_sector(mc.maximally_mixed(2), idx, 9)
    assert np.trace(rho.mat).real == pytest.approx(1.0)
    assert np.allclose(np.diag(rho.mat)[idx], 0.5)
    with pytest.raises(DimensionError):
        ch.embed_sector(mc.maximally_mixed(3), idx, 9)


def test_channel_json_round_trip(tmp_path):
    T = ch.random_channel(2, 3, 2, seed=3)
    path = str(tmp_path / "t.json")
    ch.save_channel(T, path)
    back = ch.load_channel(path)
    assert np.allclose(back.kraus, T.kraus)
    assert back.label == T.label


def test_channel_json_rejections():
    good = ch.channel_to_json(ch.identity(2))
    with pytest.raises(InvalidChannelError):
        ch.channel_from_json({"d_in": 2, "kraus": good["kraus"]})
    with pytest.raises(InvalidChannelError, match="declared"):
        ch.channel_from_json(dict(good, d_out=3))
    bad = json.loads(json.dumps(good))
    bad["kraus"][0][0][0] = [2.0, 0.0]
    with pytest.raises(InvalidChannelError, match="trace preservation"):
        ch.channel_from_json(bad)


def test_state_json(tmp_path):
    path = str(tmp_path / "s.json")
    ch.save_state(mc.bell_state(), path, "bell")
    rho = ch.load_state(path)
    assert rho.dims == (2, 2)
    assert np.allclose(rho.mat, mc.bell_state().mat)
    psi = ch.state_from_json({"vec": [[0.6, 0], [0, 0.8]]})
    assert np.allclose(psi.vec, [0.6, 0.8j])
    with pytest.raises(InvalidStateError):
        ch.state_from_json({"mat": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]})
    with pytest.raises(InvalidStateError):
        ch.state_from_json({"dims": [2]})


def test_direct_sum_distributes_over_tensor_small():
    T1, T2 = ch.identity(1), ch.depolarizing(2, 0.5)
    T3, T4 = ch.werner_holevo(3), ch.identity(2)
    big = ch.tensor(ch.direct_sum([T1, T2]), ch.direct_sum([T3, T4]))
    perm_in = ch.sector_order([1, 2], [3, 2])
    perm_out = ch.sector_order([1, 2], [3, 2])
    sectors = ch.direct_sum([ch.tensor(T1, T3), ch.tensor(T1, T4), ch.tensor(T2, T3), ch.tensor(T2, T4)])
    assert _same_map(ch.reindex_channel(big, perm_in, perm_out), sectors)
    assert math.isinf(ch.choi_distance(ch.choi(T1), ch.choi(T2)))


def test_choi_of_tensor_is_permuted_kron():
    T1 = ch.random_channel(2, 3, 2, seed=21)
    T2 = ch.random_channel(2, 2, 2, seed=22)
    C1, C2 = ch.choi(T1).mat, ch.choi(T2).mat
    K = np.kron(C1, C2).reshape(2, 3, 2, 2, 2, 3, 2, 2)
    K = K.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(24, 24)
    assert np.allclose(ch.choi(ch.tensor(T1, T2)).mat, K, atol=1e-12)
