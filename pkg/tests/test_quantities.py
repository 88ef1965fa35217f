import math

import numpy as np
import pytest

from calc import channels as ch
from calc import matcore as mc
from calc import quantities as qt
from common.errors import ConfigError, DimensionError, SumcapError

DEPOL_SMIN = 0.811278
DEPOL_CHI = 0.188722


# ----------------- options -----------------

def test_options_validation():
    with pytest.raises(ConfigError):
        qt.OptimizerOptions(restarts=0)
    with pytest.raises(ConfigError):
        qt.OptimizerOptions(objective_tolerance=0)
    with pytest.raises(ConfigError):
        qt.OptimizerOptions(n_jobs=0)


def test_options_from_dict_layers_over_base():
    base = qt.OptimizerOptions(restarts=4, seed=3)
    o = qt.OptimizerOptions.from_dict({"restarts": 2}, base)
    assert (o.restarts, o.seed) == (2, 3)
    assert qt.OptimizerOptions.from_dict(None, base) == base
    with pytest.raises(ConfigError, match="unknown"):
        qt.OptimizerOptions.from_dict({"restart": 2})


# ----------------- minimal output entropy -----------------

@pytest.mark.parametrize("alpha", [1, 2, math.inf])
def test_smin_identity_is_zero(opts, id2, alpha):
    r = qt.min_output_renyi(id2, alpha, opts)
    assert r.value == pytest.approx(0.0, abs=1e-9)
    assert r.bound_kind == qt.UPPER


@pytest.mark.parametrize("alpha,expected", [(1, DEPOL_SMIN), (2, -math.log2(0.625)), (math.inf, -math.log2(0.75))])
def test_smin_depolarizing(opts, depol05, alpha, expected):
    r = qt.min_output_renyi(depol05, alpha, opts)
    assert r.value == pytest.approx(expected, abs=1e-6)
    assert isinstance(r.witness, mc.PureState)
    assert mc.renyi_entropy(ch.apply(depol05, r.witness), alpha) == pytest.approx(r.value, abs=1e-12)


@pytest.mark.parametrize("alpha", [1, 2, 5, math.inf])
def test_smin_werner_holevo_is_one(opts, alpha):
    assert qt.min_output_renyi(ch.werner_holevo(3), alpha, opts).value == pytest.approx(1.0, abs=1e-9)


def test_smin_constant_channel(opts):
    sigma = np.diag([0.75, 0.25])
    r = qt.min_output_renyi(ch.constant_channel(sigma, d_in=3), 1, opts)
    assert r.value == pytest.approx(DEPOL_SMIN, abs=1e-6)


def test_smin_rejects_alpha_below_one(opts, id2):
    with pytest.raises(SumcapError):
        qt.min_output_renyi(id2, 0.5, opts)


def test_smin_warm_start_never_worsens(opts):
    T = ch.random_channel(3, 3, 2, seed=4)
    first = qt.min_output_renyi(T, 1, opts)
    again = qt.min_output_renyi(T, 1, opts.replace(restarts=1, seed=99), initial=[first.witness])
    assert again.value <= first.value + 1e-12
    assert again.restarts_used == 2


@pytest.mark.parametrize("seed", range(4))
def test_smin_non_increasing_in_alpha(opts, seed):
    T = ch.random_channel(2 + seed % 2, 2, 3, seed=seed)
    values, warm = [], None
    for alpha in [1, 1.5, 2, 3, 5, 10, math.inf]:
        r = qt.min_output_renyi(T, alpha, opts, initial=[warm] if warm is not None else None)
        values.append(r.value)
        warm = r.witness
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    assert values[0] > values[-1]


def test_smin_is_deterministic(opts):
    T = ch.random_channel(2, 2, 3, seed=1)
    a = qt.min_output_renyi(T, 2, opts)
    b = qt.min_output_renyi(T, 2, opts)
    assert a.value == b.value
    assert np.array_equal(a.witness.vec, b.witness.vec)
    assert a.best_restart_index == b.best_restart_index


def test_parallel_restarts_match_sequential(opts):
    T = ch.random_channel(2, 2, 3, seed=2)
    seq = qt.min_output_renyi(T, 1, opts)
    par = qt.min_output_renyi(T, 1, opts.replace(n_jobs=2))
    assert seq.value == par.value
    assert seq.best_restart_index == par.best_restart_index


# ----------------- coherent and mutual information -----------------

def test_coherent_identity_and_unitary(opts, id2):
    assert qt.coherent_information(id2, opts).value == pytest.approx(1.0, abs=1e-6)
    U = ch.unitary_channel(mc.random_haar_unitary(3, seed=7))
    assert qt.coherent_information(U, opts).value == pytest.approx(math.log2(3), abs=1e-6)


def test_coherent_of_fully_depolarizing_is_zero(opts):
    r = qt.coherent_information(ch.depolarizing(2, 0.0), opts)
    assert r.value == pytest.approx(0.0, abs=1e-6)
    assert r.bound_kind == qt.LOWER


def test_evaluate_coherent_on_pure_input_is_zero_for_complement_pairs():
    T = ch.random_channel(2, 2, 2, seed=3)
    psi = mc.random_pure(2, seed=4)
    assert qt.evaluate_coherent(T, psi) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("d", [2, 3])
def test_mutual_identity(opts, d):
    r = qt.mutual_information(ch.identity(d), opts)
    assert r.value == pytest.approx(2 * math.log2(d), abs=1e-4)
    assert r.bound_kind == qt.EXACT


def test_mutual_fully_depolarizing_is_zero(opts):
    assert qt.mutual_information(ch.depolarizing(2, 0.0), opts).value == pytest.approx(0.0, abs=1e-6)


def test_information_ordering(opts):
    T = ch.random_channel(2, 2, 2, seed=5)
    J = qt.coherent_information(T, opts).value
    I = qt.mutual_information(T, opts).value
    chi = qt.holevo_capacity(T, opts).value
    assert J >= -1e-9
    assert J <= I + 1e-6
    assert chi <= I + 1e-6


# ----------------- HSW capacity -----------------

def test_chi_identity(opts, id2):
    r = qt.holevo_capacity(id2, opts)
    assert r.value == pytest.approx(1.0, abs=1e-3)
    assert r.witness_value == pytest.approx(r.value)
    assert np.allclose(r.witness.probs.weights.sum(), 1.0)


def test_chi_depolarizing(opts, depol05):
    assert qt.holevo_capacity(depol05, opts).value == pytest.approx(DEPOL_CHI, abs=1e-3)


def test_chi_constant_is_zero(opts):
    T = ch.constant_channel(np.diag([0.75, 0.25]))
    assert qt.holevo_capacity(T, opts).value == pytest.approx(0.0, abs=1e-9)


def test_holevo_quantity_of_orthogonal_ensemble(id2):
    ens = qt.make_ensemble([0.5, 0.5], [mc.pure_density([1, 0]), mc.pure_density([0, 1])])
    assert qt.holevo_quantity(id2, ens) == pytest.approx(1.0)
    assert qt.average_output_entropy(id2, ens) == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(ens.average(), np.eye(2) / 2)


@pytest.mark.slow
def test_chi_direct_sum_example(opts, id2, depol05):
    r = qt.holevo_capacity(ch.direct_sum([id2, depol05]), opts)
    assert r.value == pytest.approx(1.650662, abs=5e-3)


# ----------------- convex closure and constrained capacity -----------------

def test_roof_identity_is_zero(opts, id2):
    rho = mc.random_density(2, seed=3)
    r = qt.convex_closure_output_entropy(id2, rho, opts)
    assert r.value == pytest.approx(0.0, abs=1e-9)
    assert np.allclose(r.witness.average(), rho.mat, atol=1e-8)


def test_roof_pure_input_is_output_entropy(opts):
    T = ch.partial_trace_channel(2, 2)
    assert qt.convex_closure_output_entropy(T, mc.bell_state(), opts).value == pytest.approx(1.0, abs=1e-9)
    assert qt.convex_closure_output_entropy(T, mc.product_state(), opts).value == pytest.approx(0.0, abs=1e-9)


def test_roof_of_depolarizing_on_maximally_mixed(opts, depol05):
    r = qt.convex_closure_output_entropy(depol05, mc.maximally_mixed(2), opts)
    assert r.value == pytest.approx(DEPOL_SMIN, abs=1e-6)


def test_roof_rejects_wrong_dimension(opts, id2):
    with pytest.raises(DimensionError):
        qt.convex_closure_output_entropy(id2, mc.maximally_mixed(3), opts)


def test_constrained_holevo(opts, id2, depol05):
    rho = mc.random_density(2, seed=8)
    assert qt.constrained_holevo(id2, rho, opts).value == pytest.approx(mc.von_neumann_entropy(rho), abs=1e-6)
    const = ch.constant_channel(np.diag([0.75, 0.25]))
    assert qt.constrained_holevo(const, rho, opts).value == pytest.approx(0.0, abs=1e-8)
    at_center = qt.constrained_holevo(depol05, mc.maximally_mixed(2), opts)
    assert at_center.value == pytest.approx(DEPOL_CHI, abs=1e-5)
    assert at_center.bound_kind == qt.LOWER


# ----------------- entanglement of formation -----------------

def test_concurrence_values():
    assert qt.concurrence(mc.bell_state()) == pytest.approx(1.0, abs=1e-9)
    assert qt.concurrence(mc.product_state()) == pytest.approx(0.0, abs=1e-9)
    assert qt.concurrence(mc.werner_state(0.75)) == pytest.approx(0.5, abs=1e-9)
    with pytest.raises(DimensionError):
        qt.concurrence(np.eye(3) / 3)


def test_eof_closed_form_werner():
    assert qt.eof_two_qubit(mc.werner_state(0.75)) == pytest.approx(0.35458, abs=1e-5)
    assert qt.eof_two_qubit(mc.werner_state(0.5)) == pytest.approx(0.0, abs=1e-9)


def test_eof_bell_and_separable(opts):
    bell = qt.eof(mc.bell_state(), opts)
    assert bell.value == pytest.approx(1.0, abs=1e-9)
    assert bell.witness_value == pytest.approx(1.0, abs=1e-9)
    sep = mc.density(np.diag([0.5, 0, 0, 0.5]), (2, 2))
    assert qt.eof(sep, opts).value == pytest.approx(0.0, abs=1e-9)


def test_eof_needs_bipartite_dims(opts):
    with pytest.raises(DimensionError):
        qt.eof(mc.maximally_mixed(4), opts)


def test_eof_qutrit_pure_state(opts):
    psi = mc.maximally_entangled(3).density()
    assert qt.eof(psi, opts).value == pytest.approx(math.log2(3), abs=1e-9)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_eof_roof_never_beats_closed_form(opts, seed):
    rho = mc.random_density(4, rank=2, seed=seed)
    rho = mc.DensityMatrix(rho.mat, (2, 2))
    r = qt.eof(rho, opts)
    closed = qt.eof_two_qubit(rho)
    assert r.witness_value >= closed - 1e-3
    assert r.value <= closed + 1e-12
    assert r.bound_kind == qt.EXACT


@pytest.mark.slow
def test_eof_roof_approaches_closed_form():
    rho = mc.werner_state(0.75)
    r = qt.eof(rho, qt.OptimizerOptions(restarts=8, seed=0, n_jobs=1))
    closed = qt.eof_two_qubit(rho)
    assert r.value == pytest.approx(closed, abs=1e-9)
    assert closed - 1e-9 <= r.witness_value <= closed + 5e-3


# ----------------- block weights and the gap -----------------

@pytest.mark.parametrize("c,weights,value", [
    ([1.0, 0.0], [2 / 3, 1 / 3], math.log2(3)),
    ([0.5, 0.5, 0.5], [1 / 3] * 3, 0.5 + math.log2(3)),
    ([1.0], [1.0], 1.0),
])
def test_optimal_block_weights(c, weights, value):
    lam, v = qt.optimal_block_weights(c)
    assert np.allclose(lam.weights, weights)
    assert v == pytest.approx(value)
    assert qt.block_weight_objective(lam, c) == pytest.approx(value)


def test_block_weights_beat_a_grid():
    c = [0.3, 1.1]
    _, best = qt.optimal_block_weights(c)
    grid = np.linspace(0, 1, 10001)
    assert max(qt.block_weight_objective([x, 1 - x], c) for x in grid) <= best + 1e-9
    with pytest.raises(DimensionError):
        qt.optimal_block_weights([])
    with pytest.raises(DimensionError):
        qt.block_weight_objective([1.0], c)


def test_hsw_gap(opts, id2, depol05):
    assert qt.hsw_smin_gap(id2, opts) == pytest.approx(0.0, abs=1e-3)
    assert qt.hsw_smin_gap(depol05, opts) == pytest.approx(0.0, abs=1e-3)
    assert qt.hsw_smin_gap(ch.constant_channel(mc.pure_density([1, 0])), opts) == pytest.approx(1.0, abs=1e-9)


def test_result_to_dict(opts, depol05):
    d = qt.min_output_renyi(depol05, math.inf, opts).to_dict(emit_witness=True)
    assert d["bound_kind"] == qt.UPPER
    assert d["details"]["alpha"] == "inf"
    assert d["witness"]["kind"] == "pure"
    assert "state" in d["witness"]
