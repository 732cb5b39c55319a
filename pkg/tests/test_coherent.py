import numpy as np
import pytest
from conftest import two_cavity_spec
from hypothesis import given, settings
from hypothesis import strategies as st
from reference import fock_coherent, trace_distance

from bosonet import Network, NetworkSpec, OscillatorSpec, Reservoir, WhiteNoise, build_hd, generate_topology
from bosonet.dynamics import (coherent_overlap, continuum_superposition, decoherence_coefficients,
                              evolve_coherent, initial_expansion, normalize_superposition, overlap_trace,
                              recurrence_probability, reduce_coherent, transfer_probability)
from bosonet.errors import DegenerateStateError, ValidationError
from bosonet.oracle import LindbladGenerator, integrate
from bosonet.spectral import propagator


CAT2 = normalize_superposition([1, 1], [[1.0, 0], [-1.0, 0]])


def lossless(kind, n, omega=1.0, lam=0.1):
    spec = generate_topology(kind, n, omega, lam)
    return Network.from_spec(spec)


def single(gamma, omega=1.0):
    spec = NetworkSpec((OscillatorSpec(1, omega, Reservoir("distinct", "r")),), (), "distinct",
                       {"r": WhiteNoise(gamma)})
    return Network.from_spec(spec)


# --- overlaps and normalisation ------------------------------------------------

def test_overlap_examples():
    assert coherent_overlap([0.0], [0.0]) == pytest.approx(1.0)
    assert coherent_overlap([1.0], [-1.0]) == pytest.approx(np.exp(-2.0))
    a, b = np.array([0.3 + 0.2j, -0.5]), np.array([1.1j, 0.4])
    expected = np.prod([fock_coherent(x, 40).conj() @ fock_coherent(y, 40) for x, y in zip(a, b)])
    assert abs(coherent_overlap(a, b) - expected) < 1e-13
    with pytest.raises(ValidationError):
        coherent_overlap([1.0], [1.0, 2.0])


def test_single_branch_normalises_to_one():
    state = normalize_superposition([2.5j], [[0.7, -0.3j]])
    assert state.norm == pytest.approx(1 / 2.5)


@pytest.mark.parametrize("b", [0.3, 1.0, 2.0])
def test_even_cat_normalisation(b):
    state = normalize_superposition([1, 1], [[b], [-b]])
    assert state.norm == pytest.approx((2 + 2 * np.exp(-2 * b * b)) ** -0.5, rel=1e-14)


def test_separated_cat_normalisation_limit():
    assert normalize_superposition([1, 1], [[12.0], [-12.0]]).norm == pytest.approx(1 / np.sqrt(2), rel=1e-15)


def test_cancelling_branches_rejected():
    with pytest.raises(DegenerateStateError):
        normalize_superposition([1, -1], [[0.5], [0.5]])
    with pytest.raises(ValidationError):
        normalize_superposition([1, 1], [[0.5]])


def test_initial_expansion_has_unit_weights_table():
    state = normalize_superposition([1, 0.5j, -0.3], [[1, 0], [0, 1j], [-0.4, 0.2]])
    ev = initial_expansion(state)
    lam = state.amplitudes
    assert np.allclose(ev.weights, state.norm**2 * np.outer(lam, lam.conj()), atol=1e-15)
    assert ev.trace == pytest.approx(1.0, abs=1e-14)
    assert ev.purity == pytest.approx(1.0, abs=1e-13)


# --- closed-form evolution -----------------------------------------------------

def test_single_coherent_state_stays_coherent():
    net = single(0.2)
    prop = net.propagator(1.5)
    ev = evolve_coherent(normalize_superposition([1], [[1.2 - 0.4j]]), prop)
    assert ev.weights.shape == (1, 1) and ev.weights[0, 0] == pytest.approx(1.0)
    assert ev.labels[0, 0] == pytest.approx((1.2 - 0.4j) * prop.theta[0, 0])


def test_lossless_evolution_keeps_weights_and_purity():
    net = lossless("symmetric", 3)
    state = normalize_superposition([1, 1j, 0.5], [[1, 0, 0], [0, -1, 0.5j], [0.3, 0.3, 0.3]])
    w0 = initial_expansion(state).weights
    for t in (0.7, 4.0, 30.0):
        ev = evolve_coherent(state, net.propagator(t))
        assert np.allclose(ev.weights, w0, atol=1e-12)
        assert ev.purity == pytest.approx(1.0, abs=1e-10)
        assert ev.trace == pytest.approx(1.0, abs=1e-12)


def test_propagator_shape_mismatch_rejected():
    with pytest.raises(ValidationError):
        evolve_coherent(normalize_superposition([1], [[1.0]]), lossless("linear", 2).propagator(1.0))


def test_photon_number_decays_at_the_damping_rate():
    net = single(0.3)
    state = normalize_superposition([1, 1], [[1.5], [-1.5]])
    n0 = initial_expansion(state).mean_photon_numbers()[0]
    for t in (1.0, 4.0):
        n = evolve_coherent(state, net.propagator(t)).mean_photon_numbers()[0]
        assert n == pytest.approx(n0 * np.exp(-0.3 * t), rel=1e-12)


def test_density_matrix_matches_state_vector_build():
    state = normalize_superposition([1, 1], [[1.0, 0.5j], [-1.0, 0.2]])
    rho = initial_expansion(state).density_matrix(20).data
    vecs = [np.kron(fock_coherent(b[0], 20), fock_coherent(b[1], 20)) for b in state.labels]
    psi = state.norm * (vecs[0] + vecs[1])
    assert np.max(np.abs(rho - np.outer(psi, psi.conj()))) < 1e-12


@pytest.fixture(scope="module")
def weak_coupling_cat():
    """Even cat in oscillator 1 of a weakly coupled, lightly damped pair, plus an oracle run."""
    net = Network.from_spec(two_cavity_spec(lam=0.05, gammas=(0.02, 0.02)))
    state = normalize_superposition([1, 1], [[1.0, 0], [-1.0, 0]])
    cutoff = 25
    rho0 = initial_expansion(state).density_matrix(cutoff)
    run = integrate(net.generator(cutoff), rho0, 20.0, dt=0.1, sample_times=[1.0, 5.0, 20.0])
    return net, state, cutoff, run


@pytest.mark.parametrize("t", [1.0, 5.0, 20.0])
def test_closed_form_matches_oracle(weak_coupling_cat, t):
    net, state, cutoff, run = weak_coupling_cat
    ev = evolve_coherent(state, net.propagator(t))
    assert trace_distance(ev.density_matrix(cutoff).data, run.at(t).data) <= 1e-6


@pytest.mark.parametrize("t", [1.0, 20.0])
def test_reduced_state_matches_oracle_partial_trace(weak_coupling_cat, t):
    net, state, cutoff, run = weak_coupling_cat
    ev = evolve_coherent(state, net.propagator(t))
    for m in (0, 1):
        closed = reduce_coherent(ev, [m]).density_matrix(cutoff).data
        assert trace_distance(closed, run.at(t).partial_trace([m]).data) <= 1e-6


def test_reduce_to_all_modes_is_identity():
    net = Network.from_spec(two_cavity_spec())
    state = normalize_superposition([1, 1], [[1.0, 0.2], [-1.0, 0.1j]])
    ev = evolve_coherent(state, net.propagator(3.0))
    red = reduce_coherent(ev, [1, 0])
    assert red.modes == (0, 1)
    assert np.allclose(red.weights, ev.weights, atol=1e-15)
    with pytest.raises(ValidationError):
        reduce_coherent(ev, [])
    with pytest.raises(ValidationError):
        reduce_coherent(ev, [2])
    with pytest.raises(ValidationError):
        reduce_coherent(reduce_coherent(ev, [0]), [0])


def test_reduced_single_branch_is_pure():
    net = Network.from_spec(two_cavity_spec())
    ev = evolve_coherent(normalize_superposition([1], [[1.0, -0.5j]]), net.propagator(2.0))
    for m in (0, 1):
        assert reduce_coherent(ev, [m]).purity == pytest.approx(1.0, abs=1e-13)


# --- recurrence and transfer ---------------------------------------------------

def test_recurrence_at_zero_equals_reduced_purity():
    net = Network.from_spec(two_cavity_spec())
    state = normalize_superposition([1, 1], [[1.0, 0.5], [-1.0, 0.5]])
    ev0 = evolve_coherent(state, net.propagator(0.0))
    for m in (0, 1):
        assert recurrence_probability(ev0, m) == pytest.approx(reduce_coherent(ev0, [m]).purity, abs=1e-13)


@pytest.mark.parametrize("t", [0.5, 3.0, 11.0])
def test_single_branch_recurrence_formula(t):
    net = Network.from_spec(two_cavity_spec())
    beta = np.array([0.8 - 0.3j, 0.0])
    ev = evolve_coherent(normalize_superposition([1], [beta]), net.propagator(t))
    theta = net.propagator(t).theta
    direct = abs(coherent_overlap([ev.labels[0, 0]], [beta[0]])) ** 2
    assert recurrence_probability(ev, 0) == pytest.approx(direct, rel=1e-12)
    assert direct == pytest.approx(np.exp(-abs(beta[0]) ** 2 * abs(1 - theta[0, 0]) ** 2), rel=1e-12)


def test_symmetric_triple_revives_source():
    lam = 0.1
    net = lossless("symmetric", 3, 1.0, lam)
    state = normalize_superposition([1, 1], [[1.0, 0, 0], [-1.0, 0, 0]])
    # normal-mode frequencies 1 - lam (twice) and 1 + 2 lam beat with period 2 pi / (3 lam)
    ev = evolve_coherent(state, net.propagator(2 * np.pi / (3 * lam)))
    assert recurrence_probability(ev, 0) == pytest.approx(1.0, abs=1e-9)


def test_transfer_starts_at_vacuum_overlap():
    net = Network.from_spec(two_cavity_spec())
    b = 0.9 + 0.4j
    ev = evolve_coherent(normalize_superposition([1], [[b, 0]]), net.propagator(0.0))
    assert transfer_probability(ev, 0, 1) == pytest.approx(np.exp(-abs(b) ** 2), rel=1e-13)
    with pytest.raises(ValidationError):
        transfer_probability(ev, 0, 0)


def test_uncoupled_transfer_is_constant():
    net = Network.from_spec(two_cavity_spec(lam=0.0))
    state = normalize_superposition([1, 1], [[1.2, 0], [-1.2, 0]])
    values = [transfer_probability(evolve_coherent(state, net.propagator(t)), 0, 1) for t in (0, 1, 7, 30)]
    assert np.allclose(values, values[0], atol=1e-14)


def test_lossless_transfer_completes_when_phases_align():
    lam = 0.1
    net = Network.from_spec(two_cavity_spec(omega=(1.1, 1.1), lam=lam, gammas=(0.0, 0.0)))
    state = normalize_superposition([1], [[1.0, 0]])
    ev = evolve_coherent(state, net.propagator(np.pi / (2 * lam)))
    assert transfer_probability(ev, 0, 1) >= 1 - 1e-9


# --- decoherence ---------------------------------------------------------------

def test_lossless_decoherence_factors_have_unit_magnitude():
    net = lossless("circular", 4)
    state = normalize_superposition([1, 1, 1], [[1, 0, 0, 0], [0, 1j, 0, 0], [-0.5, 0, 0.5, 0]])
    table = decoherence_coefficients(evolve_coherent(state, net.propagator(6.0)))
    assert np.allclose(table.magnitude, 1.0, atol=1e-12)
    assert table.pairs() == [(0, 1), (0, 2), (1, 2)]


@pytest.mark.parametrize("t", [0.5, 2.0, 9.0])
def test_single_cavity_cat_factor(t):
    g, b = 0.2, 1.3
    net = single(g)
    table = decoherence_coefficients(evolve_coherent(normalize_superposition([1, 1], [[b], [-b]]),
                                                     net.propagator(t)))
    assert table.real[0, 1] == pytest.approx(np.exp(-2 * b * b * (1 - np.exp(-g * t))), rel=1e-12)
    assert abs(table.factor[0, 1].imag) < 1e-13


def test_long_time_factor_floor():
    b = 1.1
    table = decoherence_coefficients(evolve_coherent(normalize_superposition([1, 1], [[b], [-b]]),
                                                     single(0.5).propagator(200.0)))
    assert table.magnitude[0, 1] == pytest.approx(np.exp(-2 * b * b), rel=1e-12)


def test_decoherence_needs_two_branches_on_the_full_state():
    net = Network.from_spec(two_cavity_spec())
    with pytest.raises(ValidationError):
        decoherence_coefficients(evolve_coherent(normalize_superposition([1], [[1.0, 0]]), net.propagator(1.0)))
    ev = evolve_coherent(normalize_superposition([1, 1], [[1.0, 0], [-1.0, 0]]), net.propagator(1.0))
    with pytest.raises(ValidationError):
        decoherence_coefficients(reduce_coherent(ev, [0]))


def test_purity_is_not_monotone_under_loss():
    # a damped cat first mixes, then relaxes to the pure vacuum; only purity <= 1 holds in general
    net = Network.from_spec(two_cavity_spec())
    purity = np.array([evolve_coherent(CAT2, net.propagator(t)).purity for t in np.linspace(0, 200, 401)])
    assert np.all(purity <= 1 + 1e-9)
    assert purity.min() < 0.75
    assert np.max(np.diff(purity)) > 1e-3
    assert purity[-1] == pytest.approx(1.0, abs=1e-5)


# --- continuum superposition ---------------------------------------------------

def test_phase_averaged_coherent_state_is_one_photon():
    # int e^{-i th} |b e^{i th}> dth keeps only the n = 1 Fock component
    state = continuum_superposition(lambda th: np.exp(-1j * th), lambda th: [0.8 * np.exp(1j * th)], nodes=64)
    rho = initial_expansion(state).density_matrix(12).data
    target = np.zeros(12)
    target[1] = 1.0
    assert trace_distance(rho, np.outer(target, target)) < 1e-10


# --- properties ----------------------------------------------------------------

def random_network(rng, n):
    omega = rng.uniform(0.8, 1.2, n)
    kind = "linear" if n < 3 else rng.choice(["linear", "circular", "symmetric", "central"])
    spec = generate_topology(str(kind), n, omega, float(rng.uniform(0.02, 0.15))) if n > 1 else \
        NetworkSpec((OscillatorSpec(1, float(omega[0])),))
    b = rng.normal(size=(n, n)) * 0.15
    return build_hd(np.diag(omega) if n == 1 else Network.from_spec(spec).H, b @ b.T)


def random_state(rng, n, q, scale):
    lam = rng.normal(size=q) + 1j * rng.normal(size=q)
    beta = (rng.normal(size=(q, n)) + 1j * rng.normal(size=(q, n))) * scale
    return normalize_superposition(lam, beta)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 4), st.floats(0, 20))
def test_trace_hermiticity_and_purity_bounds(seed, n, q, t):
    rng = np.random.default_rng(seed)
    dm = random_network(rng, n)
    state = random_state(rng, n, q, 0.7)
    ev = evolve_coherent(state, propagator(dm, t))
    g = ev.gram()
    assert ev.trace == pytest.approx(1.0, abs=1e-10)
    assert np.max(np.abs(ev.weights - ev.weights.conj().T)) < 1e-10 * max(1.0, np.max(np.abs(ev.weights)))
    assert np.max(np.abs(g - g.conj().T)) < 1e-12
    assert ev.purity <= 1 + 1e-10
    for m in range(n):
        red = reduce_coherent(ev, [m])
        assert red.trace == pytest.approx(1.0, abs=1e-10) and red.purity <= 1 + 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 3), st.floats(0, 2 * np.pi), st.floats(0, 15))
def test_global_phase_leaves_probabilities_unchanged(seed, n, phi, t):
    rng = np.random.default_rng(seed)
    dm = random_network(rng, n)
    state = random_state(rng, n, 2, 0.6)
    turned = normalize_superposition(state.amplitudes * np.exp(1j * phi), state.labels)
    a = evolve_coherent(state, propagator(dm, t))
    b = evolve_coherent(turned, propagator(dm, t))
    assert recurrence_probability(a, 0) == pytest.approx(recurrence_probability(b, 0), abs=1e-12)
    assert transfer_probability(a, 0, 1) == pytest.approx(transfer_probability(b, 0, 1), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.floats(0, 10))
def test_overlap_trace_matches_dense_matrices(seed, n, t):
    rng = np.random.default_rng(seed)
    dm = random_network(rng, n)
    a = evolve_coherent(random_state(rng, n, 2, 0.3), propagator(dm, t))
    b = evolve_coherent(random_state(rng, n, 2, 0.3), propagator(dm, 0.5 * t))
    cutoff = {1: 25, 2: 16, 3: 12}[n]
    da, db = a.density_matrix(cutoff).data, b.density_matrix(cutoff).data
    assert overlap_trace(a, b) == pytest.approx(float(np.real(np.trace(da @ db))), abs=1e-6)


# cutoffs and amplitudes shrink with N so the dense oracle stays under its dimension bound
ORACLE_SIZES = {1: (25, 1.5), 2: (16, 1.0), 3: (9, 0.5)}


@pytest.mark.slow
@settings(max_examples=6, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 3))
def test_closed_form_matches_oracle_on_random_networks(seed, n, q):
    cutoff, bound = ORACLE_SIZES[n]
    rng = np.random.default_rng(seed)
    dm = random_network(rng, n)
    lam = rng.normal(size=q) + 1j * rng.normal(size=q)
    beta = rng.uniform(-bound, bound, (q, n)) * np.exp(1j * rng.uniform(0, 2 * np.pi, (q, n))) / np.sqrt(2)
    state = normalize_superposition(lam, beta)
    gamma = 2 * dm.hd.real
    h = dm.hd.imag
    gen = LindbladGenerator(h, gamma, cutoff)
    rho0 = initial_expansion(state).density_matrix(cutoff)
    run = integrate(gen, rho0, 3.0, dt=0.1, sample_times=[1.0, 3.0])
    for t in (1.0, 3.0):
        closed = evolve_coherent(state, propagator(dm, t)).density_matrix(cutoff).data
        assert trace_distance(closed, run.at(t).data) <= 1e-6
