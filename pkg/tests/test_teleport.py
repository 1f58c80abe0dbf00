import numpy as np
import pytest

from opteleport import linalg as la
from opteleport.algebra import StarAlgebra, Trace
from opteleport.bases import (
    PimsnerPopaBasis,
    homogeneous_block_basis,
    shift_basis,
    shift_unitary,
    verify_basis,
    weyl_basis,
)
from opteleport.errors import HypothesisError, PreconditionError, SchemeError
from opteleport.inclusion import diagonal_in_full, markov_inclusion, trivial_in_full
from opteleport.teleport import (
    Channel,
    TeleportationContext,
    TeleportationScheme,
    classify,
    commutant_trace_is_markov,
    correction_unitaries,
    direct_sum_scheme,
    extract_tight_scheme,
    standard_scheme,
    tight_scheme_from_basis,
    unbiased_scheme,
    verify_scheme,
)

from conftest import get_tower


def tower_basis(key, make):
    t = get_tower(key)
    b = make()
    b.inclusion = t.inclusion
    verify_basis(t, b)
    return t, b


# -- standard scheme ---------------------------------------------------------


def test_standard_scheme_n2():
    s = standard_scheme(2)
    rep = verify_scheme(s)
    assert rep.passed
    assert rep.checks[-1].name == "teleportation_identity"
    assert rep.checks[-1].residual < 1e-10
    flags = classify(s)
    assert flags.tight and flags.unbiased and flags.faithful and flags.minimal
    assert flags.unbiased_value == pytest.approx(0.25)


def test_standard_scheme_n3():
    s = standard_scheme(3)
    rep = verify_scheme(s)
    assert rep.passed and rep.checks[-1].residual < 1e-10
    flags = classify(s)
    assert flags.tight and flags.unbiased and flags.faithful and flags.minimal
    assert flags.unbiased_value == pytest.approx(1 / 9)
    assert s.outcomes == 9


def test_standard_scheme_n1_trivial():
    s = standard_scheme(1)
    assert verify_scheme(s).passed
    assert s.outcomes == 1


def test_trivial_context_teleports_scalars():
    # A0 = C: any POVM together with identity channels teleports scalars
    amb = StarAlgebra.full(2)
    triv = StarAlgebra.trivial(2)
    ctx = TeleportationContext(
        ambient=amb,
        trace=Trace.normalized(amb),
        alice=amb,
        bob=triv,
        teleported=triv,
        mirror=triv,
        shift_pairs=[(np.eye(2, dtype=complex), np.eye(2, dtype=complex))],
    )
    povm = [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)]
    channels = [Channel(lambda x: x, label="id")] * 2
    scheme = TeleportationScheme(ctx, np.eye(2, dtype=complex), povm, channels)
    rep = verify_scheme(scheme)
    assert rep.passed and rep.checks[-1].residual < 1e-12


def test_corrupted_povm_flags_failure_without_error():
    s = standard_scheme(2)
    s.povm[0] = 1.01 * s.povm[0]
    rep = verify_scheme(s, strict=False)
    assert not rep.passed
    names = [c.name for c in rep.failures()]
    assert "povm_sums_to_identity" in names
    with pytest.raises(SchemeError):
        verify_scheme(s, strict=True)


# -- direct sum scheme -------------------------------------------------------


def test_direct_sum_scheme_direct_sum_algebra():
    m = StarAlgebra.block_diagonal([(1, 1), (2, 1)])
    s = direct_sum_scheme(m)
    rep = verify_scheme(s)
    assert rep.passed
    assert s.outcomes == 5 == m.dim
    flags = classify(s)
    assert flags.tight and flags.minimal
    assert not flags.unbiased
    assert not flags.faithful
    assert flags.witness is not None and abs(flags.witness["probability"]) < 1e-12


def test_direct_sum_zero_probability_for_wrong_summand():
    # a density supported in one summand is never seen by the other blocks'
    # outcomes: tr(F rho omega) = 0 there
    m = StarAlgebra.block_diagonal([(1, 1), (2, 1)])
    s = direct_sum_scheme(m)
    ctx = s.context
    # density living entirely in the M_2 summand of the teleported copy
    t = get_tower("scalars_in_direct_sum")
    lift = lambda x: t.gns1.left(t.gns.left(x))
    z2 = m.central_projections[1]
    rho = lift(z2) / ctx.trace(lift(z2)).real
    # outcome 0 is the scalar block's single outcome
    val = ctx.trace(s.povm[0] @ rho @ s.omega)
    assert abs(val) < 1e-12
    # and the scalar-block density never triggers the M_2 outcomes
    z1 = m.central_projections[0]
    rho1 = lift(z1) / ctx.trace(lift(z1)).real
    for f in s.povm[1:]:
        assert abs(ctx.trace(f @ rho1 @ s.omega)) < 1e-12


def test_direct_sum_single_block_matches_unbiased_weyl():
    # for a full matrix algebra the direct-sum scheme and the unbiased
    # scheme from the clock-and-shift basis coincide operator by operator
    t = get_tower("trivial_in_full_2")
    b = weyl_basis(2)
    b.inclusion = t.inclusion
    verify_basis(t, b)
    s_ds = direct_sum_scheme(StarAlgebra.full(2))
    s_ub = unbiased_scheme(t, b)
    assert la.frobenius_distance(s_ds.omega, s_ub.omega) < 1e-9
    assert len(s_ds.povm) == len(s_ub.povm)
    for f, g in zip(s_ds.povm, s_ub.povm):
        assert la.frobenius_distance(f, g) < 1e-9
    for ch_a, ch_b in zip(s_ds.channels, s_ub.channels):
        for x in s_ub.context.bob.basis:
            assert la.frobenius_distance(ch_a(x), ch_b(x)) < 1e-9


def test_direct_sum_resource_is_scaled_second_jones():
    m = StarAlgebra.block_diagonal([(1, 1), (2, 1)])
    s = direct_sum_scheme(m)
    t = get_tower("scalars_in_direct_sum")
    assert la.frobenius_distance(s.omega, 5.0 * t.jones2) < 1e-10


# -- unbiased scheme ---------------------------------------------------------


@pytest.mark.parametrize(
    "key,make",
    [
        ("diagonal_in_full_2", lambda: shift_basis(2)),
        ("diagonal_in_full_3", lambda: shift_basis(3)),
        ("homogeneous_2_2", lambda: homogeneous_block_basis(2, 2)),
    ],
)
def test_unbiased_scheme_cases(key, make):
    t, b = tower_basis(key, make)
    s = unbiased_scheme(t, b)
    rep = verify_scheme(s)
    assert rep.passed, [c.name for c in rep.failures()]
    assert rep.checks[-1].residual < 1e-9
    flags = classify(s)
    assert flags.unbiased
    assert flags.unbiased_value == pytest.approx(1.0 / t.index)
    assert flags.faithful
    # direct operator form of unbiasedness
    exp = s.context.expectation
    unit = s.context.teleported.unit
    for f in s.povm:
        assert la.frobenius_distance(exp(s.omega @ f), unit / s.outcomes) < 1e-9


def test_unbiased_povm_is_pvm():
    t, b = tower_basis("diagonal_in_full_2", lambda: shift_basis(2))
    s = unbiased_scheme(t, b)
    for i, p in enumerate(s.povm):
        assert la.is_projection(p)
        for q in s.povm[i + 1 :]:
            assert np.linalg.norm(p @ q) < 1e-10


def test_correction_unitaries_identity_element():
    # phi is unital, so the basis element 1 yields the identity correction
    alg = StarAlgebra.full(2)
    inc = markov_inclusion(alg, alg)
    from opteleport.tower import basic_construction, iterate

    t = iterate(basic_construction(inc))
    b = PimsnerPopaBasis(inc, [np.eye(2, dtype=complex)])
    verify_basis(t, b)
    vs, rep = correction_unitaries(t, b)
    assert rep.passed
    assert la.frobenius_distance(vs[0], np.eye(t.gns1.dim)) < 1e-9


def test_correction_unitaries_reports():
    for key, make in (
        ("trivial_in_full_2", lambda: weyl_basis(2)),
        ("diagonal_in_full_2", lambda: shift_basis(2)),
    ):
        t, b = tower_basis(key, make)
        vs, rep = correction_unitaries(t, b)
        assert rep.passed, (key, [c.name for c in rep.failures()])
        for v in vs:
            assert la.is_unitary(v)


def test_correction_unitaries_require_flags():
    t, b = tower_basis("diagonal_in_full_2", lambda: shift_basis(2))
    bad = PimsnerPopaBasis(t.inclusion, b.elements)
    bad.orthonormal, bad.unitary, bad.in_normaliser = True, True, False
    with pytest.raises(PreconditionError):
        correction_unitaries(t, bad)


# -- rigidity ----------------------------------------------------------------


def test_commutant_trace_gate_cases():
    assert commutant_trace_is_markov(trivial_in_full(2))[0]
    assert commutant_trace_is_markov(diagonal_in_full(2))[0]
    tensor_factor = markov_inclusion(
        StarAlgebra.from_generators(
            [np.kron(np.eye(2, dtype=complex), np.array([[0, 1], [0, 0]], dtype=complex))], 4
        ),
        StarAlgebra.full(4),
    )
    assert commutant_trace_is_markov(tensor_factor)[0]
    homog = markov_inclusion(StarAlgebra.block_diagonal([(2, 1), (2, 1)]), StarAlgebra.full(4))
    assert commutant_trace_is_markov(homog)[0]
    mixed = markov_inclusion(StarAlgebra.block_diagonal([(1, 1), (2, 1)]), StarAlgebra.full(3))
    assert not commutant_trace_is_markov(mixed)[0]


def test_tight_scheme_collapses_to_standard_for_scalars():
    inc = trivial_in_full(2)
    b = weyl_basis(2)
    b.inclusion = inc
    s = tight_scheme_from_basis(inc, b)
    std = standard_scheme(2)
    assert la.frobenius_distance(s.omega, std.omega) < 1e-10
    for f, g in zip(s.povm, std.povm):
        assert la.frobenius_distance(f, g) < 1e-10


def test_tight_scheme_verifies_and_classifies():
    inc = diagonal_in_full(2)
    b = shift_basis(2)
    b.inclusion = inc
    s = tight_scheme_from_basis(inc, b)
    rep = verify_scheme(s)
    assert rep.passed and rep.checks[-1].residual < 1e-9
    flags = classify(s)
    assert flags.tight and flags.minimal and flags.faithful


def test_tight_scheme_with_dressing():
    inc = trivial_in_full(2)
    b = weyl_basis(2)
    b.inclusion = inc
    x_pauli = np.array([[0, 1], [1, 0]], dtype=complex)
    s = tight_scheme_from_basis(inc, b, u=x_pauli)
    assert verify_scheme(s).passed


def test_tight_scheme_gate_failure():
    inc = markov_inclusion(StarAlgebra.block_diagonal([(1, 1), (2, 1)]), StarAlgebra.full(3))
    b = PimsnerPopaBasis(inc, [np.eye(3, dtype=complex)])
    with pytest.raises(HypothesisError):
        tight_scheme_from_basis(inc, b)


def test_tight_scheme_rejects_bad_z():
    inc = diagonal_in_full(2)
    b = shift_basis(2)
    b.inclusion = inc
    with pytest.raises(PreconditionError):
        tight_scheme_from_basis(inc, b, z=np.diag([2.0, 0.0]).astype(complex))


@pytest.mark.parametrize(
    "case",
    ["pauli_plain", "pauli_dressed", "diag_shift_dressed"],
)
def test_extraction_round_trip(case):
    if case == "pauli_plain":
        inc, b, u, z = trivial_in_full(2), weyl_basis(2), None, None
    elif case == "pauli_dressed":
        inc, b = trivial_in_full(2), weyl_basis(2)
        u, z = np.array([[0, 1], [1, 0]], dtype=complex), None
    else:
        inc, b = diagonal_in_full(2), shift_basis(2)
        u, z = shift_unitary(2), np.diag([1.2, 0.8]).astype(complex)
    b.inclusion = inc
    s = tight_scheme_from_basis(inc, b, u=u, z=z)
    basis, u_got, z_got, rep = extract_tight_scheme(s)
    assert rep.passed
    for c in rep.checks:
        if c.name.startswith("round_trip"):
            assert c.residual < 1e-8, c.name
    if z is not None:
        assert la.frobenius_distance(z_got, z) < 1e-9


def test_extraction_from_standard_recovers_paulis_up_to_phase():
    s = standard_scheme(2)
    basis, u, z, rep = extract_tight_scheme(s)
    assert rep.passed
    assert la.frobenius_distance(z, np.eye(2)) < 1e-9
    for got, want in zip(basis.elements, weyl_basis(2).elements):
        overlap = abs(np.trace(la.dagger(got) @ want))
        assert abs(overlap - 2.0) < 1e-9


def test_extraction_requires_flags():
    m = StarAlgebra.block_diagonal([(1, 1), (2, 1)])
    s = direct_sum_scheme(m)  # not faithful, and not in tripartite form
    with pytest.raises(PreconditionError):
        extract_tight_scheme(s)


# -- cross-checks on classification ------------------------------------------


def test_unbiasedness_both_formulations():
    # operator form E(omega F) = 1/|I| versus sampled densities
    s = standard_scheme(2)
    ctx = s.context
    exp = ctx.expectation
    rng = np.random.default_rng(3)
    for f in s.povm:
        g = exp(s.omega @ f)
        assert la.frobenius_distance(g, ctx.teleported.unit / 4) < 1e-10
        for _ in range(25):
            raw = ctx.teleported.project(la.random_density(8, rng))
            raw = (raw + la.dagger(raw)) / 2
            rho = raw / ctx.trace(raw).real
            assert abs(ctx.trace(f @ rho @ s.omega) - 0.25) < 1e-9


def test_standard_scheme_rejects_non_orthonormal_basis():
    inc = trivial_in_full(2)
    bad = PimsnerPopaBasis(inc, [np.eye(2, dtype=complex)] * 4)
    with pytest.raises(PreconditionError):
        standard_scheme(2, bad)


def test_direct_sum_scheme_diagonal_algebra():
    s = direct_sum_scheme(StarAlgebra.diagonal(2))
    rep = verify_scheme(s)
    assert rep.passed
    assert s.outcomes == 2
    flags = classify(s)
    assert flags.tight and flags.minimal


def test_extraction_fails_on_non_automorphism_channel():
    from opteleport.errors import ExtractionError

    inc = diagonal_in_full(2)
    b = shift_basis(2)
    b.inclusion = inc
    s = tight_scheme_from_basis(inc, b)
    # replace one correction with a genuinely non-automorphic UCP map
    dim = s.context.ambient.ambient_dim
    depolarise = Channel(
        lambda x: 0.5 * x + 0.5 * np.trace(x) / dim * np.eye(dim, dtype=complex),
        label="depolarise",
    )
    s.channels[1] = depolarise
    with pytest.raises(ExtractionError):
        extract_tight_scheme(s)


def test_extraction_round_trip_n3():
    # beyond the acceptance cases: the full machinery at qutrit scale
    basis, u, z, rep = extract_tight_scheme(standard_scheme(3))
    assert rep.passed and basis.size == 9
    inc = diagonal_in_full(3)
    b = shift_basis(3)
    b.inclusion = inc
    zc = np.diag([1.5, 0.9, 0.6]).astype(complex)
    s = tight_scheme_from_basis(inc, b, u=shift_unitary(3), z=zc)
    _, _, z_got, rep2 = extract_tight_scheme(s)
    assert rep2.passed
    assert la.frobenius_distance(z_got, zc) < 1e-9


def test_unbiased_scheme_depth_one_is_tight():
    # N = 1 (x) M_2 in M_4 with the tensor clock-and-shift family: the
    # relative commutant is a full factor of dimension [M:N], so this
    # unbiased scheme is also tight
    from opteleport.tower import basic_construction, iterate, verify_tower

    nil = np.array([[0, 1], [0, 0]], dtype=complex)
    small = StarAlgebra.from_generators([np.kron(np.eye(2, dtype=complex), nil)], 4)
    inc = markov_inclusion(small, StarAlgebra.full(4))
    tower = iterate(basic_construction(inc))
    basis = PimsnerPopaBasis(
        inc, [np.kron(u, np.eye(2, dtype=complex)) for u in weyl_basis(2).elements]
    )
    rep = verify_basis(tower, basis)
    assert rep.passed and basis.orthonormal and basis.in_normaliser
    scheme = unbiased_scheme(tower, basis)
    assert verify_scheme(scheme).passed
    flags = classify(scheme)
    assert flags.unbiased and flags.unbiased_value == pytest.approx(0.25)
    assert flags.tight  # depth-one: outcomes match the teleported dimension


def test_rigidity_round_trip_subsystem_code():
    # hybrid-code style factor N = 1 (x) M_2 in M_4; both N and its
    # commutant are homogeneous so the trace gate passes
    from opteleport.bases import commutant_factor_basis

    nil = np.array([[0, 1], [0, 0]], dtype=complex)
    small = StarAlgebra.from_generators([np.kron(np.eye(2, dtype=complex), nil)], 4)
    inc = markov_inclusion(small, StarAlgebra.full(4))
    b = commutant_factor_basis(inc)
    s = tight_scheme_from_basis(inc, b)
    assert verify_scheme(s).passed
    basis, u, z, rep = extract_tight_scheme(s)
    assert rep.passed
    assert basis.size == 4
