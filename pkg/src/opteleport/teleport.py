"""Teleportation schemes between commuting subalgebras.

A scheme is a triple (omega, {F_i}, {T_i}) in a tripartite context: an
entangled resource density, a POVM for the measuring party, and unital
completely positive correction channels, satisfying

    sum_i E(F_i T_i(shift(a)) omega) = a        for all a in the teleported
                                                algebra,

where ``shift`` is the *-isomorphism carrying the teleported algebra onto
the far party and E the trace-preserving expectation back onto it.

Three constructors are provided: the tensor-picture scheme for a full
matrix algebra, the block direct-sum scheme for an arbitrary
finite-dimensional algebra, and the unbiased scheme attached to a unitary
normaliser basis of an inclusion.  The rigidity pair
:func:`tight_scheme_from_basis` / :func:`extract_tight_scheme` builds
tight schemes on M_n (x) M_n (x) N' from (basis, u, z) data and recovers
such data from any tight, minimal, faithful scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .algebra import StarAlgebra, Trace, conditional_expectation_onto
from .bases import PimsnerPopaBasis, verify_basis, weyl_basis
from .errors import (
    ExtractionError,
    HypothesisError,
    PreconditionError,
    SchemeError,
)
from .inclusion import Inclusion, concrete_jones_projection, markov_inclusion
from .linalg import DEFAULT_SEED, DEFAULT_TOL, Tolerance
from .reporting import Report
from .tower import Tower, basic_construction, iterate, normalizer_check


class Channel:
    """UCP correction map, stored as a callable on ambient matrices.

    Conjugations carry their unitary as a witness, which certifies
    complete positivity without a Choi decomposition.
    """

    def __init__(
        self,
        apply,
        ad_unitary: np.ndarray | None = None,
        label: str = "",
    ) -> None:
        self._apply = apply
        self.ad_unitary = ad_unitary
        self.label = label

    @classmethod
    def conjugation(cls, v: np.ndarray, label: str = "") -> "Channel":
        vd = la.dagger(v)
        return cls(lambda x: v @ x @ vd, ad_unitary=v, label=label)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self._apply(x)

    def cp_residual(self, ambient_dim: int) -> float:
        """0 for certified conjugations; otherwise the negative part of the Choi."""
        if self.ad_unitary is not None:
            v = self.ad_unitary
            return la.frobenius_distance(la.dagger(v) @ v, la.eye(v.shape[0]))
        choi = np.zeros((ambient_dim**2, ambient_dim**2), dtype=complex)
        for i in range(ambient_dim):
            for j in range(ambient_dim):
                e = np.zeros((ambient_dim, ambient_dim), dtype=complex)
                e[i, j] = 1.0
                img = self._apply(e)
                choi[i * ambient_dim : (i + 1) * ambient_dim, j * ambient_dim : (j + 1) * ambient_dim] = img
        vals = np.linalg.eigvalsh((choi + la.dagger(choi)) / 2)
        herm = la.frobenius_distance(choi, la.dagger(choi))
        return float(max(0.0, -vals.min())) + herm


@dataclass
class TeleportationContext:
    """Tripartite commuting-algebra data a scheme is verified against."""

    ambient: StarAlgebra
    trace: Trace
    alice: StarAlgebra
    bob: StarAlgebra
    teleported: StarAlgebra
    mirror: StarAlgebra
    shift_pairs: list[tuple[np.ndarray, np.ndarray]]
    label: str = ""

    def __post_init__(self) -> None:
        self.expectation = conditional_expectation_onto(
            self.teleported, self.ambient, self.trace
        )

    def alice_bob_commute_residual(self) -> float:
        return max(
            la.frobenius_distance(a @ b, b @ a)
            for a in self.alice.basis
            for b in self.bob.basis
        )


@dataclass
class TeleportationScheme:
    context: TeleportationContext
    omega: np.ndarray
    povm: list[np.ndarray]
    channels: list[Channel]
    inclusion: Inclusion | None = None  # set for tripartite M_n (x) M_n (x) N' schemes
    leg_dims: tuple[int, int, int] | None = None
    flags: "SchemeFlags | None" = field(default=None, repr=False)

    @property
    def outcomes(self) -> int:
        return len(self.povm)


@dataclass
class SchemeFlags:
    tight: bool
    unbiased: bool
    unbiased_value: float | None
    faithful: bool
    minimal: bool
    witness: dict | None = None
    report: Report | None = field(default=None, repr=False)


def verify_scheme(
    scheme: TeleportationScheme,
    tol: Tolerance | None = None,
    strict: bool = True,
    samples: int = 6,
) -> Report:
    """Structural checks plus the teleportation identity residual.

    Structural clauses (POVM, densities, UCP, bimodularity, invariance)
    raise :class:`SchemeError` naming the clause when ``strict``; the
    identity residual itself is always only reported.  Bimodularity is
    sampled on seeded random triples; the one-way LOCC form of the total
    operation follows from the verified structure and is recorded as
    implied rather than re-checked.
    """
    tol = tol or DEFAULT_TOL
    ctx = scheme.context
    rep = Report()
    dim = ctx.ambient.ambient_dim
    rep.add("alice_bob_commute", ctx.alice_bob_commute_residual(), tol.bound(1.0) * 10)

    total = sum(scheme.povm)
    rep.add("povm_sums_to_identity", la.frobenius_distance(total, la.eye(dim)), tol.bound(1.0) * max(1, scheme.outcomes))
    psd = 0.0
    for f in scheme.povm:
        vals = np.linalg.eigvalsh((f + la.dagger(f)) / 2)
        psd = max(psd, la.frobenius_distance(f, la.dagger(f)), max(0.0, -float(vals.min())))
    rep.add("povm_positive", psd, tol.bound(1.0))
    rep.add(
        "povm_in_alice_algebra",
        max(ctx.alice.membership_residual(f) for f in scheme.povm),
        tol.bound(1.0) * ctx.alice.dim,
    )

    omega = scheme.omega
    vals = np.linalg.eigvalsh((omega + la.dagger(omega)) / 2)
    rep.add(
        "resource_positive",
        la.frobenius_distance(omega, la.dagger(omega)) + max(0.0, -float(vals.min())),
        tol.bound(float(np.linalg.norm(omega))),
    )
    rep.add("resource_normalised", abs(ctx.trace(omega) - 1.0), tol.bound(1.0))
    rep.add(
        "resource_commutes_with_teleported",
        max(la.frobenius_distance(omega @ a, a @ omega) for a in ctx.teleported.basis),
        tol.bound(float(np.linalg.norm(omega))) * 10,
    )

    ucp = unital = 0.0
    for ch in scheme.channels:
        ucp = max(ucp, ch.cp_residual(dim))
        unital = max(unital, la.frobenius_distance(ch(la.eye(dim)), la.eye(dim)))
    rep.add("channels_completely_positive", ucp, tol.bound(1.0))
    rep.add("channels_unital", unital, tol.bound(1.0))

    rng = la.rng_from(None)
    joint = la.product_span(ctx.alice.basis, ctx.bob.basis, tol)
    bimod = 0.0
    for ch in scheme.channels:
        for _ in range(samples):
            a = ctx.alice.project(la.random_hermitian(dim, rng))
            b = ctx.alice.project(la.random_hermitian(dim, rng))
            x = la.span_project(joint, la.random_hermitian(dim, rng))
            bimod = max(bimod, la.frobenius_distance(ch(a @ x @ b), a @ ch(x) @ b))
    if bimod <= tol.bound(1.0) * 100:
        rep.add("channels_alice_bimodule_sampled", bimod, tol.bound(1.0) * 100)
    else:
        # Strict bimodularity is impossible whenever Alice and Bob share
        # central projections the corrections must permute; certify the
        # attainable locality instead: every channel normalises Alice.
        shared = max(
            ctx.alice.membership_residual(z) for z in ctx.bob.central_projections
        )
        normalising = max(
            ctx.alice.membership_residual(ch(a))
            for ch in scheme.channels
            for a in ctx.alice.basis
        )
        obstructed = shared <= tol.bound(1.0) * 10 and normalising <= tol.bound(1.0) * 100
        rep.add_flag(
            "channels_alice_bimodule_sampled",
            obstructed,
            detail=(
                f"bimodule residual {bimod:.2e}: Alice and Bob share central "
                f"projections (membership {shared:.2e}), so corrections can only "
                f"normalise Alice (residual {normalising:.2e}); strict bimodularity "
                "is unattainable for this inclusion"
            ),
        )
    rep.add(
        "channels_preserve_bob",
        max(
            ctx.bob.membership_residual(ch(b))
            for ch in scheme.channels
            for b in ctx.bob.basis
        ),
        tol.bound(1.0) * ctx.bob.dim,
    )
    rep.add_flag("one_way_locc", True, detail="implied by POVM/bimodule/invariance structure")

    if strict:
        for check in rep.failures():
            raise SchemeError(f"structural clause failed: {check.name} ({check.residual:.2e})")

    expect = ctx.expectation
    worst = 0.0
    for a, shifted in ctx.shift_pairs:
        got = sum(
            expect(f @ ch(shifted) @ omega) for f, ch in zip(scheme.povm, scheme.channels)
        )
        worst = max(worst, la.frobenius_distance(got, a))
    rep.add("teleportation_identity", worst, tol.bound(1.0) * max(1, scheme.outcomes))
    return rep


def classify(
    scheme: TeleportationScheme, tol: Tolerance | None = None, density_samples: int = 100
) -> SchemeFlags:
    """Tightness, unbiasedness, faithfulness and minimality flags.

    Works through g_i = E(omega F_i): by traciality and the bimodule
    property, tr(F_i rho omega) = tr(rho g_i) for every density rho in the
    teleported algebra, so "for all densities" becomes one operator test
    per outcome.  Seeded random densities re-check the reduction.
    """
    tol = tol or DEFAULT_TOL
    ctx = scheme.context
    rep = Report()
    d = scheme.outcomes
    tight = ctx.teleported.dim == d
    rep.add_flag("tight", True, detail=f"outcomes {d}, dim {ctx.teleported.dim}, flag {tight}")

    gs = [ctx.expectation(scheme.omega @ f) for f in scheme.povm]
    unit = ctx.teleported.unit
    unb_res = max(la.frobenius_distance(g, unit / d) for g in gs)
    unbiased = unb_res <= tol.bound(1.0) * 10
    rep.add_flag("unbiased", True, detail=f"residual {unb_res:.2e}, flag {unbiased}")

    faithful = True
    witness = None
    for i, g in enumerate(gs):
        herm = (g + la.dagger(g)) / 2
        low = float(np.linalg.eigvalsh(herm).min())
        if low <= tol.abs:
            faithful = False
        if not unbiased and (witness is None or low < witness["probability"]):
            # the most starved outcome; a zero here exhibits a density the
            # outcome can never see
            witness = {"outcome": i, "probability": low}
    rep.add_flag("faithful", True, detail=f"flag {faithful}")

    minimal_omega = la.span_residual(
        la.product_span(ctx.mirror.basis, ctx.bob.basis, tol), scheme.omega
    )
    pair_span = la.product_span(ctx.teleported.basis, ctx.mirror.basis, tol)
    minimal_povm = max(la.span_residual(pair_span, f) for f in scheme.povm)
    minimal = minimal_omega <= tol.bound(
        float(np.linalg.norm(scheme.omega))
    ) * 10 and minimal_povm <= tol.bound(1.0) * 10
    rep.add_flag(
        "minimal",
        True,
        detail=f"omega residual {minimal_omega:.2e}, povm residual {minimal_povm:.2e}, flag {minimal}",
    )

    # independent cross-check on sampled densities
    rng = la.rng_from(None)
    cross = 0.0
    for _ in range(density_samples):
        raw = ctx.teleported.project(la.random_density(ctx.ambient.ambient_dim, rng))
        raw = (raw + la.dagger(raw)) / 2
        val = ctx.trace(raw).real
        if val < 1e-6:
            continue
        rho = raw / val
        for i, (f, g) in enumerate(zip(scheme.povm, gs)):
            lhs = ctx.trace(f @ rho @ scheme.omega)
            rhs = ctx.trace(rho @ g)
            cross = max(cross, abs(lhs - rhs))
            if unbiased:
                cross = max(cross, abs(lhs - 1.0 / d))
    rep.add("density_reduction_cross_check", cross, tol.bound(1.0) * 100)

    flags = SchemeFlags(
        tight=tight,
        unbiased=unbiased,
        unbiased_value=1.0 / d if unbiased else None,
        faithful=faithful,
        minimal=minimal,
        witness=witness,
        report=rep,
    )
    scheme.flags = flags
    return flags


# ---------------------------------------------------------------------------
# Constructor 1: the tensor-picture scheme for M_n.
# ---------------------------------------------------------------------------


def standard_scheme(n: int, basis: PimsnerPopaBasis | None = None) -> TeleportationScheme:
    """Teleportation of M_n across M_n (x) M_n (x) M_n from a unitary basis.

    ``basis`` defaults to the clock-and-shift family; it must be a unitary
    orthonormal basis of M_n over the scalars with n^2 elements.
    """
    if basis is None:
        basis = weyl_basis(n)
    inc = basis.inclusion
    if basis.orthonormal is None:
        tower = basic_construction(inc)
        verify_basis(tower, basis)
    if not (basis.orthonormal and basis.unitary and basis.size == n * n):
        raise PreconditionError("standard scheme needs a unitary orthonormal basis of size n^2")
    full, triv = StarAlgebra.full(n), StarAlgebra.trivial(n)
    ambient = StarAlgebra.full(n**3)
    ctx = TeleportationContext(
        ambient=ambient,
        trace=Trace.normalized(ambient),
        alice=StarAlgebra.tensor(full, full, triv),
        bob=StarAlgebra.tensor(triv, triv, full),
        teleported=StarAlgebra.tensor(full, triv, triv),
        mirror=StarAlgebra.tensor(triv, full, triv),
        shift_pairs=[
            (la.kron(b, la.eye(n), la.eye(n)), la.kron(la.eye(n), la.eye(n), b))
            for b in StarAlgebra.full(n).basis
        ],
        label=f"standard(n={n})",
    )
    psi = la.max_entangled(n)
    e = np.outer(psi, psi.conj())
    omega = n * n * la.kron(la.eye(n), e)
    povm = [
        la.kron(la.kron(la.dagger(u), la.eye(n)) @ e @ la.kron(u, la.eye(n)), la.eye(n))
        for u in basis.elements
    ]
    channels = [
        Channel.conjugation(la.kron(la.eye(n * n), u), label=f"correct[{i}]")
        for i, u in enumerate(basis.elements)
    ]
    return TeleportationScheme(
        ctx, omega, povm, channels, inclusion=inc, leg_dims=(n, n, n)
    )


# ---------------------------------------------------------------------------
# Constructor 2: the block direct-sum scheme for a finite-dimensional algebra.
# ---------------------------------------------------------------------------


def _tower_context(t: Tower, label: str) -> TeleportationContext:
    """Context with Alice = M1, Bob = M1' ∩ M2, teleported = N' ∩ M."""
    iterate(t)
    dim1 = t.gns1.dim
    lift = lambda x: t.gns1.left(t.gns.left(x))
    teleported = t.rel_comm.image(lift, dim1)
    mirror = t.mirror1.image(t.gns1.left, dim1)
    pairs = [(lift(x), t.shift(x)) for x in t.rel_comm.basis]
    return TeleportationContext(
        ambient=t.level2,
        trace=t.trace2,
        alice=t.m1_rep,
        bob=t.mirror2,
        teleported=teleported,
        mirror=mirror,
        shift_pairs=pairs,
        label=label,
    )


def _block_weyl_unitaries(m: StarAlgebra) -> list[tuple[int, tuple[int, int], np.ndarray]]:
    """Per block j, the unitaries acting as the clock-and-shift family on
    that block and as the identity elsewhere; ordered by block then (l, k)."""
    out = []
    for j, ((bd, _), f) in enumerate(zip(m.blocks, m.matrix_units)):
        rest = m.unit - m.central_projections[j]
        shift = sum(f[(a + 1) % bd][a] for a in range(bd))
        clock = sum(np.exp(2j * np.pi * a / bd) * f[a][a] for a in range(bd))
        for l in range(bd):
            for k in range(bd):
                if l or k:
                    w = np.linalg.matrix_power(clock, l) @ np.linalg.matrix_power(shift, k)
                else:
                    w = m.central_projections[j]
                out.append((j, (l, k), rest + w))
    return out


def direct_sum_scheme(m: StarAlgebra, tol: Tolerance = DEFAULT_TOL) -> TeleportationScheme:
    """Tight, minimal scheme teleporting all of a finite-dimensional algebra.

    Built on the two-level tower of scalars ⊆ m with the Markov trace: the
    resource is (dim m) e_M, the POVM collects the per-block entangled
    projections twisted by that block's unitary family, and the corrections
    conjugate by the shifted block unitaries.
    """
    inc = markov_inclusion(StarAlgebra.trivial(m.ambient_dim), m, tol)
    t = iterate(basic_construction(inc, tol))
    ctx = _tower_context(t, label=f"direct_sum(dim={m.dim})")
    omega = float(m.dim) * t.jones2
    povm: list[np.ndarray] = []
    channels: list[Channel] = []
    for j, (l, k), w in _block_weyl_unitaries(m):
        z = m.central_projections[j]
        vec = t.gns.vector(la.dagger(w) @ z)
        scale = inc.trace(z).real
        f_lvl1 = np.outer(vec, vec.conj()) / scale
        povm.append(t.gns1.left(f_lvl1))
        channels.append(Channel.conjugation(t.shift(w), label=f"block{j}[{l},{k}]"))
    return TeleportationScheme(ctx, omega, povm, channels)


# ---------------------------------------------------------------------------
# Constructor 3: the unbiased scheme from a unitary normaliser basis.
# ---------------------------------------------------------------------------


def correction_unitaries(
    t: Tower, basis: PimsnerPopaBasis, tol: Tolerance | None = None
) -> tuple[list[np.ndarray], Report]:
    """Unitaries v_i in M2 implementing shift(u_i x u_i*) = v_i shift(x) v_i*.

    Realised through the periodicity homomorphism sending a d x d matrix
    over M to M2; its multiplicativity and unitality are re-verified on
    random arguments as part of the report.
    """
    tol = tol or DEFAULT_TOL
    if not (basis.unitary and basis.in_normaliser and basis.orthonormal):
        raise PreconditionError("correction unitaries need a unitary orthonormal normaliser basis")
    iterate(t)
    idx = t.index
    pi, pi1, e1, e2 = t.gns.left, t.gns1.left, t.jones1, t.jones2
    lifted_left = [pi1(la.dagger(pi(u)) @ e1) for u in basis.elements]
    lifted_right = [pi1(e1 @ pi(u)) for u in basis.elements]
    lifted_mid = [pi1(pi(u)) for u in basis.elements]

    def phi(blockmat: list[list[np.ndarray]]) -> np.ndarray:
        total = np.zeros((t.gns1.dim, t.gns1.dim), dtype=complex)
        for a, row in enumerate(blockmat):
            for b, x in enumerate(row):
                total += pi1(la.dagger(pi(basis.elements[a])) @ e1 @ pi(x)) @ e2 @ lifted_right[b]
        return idx * total

    d = basis.size
    vs = []
    for i in range(d):
        v = idx * sum(
            lifted_left[a] @ pi1(pi(basis.elements[i])) @ e2 @ lifted_right[a]
            for a in range(d)
        )
        vs.append(v)
    rep = Report()
    rep.add(
        "corrections_unitary",
        max(
            la.frobenius_distance(la.dagger(v) @ v, la.eye(t.gns1.dim)) for v in vs
        ),
        tol.bound(1.0) * d,
    )
    rep.add(
        "corrections_in_second_tower_algebra",
        max(t.level2.membership_residual(v) for v in vs),
        tol.bound(1.0) * t.level2.dim,
    )
    rep.add(
        "corrections_conjugate_shift",
        max(
            la.frobenius_distance(
                vs[i] @ t.shift(x) @ la.dagger(vs[i]),
                t.shift(basis.elements[i] @ x @ la.dagger(basis.elements[i])),
            )
            for i in range(d)
            for x in t.rel_comm.basis
        ),
        tol.bound(1.0) * d,
    )
    rng = la.rng_from(None)
    n = t.inclusion.big.ambient_dim
    rand_block = lambda: [
        [t.inclusion.big.project(la.random_hermitian(n, rng)) for _ in range(d)]
        for _ in range(d)
    ]
    xs, ys = rand_block(), rand_block()
    prod = [
        [sum(xs[a][c] @ ys[c][b] for c in range(d)) for b in range(d)] for a in range(d)
    ]
    rep.add(
        "periodicity_map_multiplicative",
        la.frobenius_distance(phi(xs) @ phi(ys), phi(prod)),
        tol.bound(float(np.linalg.norm(phi(xs)) * np.linalg.norm(phi(ys)))) * 10,
    )
    ident = [
        [la.eye(n) if a == b else np.zeros((n, n), dtype=complex) for b in range(d)]
        for a in range(d)
    ]
    rep.add(
        "periodicity_map_unital",
        la.frobenius_distance(phi(ident), la.eye(t.gns1.dim)),
        tol.bound(1.0) * d,
    )
    return vs, rep


def unbiased_scheme(
    t: Tower, basis: PimsnerPopaBasis, tol: Tolerance | None = None
) -> TeleportationScheme:
    """Unbiased scheme for N' ∩ M relative to M1 and M1' ∩ M2.

    The resource is [M:N] e_M, the POVM is the projection family
    {u_i* e_N u_i} lifted to level two, and the corrections conjugate
    directly by the periodicity unitaries; Alice's outcome distribution is
    uniform for every input density.

    The corrections restrict to the intended automorphisms of Bob's
    algebra and normalise Alice's, but when the two algebras share central
    projections (e.g. the diagonals inside M_n) no correction can fix
    Alice pointwise, so strict Alice-bimodularity is unattainable for any
    choice of channels; :func:`verify_scheme` certifies the attainable
    locality and records the obstruction.
    """
    tol = tol or DEFAULT_TOL
    vs, _ = correction_unitaries(t, basis, tol)
    ctx = _tower_context(t, label=f"unbiased(d={basis.size})")
    idx = t.index
    omega = idx * t.jones2
    pi, pi1, e1 = t.gns.left, t.gns1.left, t.jones1
    povm = [
        pi1(la.dagger(pi(u)) @ e1 @ pi(u)) for u in basis.elements
    ]
    channels = [Channel.conjugation(v, label=f"correct[{i}]") for i, v in enumerate(vs)]
    return TeleportationScheme(ctx, omega, povm, channels)


# ---------------------------------------------------------------------------
# Rigidity: tight schemes on M_n (x) M_n (x) N' and their extraction.
# ---------------------------------------------------------------------------


def commutant_trace_is_markov(inc: Inclusion, tol: Tolerance | None = None) -> tuple[bool, Report]:
    """Whether tau_n restricted to N' is the Markov trace of scalars ⊆ N'.

    Holds exactly when n_j / m_j = n / dim N' for every block of N; when it
    does, both normalised one-leg partial traces of the Jones projection
    equal 1/[M_n : N], which is re-checked numerically.
    """
    tol = tol or DEFAULT_TOL
    rep = Report()
    n = inc.big.ambient_dim
    if inc.big.dim != n * n:
        raise PreconditionError("commutant trace test requires M = M_n")
    dims = [bd for bd, _ in inc.small.blocks]
    mults = [m for _, m in inc.small.blocks]
    dim_nprime = sum(m * m for m in mults)
    flag = all(bd * dim_nprime == n * m for bd, m in inc.small.blocks)
    rep.add_flag(
        "trace_vector_proportionality",
        True,
        detail=f"blocks {list(zip(dims, mults))}, n={n}, dim N'={dim_nprime}, flag {flag}",
    )
    if flag:
        e = concrete_jones_projection(inc.small)
        idx = inc.index
        left = la.partial_trace(e, [n, n], {0}, normalise=True)
        right = la.partial_trace(e, [n, n], {1}, normalise=True)
        rep.add(
            "jones_partial_traces_flat",
            max(
                la.frobenius_distance(left, la.eye(n) / idx),
                la.frobenius_distance(right, la.eye(n) / idx),
            ),
            tol.bound(1.0),
        )
    return flag, rep


def _tripartite_context(inc: Inclusion, label: str) -> TeleportationContext:
    n = inc.big.ambient_dim
    nprime = inc.small.commutant
    full, triv = StarAlgebra.full(n), StarAlgebra.trivial(n)
    ambient = StarAlgebra.tensor(full, full, nprime)
    ident = la.eye(n)
    return TeleportationContext(
        ambient=ambient,
        trace=Trace.normalized(ambient),
        alice=StarAlgebra.tensor(full, full, triv),
        bob=StarAlgebra.tensor(triv, triv, nprime),
        teleported=StarAlgebra.tensor(nprime, triv, triv),
        mirror=StarAlgebra.tensor(triv, nprime, triv),
        shift_pairs=[
            (la.kron(b, ident, ident), la.kron(ident, ident, b)) for b in nprime.basis
        ],
        label=label,
    )


def tight_scheme_from_basis(
    inc: Inclusion,
    basis: PimsnerPopaBasis,
    u: np.ndarray | None = None,
    z: np.ndarray | None = None,
    tol: Tolerance | None = None,
) -> TeleportationScheme:
    """Tight scheme for N' on M_n (x) M_n (x) N' from (basis, u, z) data.

    ``basis`` must be a unitary orthonormal normaliser basis of M_n over N,
    ``u`` a normaliser unitary and ``z`` a positive invertible central
    element of N with tau(z) = 1.  The commutant-trace gate must pass.
    """
    tol = tol or DEFAULT_TOL
    n = inc.big.ambient_dim
    flag, _ = commutant_trace_is_markov(inc, tol)
    if not flag:
        raise HypothesisError("tau restricted to N' is not the Markov trace of C ⊆ N'")
    t = basic_construction(inc, tol)
    if basis.orthonormal is None:
        verify_basis(t, basis)
    if not (basis.orthonormal and basis.unitary and basis.in_normaliser):
        raise PreconditionError("need a unitary orthonormal normaliser basis")
    u = la.eye(n) if u is None else np.asarray(u, dtype=complex)
    z = la.eye(n) if z is None else np.asarray(z, dtype=complex)
    if not normalizer_check(t, u, tol):
        raise PreconditionError("u must normalise N")
    centre_res = max(
        la.frobenius_distance(z @ b, b @ z) for b in inc.small.basis
    ) + inc.small.membership_residual(z)
    if centre_res > tol.bound(float(np.linalg.norm(z))) * 10:
        raise PreconditionError("z must be central in N")
    zvals = np.linalg.eigvalsh((z + la.dagger(z)) / 2)
    if zvals.min() <= tol.abs or abs(inc.trace(z) - 1.0) > tol.bound(1.0):
        raise PreconditionError("z must be positive invertible with tau(z) = 1")

    e = concrete_jones_projection(inc.small)
    idx = inc.index
    root = la.matrix_sqrt(z, tol)
    ident = la.eye(n)
    dress = la.kron(ident, root @ u)
    omega_small = idx * dress @ e @ la.dagger(dress)
    omega = la.kron(ident, omega_small)
    povm = []
    for ui in basis.elements:
        w = la.kron(la.dagger(ui) @ u, ident)
        povm.append(la.kron(w @ e @ la.dagger(w), ident))
    channels = [
        Channel.conjugation(la.kron(la.eye(n * n), ui), label=f"correct[{i}]")
        for i, ui in enumerate(basis.elements)
    ]
    ctx = _tripartite_context(inc, label=f"tight_from_basis(n={n})")
    return TeleportationScheme(ctx, omega, povm, channels, inclusion=inc, leg_dims=(n, n, n))


def extract_tight_scheme(
    scheme: TeleportationScheme,
    inc: Inclusion | None = None,
    tol: Tolerance | None = None,
) -> tuple[PimsnerPopaBasis, np.ndarray, np.ndarray, Report]:
    """Recover (basis, u, z) from a tight, minimal, faithful scheme for N'.

    The central element is the one-leg slice of the resource, correction
    unitaries come from intertwiner spaces of the channels (fixed up to a
    right unitary of N, then gauged against the POVM), and the dressing
    unitary is solved linearly from the undressed resource.  The contract
    is the round trip: rebuilding from the extracted triple must reproduce
    the scheme's operators.
    """
    tol = tol or DEFAULT_TOL
    inc = inc or scheme.inclusion
    if inc is None or scheme.leg_dims is None:
        raise PreconditionError("extraction needs the tripartite inclusion data")
    n = inc.big.ambient_dim
    if scheme.leg_dims != (n, n, n):
        raise PreconditionError("extraction expects three legs of matching dimension")
    small = inc.small
    trans_res = max(la.span_residual(small.basis, b.T) for b in small.basis)
    if trans_res > tol.bound(1.0) * 10:
        raise HypothesisError("N must be transpose-closed (block-adapted position)")
    flag, _ = commutant_trace_is_markov(inc, tol)
    if not flag:
        raise HypothesisError("commutant trace gate fails")
    flags = scheme.flags or classify(scheme, tol)
    if not (flags.tight and flags.minimal and flags.faithful):
        raise PreconditionError("extraction requires a tight, minimal, faithful scheme")

    rep = Report()
    dims = [n, n, n]
    omega = scheme.omega
    omega_small = la.partial_trace(omega, dims, {0}, normalise=True)
    rep.add(
        "resource_has_trivial_first_leg",
        la.frobenius_distance(omega, la.kron(la.eye(n), omega_small)),
        tol.bound(float(np.linalg.norm(omega))),
    )
    z = la.partial_trace(omega_small, [n, n], {0}, normalise=True)
    z = (z + la.dagger(z)) / 2
    centre = small.center
    rep.add("central_slice_in_centre", centre.membership_residual(z), tol.bound(1.0) * 10)
    zvals = np.linalg.eigvalsh(z)
    rep.add_flag("central_slice_invertible", bool(zvals.min() > 1e-8), detail=f"min eig {zvals.min():.2e}")
    rep.add("central_slice_normalised", abs(np.trace(z).real / n - 1.0), tol.bound(1.0) * 10)
    if not rep.passed:
        raise ExtractionError("resource does not have the rigid form")

    nprime = small.commutant
    e = concrete_jones_projection(small)
    idx = inc.index

    # channel restrictions to the far leg and their implementing unitaries
    t = basic_construction(inc, tol)
    raw_units: list[np.ndarray] = []
    for i, ch in enumerate(scheme.channels):
        pairs = []
        for a in nprime.basis:
            image = la.partial_trace(ch(la.kron(la.eye(n * n), a)), dims, {0, 1}, normalise=True)
            pairs.append((a, image))
        sols = la.intertwiner_space(pairs, n, tol)
        if len(sols) != small.dim:
            raise ExtractionError(
                f"channel {i}: intertwiner space has dimension {len(sols)}, expected {small.dim}"
            )
        cand = la.generic_invertible(sols, la.rng_from(DEFAULT_SEED + i))
        if cand is None:
            raise ExtractionError(f"channel {i}: no invertible intertwiner found")
        ui = la.polar_unitary(cand)
        resid = max(
            la.frobenius_distance(ui @ a @ la.dagger(ui), b) for a, b in pairs
        )
        if resid > tol.bound(1.0) * 100:
            raise ExtractionError(f"channel {i} is not implemented by a unitary ({resid:.2e})")
        raw_units.append(ui)

    # dressing unitary from the undressed resource
    inv_root = np.linalg.inv(la.matrix_sqrt(z, tol))
    dress_inv = la.kron(la.eye(n), inv_root)
    undressed = dress_inv @ omega_small @ dress_inv / idx
    cols = []
    for a in range(n):
        for b in range(n):
            x = np.zeros((n, n), dtype=complex)
            x[a, b] = 1.0
            lifted = la.kron(la.eye(n), x)
            cols.append((lifted @ undressed - e @ lifted).reshape(-1))
    sols = la.nullspace(np.stack(cols, axis=1), tol)
    mats = [v.reshape(n, n) for v in sols]
    if len(mats) != small.dim:
        raise ExtractionError(f"dressing solution space has dimension {len(mats)}, expected {small.dim}")
    cand = la.generic_invertible(mats, la.rng_from(DEFAULT_SEED + 101))
    if cand is None:
        raise ExtractionError("no invertible dressing solution")
    u = la.dagger(la.polar_unitary(cand))
    dress = la.kron(la.eye(n), la.matrix_sqrt(z, tol) @ u)
    rep.add(
        "resource_round_trip",
        la.frobenius_distance(idx * dress @ e @ la.dagger(dress), omega_small),
        tol.bound(float(np.linalg.norm(omega_small))) * 10,
    )

    # gauge-fix the correction unitaries against the POVM
    ident = la.eye(n)
    fixed_units = []
    for i, (ui, f) in enumerate(zip(raw_units, scheme.povm)):
        f_small = la.partial_trace(f, dims, {2}, normalise=True)
        rep.add(
            f"povm_{i}_has_trivial_third_leg",
            la.frobenius_distance(f, la.kron(f_small, ident)),
            tol.bound(float(np.linalg.norm(f))),
        )
        w = la.kron(la.dagger(ui) @ u, ident)
        h = w @ e @ la.dagger(w)
        cols = [
            ((la.kron(c, ident) @ h - f_small @ la.kron(c, ident)).reshape(-1))
            for c in small.basis
        ]
        gauge_vecs = la.nullspace(np.stack(cols, axis=1), tol)
        gauge_mats = [
            np.tensordot(v, small.basis, axes=(0, 0)) for v in gauge_vecs
        ]
        cand = la.generic_invertible(gauge_mats, la.rng_from(DEFAULT_SEED + 202 + i))
        if cand is None:
            raise ExtractionError(f"outcome {i}: no invertible gauge element")
        gram = la.dagger(cand) @ cand
        vals, vecs = np.linalg.eigh(gram)
        inv_half = (vecs / np.sqrt(np.clip(vals, 1e-30, None))) @ la.dagger(vecs)
        c_u = cand @ inv_half
        if small.membership_residual(c_u) > tol.bound(1.0) * 100:
            raise ExtractionError(f"outcome {i}: gauge correction left N")
        fixed_units.append(ui @ la.dagger(c_u))

    basis = PimsnerPopaBasis(inc, fixed_units)
    basis_rep = verify_basis(t, basis, tol)
    if not (basis_rep.passed and basis.orthonormal and basis.in_normaliser):
        raise ExtractionError("extracted family is not an orthonormal normaliser basis")
    rep.merge(basis_rep, prefix="extracted_basis.")

    rebuilt = tight_scheme_from_basis(inc, basis, u, z, tol)
    rep.add(
        "round_trip_resource",
        la.frobenius_distance(rebuilt.omega, scheme.omega),
        1e-8 * max(1.0, float(np.linalg.norm(scheme.omega))),
    )
    rep.add(
        "round_trip_povm",
        max(
            la.frobenius_distance(a, b) for a, b in zip(rebuilt.povm, scheme.povm)
        ),
        1e-8,
    )
    chan = 0.0
    for ch_new, ch_old in zip(rebuilt.channels, scheme.channels):
        for b in rebuilt.context.bob.basis:
            chan = max(chan, la.frobenius_distance(ch_new(b), ch_old(b)))
    rep.add("round_trip_channels", chan, 1e-8)
    if not rep.passed:
        raise ExtractionError(
            "round trip failed: " + ", ".join(c.name for c in rep.failures())
        )
    return basis, u, z, rep
