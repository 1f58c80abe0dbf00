"""GNS representations and the two-level basic construction.

Coordinates on the GNS space of (M, tau) use a self-adjoint basis of M
orthonormal for <x, y> = tau(y* x).  In these coordinates the modular
conjugation is plain entrywise complex conjugation and the right regular
representation is the transpose of the left one, so no antilinear operator
type is needed anywhere.

The second algebra of the tower is built as the conjugated commutant of
the represented middle algebra, and its canonical trace is solved from the
defining relation tr(x e y) = tau(x y) through a central-density ansatz,
with the relation re-verified on a spanning family of pairs.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from . import linalg as la
from .algebra import (
    StarAlgebra,
    Superoperator,
    Trace,
    _tau_onb,
    conditional_expectation_onto,
)
from .errors import (
    InternalError,
    MarkovError,
    NormaliserError,
    PreconditionError,
    TraceError,
)
from .inclusion import Inclusion, inclusion_matrix, index_from_matrix
from .linalg import DEFAULT_TOL, Tolerance
from .reporting import Report

_PAIR_SEED = 0x70A3  # deterministic draws for trace-relation validation pairs


class GnsSpace:
    """The GNS representation of a tracial finite-dimensional algebra."""

    def __init__(self, algebra: StarAlgebra, trace: Trace, tol: Tolerance = DEFAULT_TOL) -> None:
        if trace.algebra is not algebra:
            raise TraceError("trace must live on the represented algebra")
        if not (trace.is_state(tol) and trace.is_faithful(tol)):
            raise TraceError("GNS construction needs a faithful tracial state")
        self.algebra = algebra
        self.trace = trace
        self.tol = tol
        self.onb = _tau_onb(algebra.basis, trace)
        self.dim = self.onb.shape[0]
        rho = trace.density
        # W[l, k] = b_k rho b_l, so that pi(x)_{lk} = tr(W[l, k] x)
        self._W = np.einsum("kab,bc,lcd->lkad", self.onb, rho, self.onb, optimize=True)
        self._rho_onb = np.einsum("ab,lbc->lac", rho, self.onb)

    def vector(self, x: np.ndarray) -> np.ndarray:
        """Coordinates of the GNS image of x."""
        return np.einsum("lab,ba->l", self._rho_onb, x)

    def left(self, x: np.ndarray) -> np.ndarray:
        """Left multiplication by x as a matrix on the GNS space."""
        return np.einsum("lkab,ba->lk", self._W, x)

    def right(self, x: np.ndarray) -> np.ndarray:
        """Right multiplication by x; the transpose of :meth:`left` here."""
        return self.left(x).T

    def element(self, v: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`vector`: the algebra element with GNS coordinates v."""
        return np.einsum("l,lab->ab", v, self.onb)

    def subspace_projection(self, sub: StarAlgebra) -> np.ndarray:
        """Orthogonal projection onto the GNS image of a subalgebra."""
        sub_onb = _tau_onb(sub.basis, self.trace.restrict(sub))
        rows = np.stack([self.vector(c) for c in sub_onb])
        return rows.T @ np.conj(rows)


def build_gns(algebra: StarAlgebra, trace: Trace, tol: Tolerance = DEFAULT_TOL) -> GnsSpace:
    return GnsSpace(algebra, trace, tol)


def jones_projection(gns: GnsSpace, small: StarAlgebra) -> np.ndarray:
    """Orthogonal projection onto the GNS image of a subalgebra.

    Satisfies e Lambda(x) = Lambda(E(x)) for the trace-preserving
    expectation onto the subalgebra.
    """
    return gns.subspace_projection(small)


def _central_trace_from_relation(
    level: StarAlgebra,
    products: list[np.ndarray],
    values: list[complex],
    tol: Tolerance,
) -> tuple[np.ndarray, float]:
    """Solve tr(rho * product) = value for a central density rho on ``level``.

    Returns the (unnormalised) density together with the worst equation
    residual; any trace on a finite-dimensional algebra has a central
    density, so a large residual means the relation is inconsistent.
    """
    zs = level.central_projections
    rows = np.array([[np.trace(z @ p) for z in zs] for p in products])
    vals = np.array(values)
    coeffs, *_ = np.linalg.lstsq(rows, vals, rcond=None)
    resid = float(np.abs(rows @ coeffs - vals).max()) if len(products) else 0.0
    rho = sum(c * z for c, z in zip(coeffs, zs))
    return rho, resid


class Tower:
    """The tower N ⊆ M ⊆ M1 (⊆ M2 after :func:`iterate`).

    Level one lives on the GNS space of (M, tau): ``jones1`` is the
    projection onto the image of N and ``level1`` the conjugated commutant
    of the represented N.  Level two repeats the construction for
    (M1, trace1).
    """

    def __init__(self, inclusion: Inclusion, tol: Tolerance = DEFAULT_TOL) -> None:
        self.inclusion = inclusion
        self.tol = tol
        self.gns = GnsSpace(inclusion.big, inclusion.trace, tol)
        self.n_rep = inclusion.small.image(self.gns.left, self.gns.dim)
        self.m_rep = inclusion.big.image(self.gns.left, self.gns.dim)
        self.jones1 = self.gns.subspace_projection(inclusion.small)
        self.level1 = self.n_rep.commutant.conjugate_entrywise()
        self._solve_level1_trace()
        self._level2_built = False

    # -- level 1 -------------------------------------------------------------

    def _solve_level1_trace(self) -> None:
        inc = self.inclusion
        pi = self.gns.left
        basis = inc.big.basis
        products, values = [], []
        for x in basis:
            px = pi(x)
            for y in basis:
                products.append(px @ self.jones1 @ pi(y))
                values.append(inc.trace(x @ y))
        rho, resid = _central_trace_from_relation(self.level1, products, values, self.tol)
        if resid > self.tol.bound(1.0) * len(products):
            raise MarkovError(f"tr1 extension inconsistent, residual {resid:.2e}")
        total = float(np.trace(rho).real)
        self.tr1_density = rho
        weights = [
            float(np.trace(rho @ self.level1.minimal_projection(j)).real) / total
            for j in range(len(self.level1.blocks))
        ]
        self.trace1 = Trace(self.level1, weights)
        # Markov gate: the normalised extension must restrict to tau on M
        worst = max(
            abs(self.trace1(pi(x)) - inc.trace(x)) for x in inc.big.basis
        )
        if worst > self.tol.bound(1.0) * len(inc.big.basis):
            raise MarkovError(f"trace is not Markov for the inclusion, residual {worst:.2e}")

    @property
    def index(self) -> float:
        return self.inclusion.index

    @cached_property
    def rel_comm(self) -> StarAlgebra:
        """N' ∩ M in the base ambient."""
        return self.inclusion.relative_commutant

    @cached_property
    def mirror1(self) -> StarAlgebra:
        """M' ∩ M1, realised as the right-multiplication image of N' ∩ M."""
        return self.rel_comm.anti_image(self.gns.right, self.gns.dim)

    def gamma0(self, x: np.ndarray) -> np.ndarray:
        """Anti-isomorphism N' ∩ M -> M' ∩ M1 (right multiplication)."""
        return self.gns.right(x)

    @cached_property
    def expect_onto_m(self) -> Superoperator:
        """trace1-preserving conditional expectation M1 -> M."""
        return conditional_expectation_onto(self.m_rep, self.level1, self.trace1)

    # -- level 2 -------------------------------------------------------------

    def _require_level2(self) -> None:
        if not self._level2_built:
            raise PreconditionError("tower has one level; call iterate() first")

    def build_level2(self) -> None:
        if self._level2_built:
            return
        self.gns1 = GnsSpace(self.level1, self.trace1, self.tol)
        dim1 = self.gns1.dim
        self.m1_rep = self.level1.image(self.gns1.left, dim1)
        self.m_rep2 = self.m_rep.image(self.gns1.left, dim1)
        self.jones2 = self.gns1.subspace_projection(self.m_rep)
        self.level2 = self.m_rep2.commutant.conjugate_entrywise()
        self._solve_level2_trace()
        self._level2_built = True

    def _solve_level2_trace(self) -> None:
        pi1 = self.gns1.left
        basis = self.level1.basis
        rng = la.rng_from(_PAIR_SEED)
        k = basis.shape[0]
        picks = min(k, max(12, 2 * len(self.level2.blocks)))
        combos = [
            np.tensordot(rng.standard_normal(k), basis, axes=(0, 0)) for _ in range(picks)
        ]
        combos.extend(basis[: min(k, 6)])
        images = [pi1(c) for c in combos]
        products, values = [], []
        for c, pc in zip(combos, images):
            for d, pd in zip(combos, images):
                products.append(pc @ self.jones2 @ pd)
                values.append(self.trace1(c @ d))
        rho, resid = _central_trace_from_relation(self.level2, products, values, self.tol)
        if resid > self.tol.bound(1.0) * len(products):
            raise MarkovError(f"tr2 extension inconsistent, residual {resid:.2e}")
        total = float(np.trace(rho).real)
        self.tr2_density = rho
        weights = [
            float(np.trace(rho @ self.level2.minimal_projection(j)).real) / total
            for j in range(len(self.level2.blocks))
        ]
        self.trace2 = Trace(self.level2, weights)
        worst = max(
            abs(self.trace2(pi1(x)) - self.trace1(x)) for x in self.level1.basis
        )
        if worst > self.tol.bound(1.0) * self.level1.dim:
            raise MarkovError(f"level-two trace not Markov, residual {worst:.2e}")

    @cached_property
    def mirror2(self) -> StarAlgebra:
        """M1' ∩ M2, realised through the second anti-isomorphism."""
        self._require_level2()
        return self.mirror1.anti_image(self.gns1.right, self.gns1.dim)

    def gamma1(self, y: np.ndarray) -> np.ndarray:
        """Anti-isomorphism M' ∩ M1 -> M1' ∩ M2."""
        self._require_level2()
        return self.gns1.right(y)

    def shift(self, x: np.ndarray) -> np.ndarray:
        """The canonical shift N' ∩ M -> M1' ∩ M2 (a *-isomorphism)."""
        return self.gamma1(self.gamma0(x))

    @cached_property
    def gamma0_operator(self) -> Superoperator:
        """gamma0 as a typed map N' ∩ M -> M' ∩ M1 (anti-isomorphism, not CP)."""
        return Superoperator(self.rel_comm, self.mirror1, self.gamma0)

    @cached_property
    def gamma1_operator(self) -> Superoperator:
        self._require_level2()
        return Superoperator(self.mirror1, self.mirror2, self.gamma1)

    @cached_property
    def shift_operator(self) -> Superoperator:
        """The canonical shift as a typed map; being a *-isomorphism it is UCP."""
        self._require_level2()
        return Superoperator(self.rel_comm, self.mirror2, self.shift)

    @cached_property
    def expect_onto_m1(self) -> Superoperator:
        """trace2-preserving conditional expectation M2 -> M1."""
        self._require_level2()
        return conditional_expectation_onto(self.m1_rep, self.level2, self.trace2)


def basic_construction(inclusion: Inclusion, tol: Tolerance = DEFAULT_TOL) -> Tower:
    """Build one level of the tower; raises MarkovError for non-Markov traces."""
    return Tower(inclusion, tol)


def iterate(tower: Tower) -> Tower:
    """Extend the tower with its second level (M2, e_M, gamma1, shift)."""
    tower.build_level2()
    return tower


# ---------------------------------------------------------------------------
# Verification operations
# ---------------------------------------------------------------------------


def verify_tower(t: Tower, tol: Tolerance | None = None, deep: bool = True) -> Report:
    """Residual checks for all level-one and level-two tower identities."""
    tol = tol or t.tol
    rep = Report()
    inc = t.inclusion
    pi, e1 = t.gns.left, t.jones1
    exp = inc.expectation

    rep.add(
        "jones1_projection",
        max(
            la.frobenius_distance(e1, la.dagger(e1)),
            la.frobenius_distance(e1 @ e1, e1),
        ),
        tol.bound(1.0),
    )
    rep.add(
        "gns_inner_product",
        _gns_inner_residual(t),
        tol.bound(1.0),
    )
    rep.add(
        "compression_is_expectation",  # e x e = E(x) e
        max(
            la.frobenius_distance(e1 @ pi(x) @ e1, pi(exp(x)) @ e1) for x in inc.big.basis
        ),
        tol.bound(1.0),
    )
    rng = la.rng_from(_PAIR_SEED + 1)
    bim = 0.0
    for _ in range(6):
        a = inc.small.project(la.random_hermitian(inc.small.ambient_dim, rng))
        b = inc.small.project(la.random_hermitian(inc.small.ambient_dim, rng))
        x = la.random_hermitian(inc.big.ambient_dim, rng)
        x = inc.big.project(x)
        bim = max(bim, la.frobenius_distance(exp(a @ x @ b), a @ exp(x) @ b))
    rep.add("expectation_bimodule", bim, tol.bound(1.0) * 10)
    rep.add(
        "jones1_commutes_with_small",
        max(la.frobenius_distance(e1 @ b, b @ e1) for b in t.n_rep.basis),
        tol.bound(1.0),
    )
    rep.add("jones1_conjugation_invariant", la.frobenius_distance(np.conj(e1), e1), tol.bound(1.0))

    # level1 equals the span of {x e y} together with the conjugated commutant
    prods = [pi(x) @ e1 @ pi(y) for x in inc.big.basis for y in inc.big.basis]
    span = la.span_onb(prods, tol)
    rep.add_flag("level1_spanned_by_compressions", span.shape[0] == t.level1.dim)
    rep.add(
        "level1_span_membership",
        max(la.span_residual(span, b) for b in t.level1.basis),
        tol.bound(1.0) * t.level1.dim,
    )

    rep.add(
        "tr1_defining_relation",
        max(
            abs(
                complex(np.trace(t.tr1_density @ (pi(x) @ e1 @ pi(y))))
                - inc.trace(x @ y)
            )
            for x in inc.big.basis
            for y in inc.big.basis
        ),
        tol.bound(1.0) * inc.big.dim,
    )
    rep.add(
        "markov_restriction",
        max(abs(t.trace1(pi(x)) - inc.trace(x)) for x in inc.big.basis),
        tol.bound(1.0) * inc.big.dim,
    )
    idx = inc.index
    rep.add(
        "markov_expectation_of_jones",
        la.frobenius_distance(t.expect_onto_m(e1), la.eye(t.gns.dim) / idx),
        tol.bound(1.0),
    )
    lam1 = inclusion_matrix(t.m_rep, t.level1)
    rep.add_flag(
        "index_matches_level1",
        int(round(index_from_matrix(lam1))) == int(round(idx))
        and abs(idx - round(idx)) < 1e-9,
        detail=f"[M:N]={idx}, [M1:M]={index_from_matrix(lam1)}",
    )

    # entanglement relation x e = gamma0(x) e on the relative commutant
    rep.add(
        "relative_commutant_entanglement",
        max(
            la.frobenius_distance(pi(x) @ e1, t.gamma0(x) @ e1) for x in t.rel_comm.basis
        ),
        tol.bound(1.0),
    )

    if not deep:
        return rep
    iterate(t)
    pi1, e2 = t.gns1.left, t.jones2
    e1_up = pi1(e1)
    rep.add(
        "jones2_commutes_with_m",  # the level-two fact e_M ∈ M'
        max(la.frobenius_distance(e2 @ b, b @ e2) for b in t.m_rep2.basis),
        tol.bound(1.0),
    )
    rep.add(
        "jones2_conjugation_invariant",
        la.frobenius_distance(np.conj(e2), e2),
        tol.bound(1.0),
    )
    exp_m = t.expect_onto_m
    rep.add(
        "compression_is_expectation_level2",  # e_M x e_M = E_M(x) e_M on M1
        max(
            la.frobenius_distance(
                e2 @ pi1(x) @ e2, pi1(exp_m(x)) @ e2
            )
            for x in t.level1.basis
        ),
        tol.bound(1.0) * t.level1.dim,
    )
    rep.add(
        "temperley_lieb_first",  # e_N e_M e_N = idx^{-1} e_N
        la.frobenius_distance(e1_up @ e2 @ e1_up, e1_up / idx),
        tol.bound(1.0),
    )
    rep.add(
        "temperley_lieb_second",
        la.frobenius_distance(e2 @ e1_up @ e2, e2 / idx),
        tol.bound(1.0),
    )
    rep.add(
        "markov_expectation_level2",
        la.frobenius_distance(t.expect_onto_m1(e2), la.eye(t.gns1.dim) / idx),
        tol.bound(1.0),
    )
    rep.add(
        "shift_entanglement",  # e_N x e_M = e_N shift(x) e_M
        max(
            la.frobenius_distance(
                e1_up @ pi1(pi(x)) @ e2, e1_up @ t.shift(x) @ e2
            )
            for x in t.rel_comm.basis
        ),
        tol.bound(1.0),
    )
    rep.merge(_shift_isomorphism_report(t, tol))
    return rep


def _gns_inner_residual(t: Tower) -> float:
    rng = la.rng_from(_PAIR_SEED + 2)
    n = t.inclusion.big.ambient_dim
    worst = 0.0
    for _ in range(20):
        x = t.inclusion.big.project(la.random_hermitian(n, rng))
        y = t.inclusion.big.project(la.random_hermitian(n, rng))
        lhs = np.vdot(t.gns.vector(y), t.gns.vector(x))
        worst = max(worst, abs(lhs - t.inclusion.trace(la.dagger(y) @ x)))
        worst = max(
            worst,
            float(
                np.abs(t.gns.left(x) @ t.gns.vector(y) - t.gns.vector(x @ y)).max()
            ),
        )
    return worst


def _shift_isomorphism_report(t: Tower, tol: Tolerance) -> Report:
    rep = Report()
    rc = t.rel_comm
    rep.add(
        "shift_unital",
        la.frobenius_distance(t.shift(rc.unit), la.eye(t.gns1.dim)),
        tol.bound(1.0),
    )
    rng = la.rng_from(_PAIR_SEED + 3)
    mult = star = anti0 = star0 = anti1 = 0.0
    for _ in range(6):
        x = rc.project(la.random_hermitian(rc.ambient_dim, rng))
        y = rc.project(la.random_hermitian(rc.ambient_dim, rng))
        mult = max(mult, la.frobenius_distance(t.shift(x @ y), t.shift(x) @ t.shift(y)))
        star = max(star, la.frobenius_distance(t.shift(la.dagger(x)), la.dagger(t.shift(x))))
        anti0 = max(anti0, la.frobenius_distance(t.gamma0(x @ y), t.gamma0(y) @ t.gamma0(x)))
        star0 = max(
            star0, la.frobenius_distance(t.gamma0(la.dagger(x)), la.dagger(t.gamma0(x)))
        )
        gx, gy = t.gamma0(x), t.gamma0(y)
        anti1 = max(
            anti1, la.frobenius_distance(t.gamma1(gx @ gy), t.gamma1(gy) @ t.gamma1(gx))
        )
    rep.add("shift_multiplicative", mult, tol.bound(1.0) * 10)
    rep.add("shift_star_preserving", star, tol.bound(1.0) * 10)
    rep.add("gamma0_anti_multiplicative", anti0, tol.bound(1.0) * 10)
    rep.add("gamma0_star_preserving", star0, tol.bound(1.0) * 10)
    rep.add("gamma1_anti_multiplicative", anti1, tol.bound(1.0) * 10)
    # M1 is generated by the represented M together with the first Jones
    # projection, so commutation against those generators suffices.
    gens = [t.gns1.left(t.gns.left(b)) for b in t.inclusion.big.basis]
    gens.append(t.gns1.left(t.jones1))
    rep.add(
        "shift_lands_in_level2_commutant",
        max(
            max(la.frobenius_distance(t.shift(x) @ g, g @ t.shift(x)) for g in gens)
            for x in rc.basis
        ),
        tol.bound(1.0) * t.level1.dim,
    )
    rep.add(
        "shift_image_in_level2",
        max(t.level2.membership_residual(t.shift(x)) for x in rc.basis),
        tol.bound(1.0) * t.level2.dim,
    )
    return rep


def verify_epr(t: Tower, tol: Tolerance | None = None) -> Report:
    """Entanglement checks: the two commutation lemmas plus perfect correlation."""
    tol = tol or t.tol
    rep = Report()
    pi, e1 = t.gns.left, t.jones1
    rc = t.rel_comm
    rep.add(
        "left_right_on_jones",  # x e = pi_r(x) e = gamma0(x) e
        max(
            max(
                la.frobenius_distance(pi(x) @ e1, t.gns.right(x) @ e1),
                la.frobenius_distance(t.gns.right(x) @ e1, t.gamma0(x) @ e1),
            )
            for x in rc.basis
        ),
        tol.bound(1.0),
    )
    iterate(t)
    pi1, e2 = t.gns1.left, t.jones2
    e1_up = pi1(e1)
    rep.add(
        "shift_on_second_jones",
        max(
            la.frobenius_distance(e1_up @ pi1(pi(x)) @ e2, e1_up @ t.shift(x) @ e2)
            for x in rc.basis
        ),
        tol.bound(1.0),
    )
    # any unit vector in the image of N is perfectly correlated
    rng = la.rng_from(_PAIR_SEED + 4)
    worst = 0.0
    vectors = [t.gns.vector(t.inclusion.small.unit)]
    coeffs = rng.standard_normal(t.inclusion.small.dim)
    y = np.tensordot(coeffs, t.inclusion.small.basis, axes=(0, 0))
    v = t.gns.vector(y)
    vectors.append(v / np.linalg.norm(v))
    for psi in vectors:
        for x in rc.basis:
            worst = max(worst, float(np.linalg.norm((pi(x) - t.gamma0(x)) @ psi)))
    rep.add("perfect_correlation", worst, tol.bound(1.0))
    return rep


def normalizer_check(t: Tower, u: np.ndarray, tol: Tolerance | None = None) -> bool:
    """Whether a unitary u in M normalises N.

    Three equivalent formulations are evaluated — conjugation stability of
    the subalgebra, equivariance of the conditional expectation, and the
    right-regular identity for u e_N u* — and must agree; disagreement
    means a library bug, not a property of u.
    """
    tol = tol or t.tol
    inc = t.inclusion
    if not la.is_unitary(u, tol) or not inc.big.contains(u, tol):
        raise NormaliserError("normaliser candidates must be unitaries in M")
    n_basis = inc.small.basis
    conj_stable = all(
        inc.small.contains(la.dagger(u) @ b @ u, tol) for b in n_basis
    )
    exp = inc.expectation
    rng = la.rng_from(_PAIR_SEED + 5)
    equivariant = True
    for _ in range(6):
        x = inc.big.project(la.random_hermitian(inc.big.ambient_dim, rng))
        lhs = la.dagger(u) @ exp(x) @ u
        rhs = exp(la.dagger(u) @ x @ u)
        if la.frobenius_distance(lhs, rhs) > tol.bound(float(np.linalg.norm(lhs))) * 10:
            equivariant = False
            break
    pu, pru = t.gns.left(u), t.gns.right(u)
    e1 = t.jones1
    jones_identity = la.frobenius_distance(
        pu @ e1 @ la.dagger(pu), pru @ e1 @ la.dagger(pru)
    ) <= tol.bound(1.0) * 10
    votes = [conj_stable, equivariant, jones_identity]
    if len(set(votes)) != 1:
        raise InternalError(f"normaliser criteria disagree: {votes}")
    return conj_stable


def verify_tracial_entangled_state(
    t: Tower,
    u: np.ndarray,
    psi: np.ndarray | None = None,
    tol: Tolerance | None = None,
    samples: int = 12,
) -> Report:
    """Tracial restricted vector state and EPR-double identity for u* psi.

    ``psi`` is a unit vector in the GNS image of N (the image of the unit
    by default); ``u`` must normalise N.
    """
    tol = tol or t.tol
    if not normalizer_check(t, u, tol):
        raise NormaliserError("u does not normalise N")
    if psi is None:
        psi = t.gns.vector(t.inclusion.small.unit)
    psi = np.asarray(psi, dtype=complex)
    if abs(np.linalg.norm(psi) - 1.0) > tol.bound(1.0):
        raise PreconditionError("psi must be a unit vector")
    if np.linalg.norm((np.eye(t.gns.dim) - t.jones1) @ psi) > tol.bound(1.0) * 10:
        raise PreconditionError("psi must lie in the GNS image of N")
    rep = Report()
    rc = t.rel_comm
    pu = t.gns.left(u)
    xi = la.dagger(pu) @ psi
    rng = la.rng_from(_PAIR_SEED + 6)
    tracial = 0.0
    for _ in range(samples):
        x = rc.project(la.random_hermitian(rc.ambient_dim, rng))
        y = rc.project(la.random_hermitian(rc.ambient_dim, rng))
        px, py = t.gns.left(x), t.gns.left(y)
        lhs = np.vdot(xi, px @ py @ xi)
        rhs = np.vdot(xi, py @ px @ xi)
        tracial = max(tracial, abs(lhs - rhs))
    rep.add("restricted_state_tracial", tracial, tol.bound(1.0) * 10)
    double = 0.0
    for x in rc.basis:
        lhs = t.gamma0(u @ x @ la.dagger(u)) @ xi
        rhs = t.gns.left(x) @ xi
        double = max(double, float(np.linalg.norm(lhs - rhs)))
    rep.add("epr_double_identity", double, tol.bound(1.0))
    return rep
