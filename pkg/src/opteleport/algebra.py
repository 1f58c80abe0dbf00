"""Concrete finite-dimensional *-algebras of matrices.

A :class:`StarAlgebra` is a unital *-subalgebra of some ``M_n(C)`` carrying
its discovered block structure: block dimensions with multiplicities,
minimal central projections, and per-block systems of matrix units.  The
canonical HS-orthonormal self-adjoint basis is rebuilt from the matrix
units, which keeps every downstream construction deterministic.

Traces are represented by their block weight vectors; evaluation goes
through the central density ``rho`` with ``tau(x) = Tr(rho x)``.
"""

from __future__ import annotations

from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from . import linalg as la
from .errors import (
    InternalError,
    NotScalarError,
    PreconditionError,
    StructureError,
    TraceError,
)
from .linalg import DEFAULT_TOL, Tolerance

# Structure discovery draws (generic central elements, partial isometries)
# use fixed internal seeds so that rebuilt algebras are bit-identical.
_STRUCTURE_SEED = 0x5EED
_MAX_DRAWS = 8


def _hermitian_basis_from_units(
    units: Sequence[Sequence[Sequence[np.ndarray]]],
    multiplicities: Sequence[int],
) -> list[np.ndarray]:
    """Self-adjoint HS-orthonormal basis built from matrix units blockwise."""
    basis: list[np.ndarray] = []
    for f, m in zip(units, multiplicities):
        d = len(f)
        root = np.sqrt(float(m))
        for a in range(d):
            basis.append(f[a][a] / root)
        for a in range(d):
            for b in range(a + 1, d):
                basis.append((f[a][b] + f[b][a]) / (root * np.sqrt(2.0)))
                basis.append(1j * (f[a][b] - f[b][a]) / (root * np.sqrt(2.0)))
    return basis


class StarAlgebra:
    """Unital *-subalgebra of M_n(C) with explicit block structure.

    Attributes
    ----------
    ambient_dim:
        n, the size of the carrier matrices.
    blocks:
        list of ``(block_dim, multiplicity)`` pairs, sorted canonically.
    central_projections:
        the minimal central projections, aligned with ``blocks``.
    matrix_units:
        per block, an ``n_j x n_j`` nested list of partial isometries
        satisfying the matrix-unit relations and summing to the block's
        central projection.
    basis:
        self-adjoint HS-orthonormal spanning stack of shape (dim, n, n).
    """

    def __init__(
        self,
        ambient_dim: int,
        blocks: list[tuple[int, int]],
        central_projections: list[np.ndarray],
        matrix_units: list[list[list[np.ndarray]]],
        tol: Tolerance = DEFAULT_TOL,
    ) -> None:
        self.ambient_dim = int(ambient_dim)
        self.blocks = [(int(n), int(m)) for n, m in blocks]
        self.central_projections = [np.asarray(z, dtype=complex) for z in central_projections]
        self.matrix_units = matrix_units
        self.tol = tol
        mults = [m for _, m in self.blocks]
        self.basis = np.stack(_hermitian_basis_from_units(matrix_units, mults))
        self.unit = sum(self.central_projections)
        if np.linalg.norm(self.unit - la.eye(self.ambient_dim)) > 1e-6 * self.ambient_dim:
            raise StructureError("algebra unit is not the ambient identity")

    # -- constructors -------------------------------------------------------

    @classmethod
    def trivial(cls, n: int) -> "StarAlgebra":
        """C * 1_n."""
        return cls(n, [(1, n)], [la.eye(n)], [[[la.eye(n)]]])

    @classmethod
    def full(cls, n: int) -> "StarAlgebra":
        """All of M_n(C)."""
        units = [[[_unit_matrix(n, a, b) for b in range(n)] for a in range(n)]]
        return cls(n, [(n, 1)], [la.eye(n)], units)

    @classmethod
    def diagonal(cls, n: int) -> "StarAlgebra":
        """The diagonal maximal abelian subalgebra of M_n(C)."""
        blocks = [(1, 1)] * n
        zs = [_unit_matrix(n, j, j) for j in range(n)]
        units = [[[zs[j]]] for j in range(n)]
        return cls(n, blocks, zs, units)

    @classmethod
    def block_diagonal(cls, layout: Sequence[tuple[int, int]]) -> "StarAlgebra":
        """Direct sum of M_{n_j} x 1_{m_j} blocks embedded contiguously.

        Each block occupies ``n_j * m_j`` coordinates arranged as
        C^{n_j} (x) C^{m_j}, matrix factor first.
        """
        n = sum(bd * m for bd, m in layout)
        units: list[list[list[np.ndarray]]] = []
        zs: list[np.ndarray] = []
        offset = 0
        for bd, m in layout:
            size = bd * m
            f = [[np.zeros((n, n), dtype=complex) for _ in range(bd)] for _ in range(bd)]
            for a in range(bd):
                for b in range(bd):
                    local = np.kron(_unit_matrix(bd, a, b), la.eye(m))
                    f[a][b][offset : offset + size, offset : offset + size] = local
            units.append(f)
            z = np.zeros((n, n), dtype=complex)
            z[offset : offset + size, offset : offset + size] = la.eye(size)
            zs.append(z)
            offset += size
        return cls(n, list(layout), zs, units)

    @classmethod
    def from_generators(
        cls,
        mats: Sequence[np.ndarray],
        ambient_dim: int,
        tol: Tolerance = DEFAULT_TOL,
    ) -> "StarAlgebra":
        """Smallest unital *-algebra containing the generators.

        Closes the span under adjoints and products, then discovers the
        block structure.
        """
        n = int(ambient_dim)
        seed = [la.as_matrix(m) for m in mats]
        for m in seed:
            if m.shape != (n, n):
                raise PreconditionError(f"generator shape {m.shape} != ({n}, {n})")
        span = la.span_onb(list(seed) + [dag for dag in map(la.dagger, seed)] + [la.eye(n)], tol)
        for _ in range(n * n + 1):
            prods = [span[i] @ span[j] for i in range(len(span)) for j in range(len(span))]
            new = la.span_onb(list(span) + prods, tol)
            if new.shape[0] == span.shape[0]:
                return cls.from_span(new, tol)
            span = new
        raise InternalError("algebra closure did not stabilise")

    @classmethod
    def from_span(cls, onb: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> "StarAlgebra":
        """Structure discovery on a subspace already closed as a *-algebra."""
        n = onb.shape[1]
        zs = _minimal_central_projections(onb, tol)
        blocks: list[tuple[int, int]] = []
        units: list[list[list[np.ndarray]]] = []
        for z in zs:
            corner = la.span_onb([z @ b for b in onb], tol)
            bd2 = corner.shape[0]
            bd = int(round(np.sqrt(bd2)))
            if bd * bd != bd2:
                raise StructureError(f"block span dimension {bd2} is not a square")
            rank = float(np.trace(z).real)
            mult = int(round(rank / bd))
            if abs(rank - bd * mult) > 1e-6:
                raise StructureError(f"block rank {rank} not divisible by {bd}")
            blocks.append((bd, mult))
            units.append(_matrix_units_for_block(onb, z, bd, mult, tol))
        order = sorted(
            range(len(blocks)),
            key=lambda j: (blocks[j][0], tuple(np.round(zs[j].real.reshape(-1), 6))),
        )
        return cls(
            n,
            [blocks[j] for j in order],
            [zs[j] for j in order],
            [units[j] for j in order],
            tol,
        )

    @classmethod
    def commuting_product(cls, a: "StarAlgebra", b: "StarAlgebra") -> "StarAlgebra":
        """The algebra generated by two commuting subalgebras of one ambient.

        Assumes the multiplication map a (x) b -> a v b is injective (true
        for the tensor-split pairs produced by the tower constructions);
        matrix units multiply pairwise, so structure needs no rediscovery.
        A non-integer multiplicity gate trips when the assumption fails.
        """
        if a.ambient_dim != b.ambient_dim:
            raise PreconditionError("commuting product requires a common ambient")
        blocks: list[tuple[int, int]] = []
        zs: list[np.ndarray] = []
        units: list[list[list[np.ndarray]]] = []
        for (da, _), za, fa in zip(a.blocks, a.central_projections, a.matrix_units):
            for (db, _), zb, fb in zip(b.blocks, b.central_projections, b.matrix_units):
                z = za @ zb
                rank = float(np.trace(z).real)
                d = da * db
                mult = int(round(rank / d))
                if rank < 0.5 or abs(rank - d * mult) > 1e-6:
                    raise StructureError("commuting product is not a tensor split")
                g = [
                    [fa[p // db][q // db] @ fb[p % db][q % db] for q in range(d)]
                    for p in range(d)
                ]
                blocks.append((d, mult))
                zs.append(z)
                units.append(g)
        return cls(a.ambient_dim, blocks, zs, units, a.tol)

    @classmethod
    def tensor(cls, *factors: "StarAlgebra") -> "StarAlgebra":
        """Tensor product, blocks combined pairwise in factor order."""
        if len(factors) == 1:
            return factors[0]
        left = factors[0]
        for right in factors[1:]:
            n = left.ambient_dim * right.ambient_dim
            blocks: list[tuple[int, int]] = []
            zs: list[np.ndarray] = []
            units: list[list[list[np.ndarray]]] = []
            for (dl, ml), zl, fl in zip(left.blocks, left.central_projections, left.matrix_units):
                for (dr, mr), zr, fr in zip(
                    right.blocks, right.central_projections, right.matrix_units
                ):
                    blocks.append((dl * dr, ml * mr))
                    zs.append(np.kron(zl, zr))
                    f = [
                        [
                            np.kron(fl[a // dr][b // dr], fr[a % dr][b % dr])
                            for b in range(dl * dr)
                        ]
                        for a in range(dl * dr)
                    ]
                    units.append(f)
            left = cls(n, blocks, zs, units, left.tol)
        return left

    def image(self, phi: Callable[[np.ndarray], np.ndarray], ambient_dim: int) -> "StarAlgebra":
        """Image under a unital injective *-homomorphism into M_{ambient_dim}.

        Structure is propagated: matrix units map to matrix units, block
        dimensions are unchanged, multiplicities are re-read from the ranks
        of the mapped central projections.
        """
        blocks: list[tuple[int, int]] = []
        zs: list[np.ndarray] = []
        units: list[list[list[np.ndarray]]] = []
        for (bd, _), f in zip(self.blocks, self.matrix_units):
            g = [[phi(f[a][b]) for b in range(bd)] for a in range(bd)]
            z = sum(g[a][a] for a in range(bd))
            rank = float(np.trace(z).real)
            mult = int(round(rank / bd))
            if abs(rank - bd * mult) > 1e-6:
                raise StructureError("image multiplicity is not an integer")
            blocks.append((bd, mult))
            zs.append(z)
            units.append(g)
        return StarAlgebra(ambient_dim, blocks, zs, units, self.tol)

    def anti_image(
        self, phi: Callable[[np.ndarray], np.ndarray], ambient_dim: int
    ) -> "StarAlgebra":
        """Image under a unital injective *-anti-homomorphism.

        Anti-multiplicativity swaps the matrix-unit indices, so
        ``g[a][b] = phi(f[b][a])`` is again a system of matrix units.
        """
        blocks: list[tuple[int, int]] = []
        zs: list[np.ndarray] = []
        units: list[list[list[np.ndarray]]] = []
        for (bd, _), f in zip(self.blocks, self.matrix_units):
            g = [[phi(f[b][a]) for b in range(bd)] for a in range(bd)]
            z = sum(g[a][a] for a in range(bd))
            rank = float(np.trace(z).real)
            mult = int(round(rank / bd))
            if abs(rank - bd * mult) > 1e-6:
                raise StructureError("anti-image multiplicity is not an integer")
            blocks.append((bd, mult))
            zs.append(z)
            units.append(g)
        return StarAlgebra(ambient_dim, blocks, zs, units, self.tol)

    def conjugate_entrywise(self) -> "StarAlgebra":
        """The algebra {conj(x)} — conjugation by the canonical J in GNS coordinates."""
        return self.image(np.conj, self.ambient_dim)

    # -- basic queries -------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def coords(self, x: np.ndarray) -> np.ndarray:
        return la.span_coords(self.basis, x)

    def project(self, x: np.ndarray) -> np.ndarray:
        return la.span_project(self.basis, x)

    def contains(self, x: np.ndarray, tol: Tolerance | None = None) -> bool:
        return la.span_contains(self.basis, x, tol or self.tol)

    def membership_residual(self, x: np.ndarray) -> float:
        return la.span_residual(self.basis, x)

    def same_span(self, other: "StarAlgebra", tol: Tolerance | None = None) -> bool:
        tol = tol or self.tol
        if self.dim != other.dim or self.ambient_dim != other.ambient_dim:
            return False
        return all(other.contains(b, tol) for b in self.basis)

    def minimal_projection(self, block: int) -> np.ndarray:
        return self.matrix_units[block][0][0]

    @cached_property
    def center(self) -> "StarAlgebra":
        zs = self.central_projections
        units = [[[z]] for z in zs]
        return StarAlgebra(
            self.ambient_dim,
            [(1, int(round(np.trace(z).real))) for z in zs],
            zs,
            units,
            self.tol,
        )

    @cached_property
    def commutant(self) -> "StarAlgebra":
        """Relative commutant in the ambient M_n(C), built from matrix units.

        Within each block, ``sum_a f_{a0} c f_{0a}`` over a basis of
        operators c on the range of the corner projection ``f_00`` produces
        matrix units for the commutant, so no nullspace solve is needed.
        """
        n = self.ambient_dim
        blocks: list[tuple[int, int]] = []
        zs: list[np.ndarray] = []
        units: list[list[list[np.ndarray]]] = []
        for (bd, mult), z, f in zip(self.blocks, self.central_projections, self.matrix_units):
            corner = f[0][0]
            vals, vecs = np.linalg.eigh(corner)
            cols = vecs[:, vals > 0.5]
            if cols.shape[1] != mult:
                raise InternalError("corner projection rank disagrees with multiplicity")
            # xi[a][r] = f_{a0} eta_r; commutant units are sums of outer products
            xi = [[f[a][0] @ cols[:, r] for r in range(mult)] for a in range(bd)]
            g = [
                [
                    sum(np.outer(xi[a][r], np.conj(xi[a][s])) for a in range(bd))
                    for s in range(mult)
                ]
                for r in range(mult)
            ]
            blocks.append((mult, bd))
            zs.append(z)
            units.append(g)
        order = sorted(
            range(len(blocks)),
            key=lambda j: (blocks[j][0], tuple(np.round(zs[j].real.reshape(-1), 6))),
        )
        return StarAlgebra(
            n,
            [blocks[j] for j in order],
            [zs[j] for j in order],
            [units[j] for j in order],
            self.tol,
        )


def _unit_matrix(n: int, a: int, b: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=complex)
    m[a, b] = 1.0
    return m


def _center_span(onb: np.ndarray, tol: Tolerance) -> np.ndarray:
    """ONB of {x in span : [x, b] = 0 for all basis b}, solved in coordinates."""
    k, n, _ = onb.shape
    rows = []
    flat = onb.reshape(k, -1)
    for b in onb:
        comm = np.einsum("ij,kjl->kil", b, onb) - np.einsum("kij,jl->kil", onb, b)
        rows.append(comm.reshape(k, -1).T)  # (n^2, k) columns are commutators
    stacked = np.vstack(rows)
    coeffs = la.nullspace(stacked, tol)
    if not coeffs:
        raise InternalError("unital algebra has empty centre")
    mats = [np.tensordot(c, onb, axes=(0, 0)) for c in coeffs]
    return la.span_onb(mats, tol)


def _minimal_central_projections(onb: np.ndarray, tol: Tolerance) -> list[np.ndarray]:
    """Split the centre via a generic self-adjoint central element."""
    centre = _center_span(onb, tol)
    want = centre.shape[0]
    rng = la.rng_from(_STRUCTURE_SEED)
    sa = la.span_onb(
        [c + la.dagger(c) for c in centre] + [1j * (c - la.dagger(c)) for c in centre], tol
    )
    for _ in range(_MAX_DRAWS):
        coeffs = rng.standard_normal(sa.shape[0])
        g = np.tensordot(coeffs, sa, axes=(0, 0))
        g = (g + la.dagger(g)) / 2
        vals, vecs = np.linalg.eigh(g)
        support = np.abs(vals) > 1e-8  # ambient kernel is not part of the algebra
        groups = la.eigenvalue_clusters(vals[support], gap=1e-6 * max(1.0, vals.max() - vals.min()))
        if len(groups) != want:
            continue
        sup_vecs = vecs[:, support]
        zs = []
        ok = True
        for grp in groups:
            cols = sup_vecs[:, grp]
            z = cols @ la.dagger(cols)
            if la.span_residual(onb, z) > tol.bound(np.linalg.norm(z)) * 10:
                ok = False
                break
            zs.append(z)
        if ok:
            return zs
    raise InternalError("could not split the centre with a generic element")


def _matrix_units_for_block(
    onb: np.ndarray, z: np.ndarray, bd: int, mult: int, tol: Tolerance
) -> list[list[np.ndarray]]:
    """Matrix units of the factor z * algebra via generic spectral splitting."""
    rng = la.rng_from(_STRUCTURE_SEED + 1)
    if bd == 1:
        return [[z]]
    shift = 3.0
    for _ in range(_MAX_DRAWS):
        coeffs = rng.standard_normal(onb.shape[0])
        g = np.tensordot(coeffs, onb, axes=(0, 0))
        g = z @ g @ z
        g = (g + la.dagger(g)) / 2
        norm = max(np.linalg.norm(g), 1e-12)
        g = g / norm + shift * z  # push the block spectrum away from the ambient kernel
        vals, vecs = np.linalg.eigh(g)
        support = vals > shift / 2
        if int(np.sum(support)) != bd * mult:
            continue
        groups = la.eigenvalue_clusters(vals[support], gap=1e-7)
        if len(groups) != bd or any(len(grp) != mult for grp in groups):
            continue
        sup_vecs = vecs[:, support]
        ps = []
        for grp in groups:
            cols = sup_vecs[:, grp]
            ps.append(cols @ la.dagger(cols))
        # partial isometries p_a -> p_0 through a generic algebra element
        vs: list[np.ndarray] = [ps[0]]
        good = True
        for a in range(1, bd):
            v = None
            for _ in range(_MAX_DRAWS):
                rc = rng.standard_normal(onb.shape[0]) + 1j * rng.standard_normal(onb.shape[0])
                r = np.tensordot(rc, onb, axes=(0, 0))
                w = ps[a] @ r @ ps[0]
                sv = np.linalg.svd(w, compute_uv=False)
                if int(np.sum(sv > 1e-7)) == mult and sv[mult - 1] > 1e-7:
                    v = la.polar_partial_isometry(w, Tolerance(abs=1e-7, rel=0.0))
                    break
            if v is None:
                good = False
                break
            vs.append(v)
        if not good:
            continue
        f = [[vs[a] @ la.dagger(vs[b]) for b in range(bd)] for a in range(bd)]
        if _units_residual(f, z) < 1e-8 * bd:
            return f
    raise InternalError("matrix unit construction failed")


def _units_residual(f: list[list[np.ndarray]], z: np.ndarray) -> float:
    bd = len(f)
    res = np.linalg.norm(sum(f[a][a] for a in range(bd)) - z)
    for a in range(bd):
        res = max(res, np.linalg.norm(la.dagger(f[a][0]) - f[0][a]))
        for b in range(bd):
            res = max(res, np.linalg.norm(f[a][0] @ f[0][b] - f[a][b]))
    return float(res)


class Trace:
    """Tracial functional on a StarAlgebra, stored as block weights.

    ``weights[j]`` is the trace of a minimal projection of block j, so the
    evaluation density is ``rho = sum_j (weights[j] / m_j) z_j`` and
    faithful tracial states have strictly positive weights summing against
    block dimensions to 1.
    """

    def __init__(self, algebra: StarAlgebra, weights: Sequence[float]) -> None:
        if len(weights) != len(algebra.blocks):
            raise TraceError("one weight per block required")
        self.algebra = algebra
        self.weights = np.asarray(weights, dtype=float)
        rho = np.zeros((algebra.ambient_dim, algebra.ambient_dim), dtype=complex)
        for w, (bd, m), z in zip(self.weights, algebra.blocks, algebra.central_projections):
            rho = rho + (w / m) * z
        self.density = rho

    @classmethod
    def normalized(cls, algebra: StarAlgebra) -> "Trace":
        """tau(x) = Tr(x) / n, restricted to the algebra."""
        n = algebra.ambient_dim
        return cls(algebra, [m / n for _, m in algebra.blocks])

    def __call__(self, x: np.ndarray) -> complex:
        return complex(np.sum(self.density.T * x))

    def is_state(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return abs(self(self.algebra.unit) - 1.0) <= tol.bound()

    def is_faithful(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return bool(np.all(self.weights > tol.abs))

    def sa_onb(self) -> np.ndarray:
        """Self-adjoint basis of the algebra orthonormal for <x,y> = tau(y* x)."""
        return _tau_onb(self.algebra.basis, self)

    def restrict(self, sub: StarAlgebra) -> "Trace":
        """Restriction to a subalgebra, re-expressed through its own blocks."""
        weights = [self(sub.minimal_projection(j)).real for j in range(len(sub.blocks))]
        return Trace(sub, weights)


def _tau_onb(basis: np.ndarray, trace: Trace) -> np.ndarray:
    """Rotate a self-adjoint ONB into tau-orthonormal form via the real Gram matrix."""
    weighted = np.einsum("ab,kbc->kac", trace.density, basis)  # rho b_k
    gram = np.einsum("kac,lca->kl", weighted, basis).real  # tr(rho b_k b_l)
    vals, vecs = np.linalg.eigh(gram)
    if np.min(vals) <= 0:
        raise TraceError("trace inner product is not positive definite (non-faithful trace)")
    inv_root = (vecs / np.sqrt(vals)) @ vecs.T
    return np.einsum("kl,lab->kab", inv_root, basis)


class Superoperator:
    """Linear map between star algebras, checked through its Choi matrix.

    The map is stored as a callable on ambient matrices of the domain; the
    UCP test extends it to the full ambient by precomposing with the
    trace-preserving expectation onto the domain (which preserves complete
    positivity in both directions).
    """

    def __init__(
        self,
        domain: StarAlgebra,
        codomain: StarAlgebra,
        apply: Callable[[np.ndarray], np.ndarray],
        domain_trace: Trace | None = None,
        ad_unitary: np.ndarray | None = None,
    ) -> None:
        self.domain = domain
        self.codomain = codomain
        self._apply = apply
        self.domain_trace = domain_trace or Trace.normalized(domain)
        self.ad_unitary = ad_unitary

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self._apply(x)

    @cached_property
    def _domain_onb(self) -> np.ndarray:
        return _tau_onb(self.domain.basis, self.domain_trace)

    @cached_property
    def _domain_weighted(self) -> np.ndarray:
        return np.einsum("ab,kbc->kac", self.domain_trace.density, self._domain_onb)

    def extended(self, x: np.ndarray) -> np.ndarray:
        """Apply to an arbitrary ambient matrix via the expectation onto the domain."""
        coeffs = np.einsum("kij,ji->k", self._domain_weighted, x)
        proj = np.einsum("k,kab->ab", coeffs, self._domain_onb)
        return self._apply(proj)

    @cached_property
    def choi(self) -> np.ndarray:
        """Choi matrix of the extended map on the full domain ambient."""
        nd = self.domain.ambient_dim
        nc = self.codomain.ambient_dim
        choi = np.zeros((nd * nc, nd * nc), dtype=complex)
        for i in range(nd):
            for j in range(nd):
                img = self.extended(_unit_matrix(nd, i, j))
                choi[i * nc : (i + 1) * nc, j * nc : (j + 1) * nc] = img
        return choi

    def coord_matrix(self, dom_onb: np.ndarray, cod_onb: np.ndarray) -> np.ndarray:
        """Action matrix between given HS-orthonormal bases."""
        cols = [la.span_coords(cod_onb, self._apply(b)) for b in dom_onb]
        return np.stack(cols, axis=1)

    def is_unital(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return tol.close(self._apply(self.domain.unit), self.codomain.unit)

    def is_cp(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        if self.ad_unitary is not None:
            return la.is_unitary(self.ad_unitary, tol)
        return la.is_psd(self.choi, tol)

    def is_ucp(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return self.is_unital(tol) and self.is_cp(tol)


def conditional_expectation_onto(
    sub: StarAlgebra, ambient: StarAlgebra, trace: Trace
) -> Superoperator:
    """tau-preserving conditional expectation from ``ambient`` onto ``sub``.

    Realised as the orthogonal projection for <x, y> = tau(y* x); the
    bimodule and complete-positivity properties follow and are exercised in
    the test suite rather than re-derived here.
    """
    sub_trace = trace.restrict(sub)
    onb = _tau_onb(sub.basis, sub_trace)
    weighted = np.einsum("ab,kbc->kac", trace.density, onb)  # rho c_k, fixed once

    def apply(x: np.ndarray) -> np.ndarray:
        coeffs = np.einsum("kij,ji->k", weighted, x)  # tau(c_k x)
        return np.einsum("k,kab->ab", coeffs, onb)

    return Superoperator(ambient, sub, apply, domain_trace=trace)


def intersect(a: StarAlgebra, b: StarAlgebra, tol: Tolerance = DEFAULT_TOL) -> StarAlgebra:
    """Intersection of two *-subalgebras of the same ambient."""
    if a.ambient_dim != b.ambient_dim:
        raise PreconditionError("intersect requires a common ambient")
    fa = a.basis.reshape(a.dim, -1)
    fb = b.basis.reshape(b.dim, -1)
    stacked = np.hstack([fa.T, -fb.T])
    sols = la.nullspace(stacked, tol)
    mats = [
        np.tensordot(sol[: a.dim], a.basis, axes=(0, 0)) for sol in sols
    ]
    span = la.span_onb(mats, tol)
    if span.shape[0] == 0:
        raise InternalError("intersection of unital algebras lost the unit")
    return StarAlgebra.from_span(span, tol)


def scalar_decompose_cp_family(
    maps: Sequence[Superoperator],
    algebra: StarAlgebra,
    tol: Tolerance = DEFAULT_TOL,
) -> np.ndarray:
    """Scalars mu[i, j] with each map acting as mu[i, j] * id on central block j.

    Requires each map completely positive on the algebra with the family
    summing to the identity; a CP summand that is not scalar on some block
    raises :class:`NotScalarError` (impossible for valid input).
    """
    onb = algebra.basis
    total = [sum(m(b) for m in maps) for b in onb]
    if max(np.linalg.norm(t - b) for t, b in zip(total, onb)) > tol.bound(1.0) * len(onb):
        raise PreconditionError("family does not sum to the identity map")
    mu = np.zeros((len(maps), len(algebra.blocks)))
    for j, z in enumerate(algebra.central_projections):
        block = la.span_onb([z @ b for b in onb], tol)
        for i, m in enumerate(maps):
            imgs = np.stack([m(b) for b in block])
            scal = np.einsum("kij,kij->", np.conj(block), imgs) / block.shape[0]
            resid = np.linalg.norm(imgs - scal * block)
            if resid > tol.bound(1.0) * block.shape[0]:
                raise NotScalarError(f"map {i} is not scalar on block {j}")
            if scal.real < -tol.abs or abs(scal.imag) > tol.abs:
                raise NotScalarError(f"map {i} has non-positive scalar on block {j}")
            mu[i, j] = max(scal.real, 0.0)
    if np.max(np.abs(mu.sum(axis=0) - 1.0)) > tol.bound(1.0) * len(maps):
        raise PreconditionError("block scalars do not sum to one")
    for m in maps:
        if not m.is_cp(tol):
            raise PreconditionError("family member is not completely positive")
    return mu
