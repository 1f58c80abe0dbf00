"""Dense complex linear algebra primitives consumed by every other module.

Conventions, fixed globally:

* matrices are numpy ``complex128`` arrays in the row-major computational
  basis; a Kronecker product ``kron(a, b)`` indexes ``(i, j) -> i * dim_b + j``;
* tensor legs are numbered from 0, left to right;
* "equal" always means equal within a :class:`Tolerance` on Frobenius norms;
* rank decisions (nullspace, Gram-Schmidt drops) compare singular values
  against the absolute tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConnectednessError, DimensionError

DEFAULT_SEED = 42
_active_seed = DEFAULT_SEED


def set_default_seed(seed: int) -> None:
    """Set the seed used by randomized verification sampling (CLI --seed)."""
    global _active_seed
    _active_seed = int(seed)


@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative Frobenius-norm thresholds used by every comparison.

    ``a`` and ``b`` count as equal when ``||a - b||_F <= abs + rel * scale``
    with ``scale`` the larger of the two norms.
    """

    abs: float = 1e-9
    rel: float = 1e-9

    def __post_init__(self) -> None:
        if self.abs < 0 or self.rel < 0 or (self.abs == 0 and self.rel == 0):
            raise ValueError("Tolerance needs abs > 0 or rel > 0, both nonnegative")

    def bound(self, scale: float = 1.0) -> float:
        return self.abs + self.rel * scale

    def close(self, a: np.ndarray, b: np.ndarray) -> bool:
        scale = max(np.linalg.norm(a), np.linalg.norm(b))
        return float(np.linalg.norm(a - b)) <= self.bound(scale)

    def iszero(self, a: np.ndarray) -> bool:
        return float(np.linalg.norm(a)) <= self.abs


DEFAULT_TOL = Tolerance()


def rng_from(seed: int | np.random.Generator | None) -> np.random.Generator:
    """Coerce a seed or generator into a Generator (``None`` -> active seed)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(_active_seed if seed is None else seed)


def as_matrix(x: object) -> np.ndarray:
    """Validate and return a finite complex matrix."""
    m = np.asarray(x, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {m.shape}")
    if not (np.all(np.isfinite(m.real)) and np.all(np.isfinite(m.imag))):
        raise ValueError("matrix has NaN or Inf entries")
    return m


def dagger(x: np.ndarray) -> np.ndarray:
    return np.conj(x.T)


def kron(*mats: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex)


def frobenius_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b))


def trace_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Unnormalised Hilbert-Schmidt inner product Tr(a^dagger b)."""
    return complex(np.sum(np.conj(a) * b))


def max_entangled(n: int) -> np.ndarray:
    """Unit vector n^{-1/2} sum_i |ii> in C^n (x) C^n."""
    psi = np.zeros(n * n, dtype=complex)
    psi[:: n + 1] = 1.0 / np.sqrt(n)
    return psi


def partial_trace(
    x: np.ndarray,
    dims: Sequence[int],
    legs: Iterable[int],
    normalise: bool = False,
) -> np.ndarray:
    """Trace out the tensor legs named in ``legs`` (0-based).

    ``dims`` lists the leg dimensions whose product must equal the matrix
    dimension.  With ``normalise`` the result is divided by the traced
    dimension, turning Tr on those legs into the normalised trace.
    """
    x = as_matrix(x)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if x.shape != (total, total):
        raise DimensionError(f"matrix shape {x.shape} does not match dims {dims}")
    legs = sorted(set(int(l) for l in legs))
    if any(l < 0 or l >= len(dims) for l in legs):
        raise DimensionError(f"legs {legs} out of range for {len(dims)} legs")
    k = len(dims)
    tensor = x.reshape(dims + dims)
    for offset, leg in enumerate(legs):
        axis = leg - offset  # earlier traces shrink the index space
        rank = tensor.ndim // 2
        tensor = np.trace(tensor, axis1=axis, axis2=axis + rank)
    traced_dim = int(np.prod([dims[l] for l in legs])) if legs else 1
    keep = [dims[i] for i in range(k) if i not in legs]
    side = int(np.prod(keep)) if keep else 1
    out = tensor.reshape(side, side)
    if normalise:
        out = out / traced_dim
    return out


def hs_gram_schmidt(
    mats: Sequence[np.ndarray],
    density: np.ndarray | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> list[np.ndarray]:
    """Orthonormalise matrices with respect to <x, y> = tr(rho y^dagger x).

    ``density`` is the positive matrix rho defining the trace functional
    (``None`` means the unnormalised trace).  Vectors whose residual norm
    falls below the absolute tolerance are dropped, so the output length
    reports the rank.
    """
    out: list[np.ndarray] = []

    def inner(a: np.ndarray, b: np.ndarray) -> complex:
        prod = dagger(b) @ a
        return complex(np.trace(prod if density is None else density @ prod))

    for m in mats:
        v = np.array(m, dtype=complex)
        for _ in range(2):  # re-orthogonalisation pass for stability
            for u in out:
                v = v - inner(v, u) * u
        norm = np.sqrt(abs(inner(v, v)))
        if norm > tol.abs:
            out.append(v / norm)
    return out


def nullspace(a: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> list[np.ndarray]:
    """Orthonormal basis of {v : a v = 0}, singular values <= tol.abs as zero."""
    a = as_matrix(a)
    if a.size == 0:
        return []
    _, s, vh = np.linalg.svd(a)
    rank = int(np.sum(s > tol.abs))
    return [vh[i].conj() for i in range(rank, vh.shape[0])]


def pf_eigenvector(a: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> tuple[float, np.ndarray]:
    """Perron-Frobenius data of a nonnegative irreducible matrix.

    Returns the spectral radius together with the strictly positive
    eigenvector normalised to unit 1-norm.  Reducible input raises
    :class:`ConnectednessError`.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError("pf_eigenvector expects a square matrix")
    if np.any(a < -tol.abs):
        raise ValueError("pf_eigenvector expects entrywise nonnegative input")
    n = a.shape[0]
    reach = np.linalg.matrix_power(np.eye(n) + (a > tol.abs), max(n - 1, 1))
    if np.any(reach <= 0):
        raise ConnectednessError("matrix is reducible")
    vals, vecs = np.linalg.eig(a)
    idx = int(np.argmax(vals.real))
    top = float(vals[idx].real)
    v = vecs[:, idx].real
    if v.sum() < 0:
        v = -v
    if np.any(v <= 0):
        raise ConnectednessError("Perron vector not strictly positive")
    return top, v / v.sum()


def hermitian_eigendecomposition(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvector columns of a Hermitian matrix."""
    return np.linalg.eigh(a)


def eigenvalue_clusters(values: np.ndarray, gap: float) -> list[np.ndarray]:
    """Group sorted real values into clusters separated by more than ``gap``.

    Returns index arrays into the original (sorted) ordering.
    """
    order = np.argsort(values)
    clusters: list[list[int]] = [[int(order[0])]]
    for i in order[1:]:
        if values[i] - values[clusters[-1][-1]] > gap:
            clusters.append([])
        clusters[-1].append(int(i))
    return [np.array(c) for c in clusters]


def matrix_sqrt(p: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Principal square root of a PSD matrix (tiny negative eigenvalues clipped)."""
    p = as_matrix(p)
    vals, vecs = np.linalg.eigh((p + dagger(p)) / 2)
    scale = max(1.0, float(np.max(np.abs(vals))) if vals.size else 1.0)
    if np.min(vals) < -tol.bound(scale):
        raise ValueError("matrix_sqrt input is not PSD")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ dagger(vecs)


def polar_unitary(x: np.ndarray) -> np.ndarray:
    """Unitary factor of an invertible matrix via SVD."""
    u, _, vh = np.linalg.svd(x)
    return u @ vh


def polar_partial_isometry(x: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Partial isometry factor of x; singular values <= tol.abs treated as zero."""
    u, s, vh = np.linalg.svd(x)
    rank = int(np.sum(s > tol.abs))
    return u[:, :rank] @ vh[:rank, :]


def is_hermitian(x: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    return tol.close(x, dagger(x))


def is_projection(x: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    return is_hermitian(x, tol) and tol.close(x @ x, x)


def is_unitary(x: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    n = x.shape[0]
    return x.shape[0] == x.shape[1] and tol.close(dagger(x) @ x, eye(n))


def is_psd(x: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    if not is_hermitian(x, tol):
        return False
    vals = np.linalg.eigvalsh((x + dagger(x)) / 2)
    scale = max(1.0, float(np.max(np.abs(vals))) if vals.size else 1.0)
    return bool(np.min(vals) >= -tol.bound(scale))


def random_hermitian(n: int, rng: np.random.Generator | int | None = None) -> np.ndarray:
    rng = rng_from(rng)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (g + dagger(g)) / 2


def random_density(n: int, rng: np.random.Generator | int | None = None) -> np.ndarray:
    rng = rng_from(rng)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = g @ dagger(g)
    return rho / np.trace(rho)


def random_unitary(n: int, rng: np.random.Generator | int | None = None) -> np.ndarray:
    rng = rng_from(rng)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# ---------------------------------------------------------------------------
# Span utilities: operator subspaces as stacks of HS-orthonormal matrices.
# ---------------------------------------------------------------------------


def span_onb(mats: Sequence[np.ndarray], tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """HS-orthonormal basis of the span, returned as a (k, n, n) stack.

    Uses an SVD on the stacked vectorisations, so the result is canonical up
    to the usual SVD sign/phase conventions and rank cuts at tol.abs.
    """
    mats = [as_matrix(m) for m in mats]
    if not mats:
        return np.zeros((0, 0, 0), dtype=complex)
    n = mats[0].shape[0]
    flat = np.stack([m.reshape(-1) for m in mats])
    _, s, vh = np.linalg.svd(flat, full_matrices=False)
    rank = int(np.sum(s > tol.abs))
    return vh[:rank].reshape(rank, n, mats[0].shape[1])


def span_coords(onb: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Coordinates of x against an HS-orthonormal stack."""
    return np.einsum("kij,ij->k", np.conj(onb), x)


def span_project(onb: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.einsum("k,kij->ij", span_coords(onb, x), onb)


def span_residual(onb: np.ndarray, x: np.ndarray) -> float:
    """Frobenius distance from x to the span."""
    return frobenius_distance(x, span_project(onb, x))


def span_contains(onb: np.ndarray, x: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    return span_residual(onb, x) <= tol.bound(float(np.linalg.norm(x)))


def product_span(a: np.ndarray, b: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """HS-orthonormal basis of span{x y : x in a, y in b} from ONB stacks."""
    prods = [x @ y for x in a for y in b]
    return span_onb(prods, tol)


def intertwiner_space(
    pairs: Sequence[tuple[np.ndarray, np.ndarray]],
    dim: int,
    tol: Tolerance = DEFAULT_TOL,
) -> list[np.ndarray]:
    """Solve {X : X a = b X for every (a, b) pair} as matrices on C^dim.

    Returns an HS-orthonormal basis of the solution space.  Used for
    extracting unitaries that implement given automorphisms.
    """
    blocks = []
    ident = eye(dim)
    for a, b in pairs:
        # row-major vec: vec(X a) = (1 (x) a^T) vec X, vec(b X) = (b (x) 1) vec X
        blocks.append(np.kron(ident, a.T) - np.kron(b, ident))
    stacked = np.vstack(blocks) if blocks else np.zeros((0, dim * dim), dtype=complex)
    vecs = nullspace(stacked, tol)
    return [v.reshape(dim, dim) for v in vecs]


def generic_invertible(
    basis: Sequence[np.ndarray],
    rng: np.random.Generator | int | None = None,
    attempts: int = 8,
    sigma_gate: float = 1e-6,
) -> np.ndarray | None:
    """Seeded random combination of ``basis`` with smallest singular value
    above ``sigma_gate``; ``None`` when no attempt succeeds."""
    rng = rng_from(rng)
    for _ in range(attempts):
        coeffs = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
        cand = sum(c * m for c, m in zip(coeffs, basis))
        cand = cand / max(np.linalg.norm(cand), 1e-30)
        if np.linalg.svd(cand, compute_uv=False)[-1] > sigma_gate:
            return cand
    return None
