"""Least-squares polynomial reconstruction from one sample per element.

Every element K gets a table of element-local shape functions: row j of
``LocalBasis.coeffs`` holds the monomial coefficients (in the scaled local
frame ``y = (x - x_K) / d_K``) of the shape function attached to sampling
node j of the patch of K.  The table is the transposed minimum-norm
least-squares solution operator of the node-value fitting problem, so for
node data q the reconstructed polynomial on K is ``q @ coeffs`` in monomial
coordinates.

The scaled frame keeps the Vandermonde matrix well conditioned; without it
the normal equations blow up for degree >= 3 on fine meshes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import RankDeficient
from .mesh import all_geometries
from .patch import Patch, build_patch, default_patch_size, grow_patch

RCOND = 1e-10  # numerical-rank threshold for unisolvence


@dataclass(frozen=True)
class MonomialBasis:
    """Monomials of total degree <= m in ``dim`` variables.

    Ordering is graded lexicographic: ascending total degree, and inside a
    degree descending lexicographic exponent tuples (so 1; x, y; x^2, xy,
    y^2; ...).  The ordering is part of the coefficient-table contract.
    """

    m: int
    dim: int
    exponents: np.ndarray  # (n_terms, dim) int

    def __len__(self):
        return len(self.exponents)


@lru_cache(maxsize=None)
def monomial_basis(m, dim):
    exps = []
    for deg in range(m + 1):
        if dim == 1:
            exps.append((deg,))
        elif dim == 2:
            for i in range(deg, -1, -1):
                exps.append((i, deg - i))
        else:
            for i in range(deg, -1, -1):
                for j in range(deg - i, -1, -1):
                    exps.append((i, j, deg - i - j))
    return MonomialBasis(m, dim, np.array(exps, dtype=int))


def vandermonde(basis, points):
    """V[p, j] = y_p ** alpha_j  (row per point, column per monomial)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return np.prod(pts[:, None, :] ** basis.exponents[None, :, :], axis=2)


@lru_cache(maxsize=None)
def _derivative_operators(m, dim):
    """D[d] maps monomial coefficient vectors to those of d/dy_d.

    Acting on a coefficient row c (length n_terms): (c @ D[d].T).
    """
    basis = monomial_basis(m, dim)
    index = {tuple(e): i for i, e in enumerate(basis.exponents)}
    n = len(basis)
    ops = []
    for d in range(dim):
        D = np.zeros((n, n))
        for i, e in enumerate(basis.exponents):
            if e[d] > 0:
                lowered = list(e)
                lowered[d] -= 1
                D[index[tuple(lowered)], i] = e[d]
        ops.append(D)
    return ops


@lru_cache(maxsize=None)
def _laplacian_operator(m, dim):
    ops = _derivative_operators(m, dim)
    return sum(D @ D for D in ops)


@dataclass
class LocalBasis:
    """Shape functions of one element in its scaled local frame."""

    element: int
    patch: Patch
    coeffs: np.ndarray  # (t, n_terms)
    scale: float        # d_K
    origin: np.ndarray  # x_K
    basis: MonomialBasis

    def _scaled(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return (pts - self.origin) / self.scale

    def values(self, points):
        """(n_pts, t) shape-function values."""
        return vandermonde(self.basis, self._scaled(points)) @ self.coeffs.T

    def gradients(self, points):
        """(n_pts, t, dim) physical gradients."""
        V = vandermonde(self.basis, self._scaled(points))
        ops = _derivative_operators(self.basis.m, self.basis.dim)
        cols = [V @ (self.coeffs @ D.T).T / self.scale for D in ops]
        return np.stack(cols, axis=-1)

    def laplacians(self, points):
        """(n_pts, t) physical Laplacians."""
        V = vandermonde(self.basis, self._scaled(points))
        L = _laplacian_operator(self.basis.m, self.basis.dim)
        return V @ (self.coeffs @ L.T).T / self.scale ** 2

    def grad_laplacians(self, points):
        """(n_pts, t, dim) physical gradients of the Laplacian."""
        V = vandermonde(self.basis, self._scaled(points))
        ops = _derivative_operators(self.basis.m, self.basis.dim)
        L = _laplacian_operator(self.basis.m, self.basis.dim)
        cols = [V @ (self.coeffs @ (D @ L).T).T / self.scale ** 3 for D in ops]
        return np.stack(cols, axis=-1)

    def hessians(self, points):
        """(n_pts, t, dim, dim) physical second derivatives."""
        V = vandermonde(self.basis, self._scaled(points))
        ops = _derivative_operators(self.basis.m, self.basis.dim)
        dim = self.basis.dim
        n_pts, t = V.shape[0], self.coeffs.shape[0]
        H = np.empty((n_pts, t, dim, dim))
        for a in range(dim):
            for b in range(dim):
                C = self.coeffs @ (ops[b] @ ops[a]).T
                H[:, :, a, b] = V @ C.T / self.scale ** 2
        return H


def fit_local(patch, m):
    """Solve the sampling-node least-squares fit of degree m on a patch.

    Raises RankDeficient when the numerical rank of the node Vandermonde
    matrix falls short of dim P^m (unisolvence failure).
    """
    dim = patch.nodes.shape[1]
    basis = monomial_basis(m, dim)
    if patch.size < len(basis):
        raise RankDeficient(
            f"patch of element {patch.center} has {patch.size} nodes, "
            f"needs at least {len(basis)} for degree {m}"
        )
    origin = patch.nodes[0]
    scale = patch.diameter if patch.diameter > 0 else 1.0
    A = vandermonde(basis, (patch.nodes - origin) / scale)
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s[-1] <= RCOND * s[0]:
        raise RankDeficient(f"patch of element {patch.center} is numerically rank deficient")
    pinv = (Vt.T / s) @ U.T
    return LocalBasis(patch.center, patch, pinv.T.copy(), scale, origin.copy(), basis)


def eval_shape(basis, points, deriv=0):
    """Evaluate a LocalBasis at points.

    deriv=0 returns values (n_pts, t); deriv=1 gradients (n_pts, t, dim);
    deriv=2 a (hessians, laplacians) pair.
    """
    if deriv == 0:
        return basis.values(points)
    if deriv == 1:
        return basis.gradients(points)
    if deriv == 2:
        return basis.hessians(points), basis.laplacians(points)
    raise ValueError("deriv must be 0, 1 or 2")


class ReconstructedSpace:
    """All per-element shape tables plus the support map.

    ``support[j]`` lists every element K whose patch contains element j;
    it is exactly the sparsity coupling of DOF j in assembled matrices.
    """

    def __init__(self, mesh, topology, m, t, bases, patches, geometries):
        self.mesh = mesh
        self.topology = topology
        self.m = m
        self.t = t
        self.bases = bases
        self.patches = patches
        self.geometries = geometries
        support = [[] for _ in range(mesh.num_elements)]
        for K, patch in enumerate(patches):
            for j in patch.members:
                support[j].append(K)
        self.support = support

    @property
    def num_dofs(self):
        return self.mesh.num_elements

    def members(self, K):
        return self.patches[K].members

    def evaluate(self, vector, K, points, deriv=0):
        """Evaluate the reconstructed field with DOF samples ``vector`` on
        element K (polynomial extension: points need not lie inside K)."""
        coef = np.asarray(vector, dtype=float)[self.members(K)]
        basis = self.bases[K]
        if deriv == 0:
            return basis.values(points) @ coef
        if deriv == 1:
            return np.einsum("ptd,t->pd", basis.gradients(points), coef)
        if deriv == 2:
            return basis.laplacians(points) @ coef
        raise ValueError("deriv must be 0, 1 or 2")

    def dump_coefficients_csv(self, path):
        """Debug dump: element id, node id, monomial exponents, coefficient."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["element", "node", "exponents", "coefficient"])
            for K, basis in enumerate(self.bases):
                for j, dof in enumerate(basis.patch.members):
                    for a, e in enumerate(basis.basis.exponents):
                        writer.writerow(
                            [K, dof, " ".join(map(str, e)), "%.17g" % basis.coeffs[j, a]]
                        )


def _fit_with_retry(mesh, topology, patch, m, barycenters, retries=3):
    from .patch import PatchExhausted

    for _ in range(retries):
        try:
            return fit_local(patch, m), patch
        except RankDeficient:
            try:
                patch = grow_patch(mesh, topology, patch, barycenters)
            except PatchExhausted:
                raise RankDeficient(
                    f"element {patch.center}: sampling nodes stay rank deficient "
                    f"and the mesh has no further elements to grow into"
                ) from None
    return fit_local(patch, m), patch  # last attempt; propagates RankDeficient


def build_space(mesh, topology, m, t=None, threads=1):
    """Fit one LocalBasis per element and build the support map.

    Rank-deficient patches are grown by a full neighbor ring up to three
    times before the failure propagates with the offending element id.
    """
    if m < 0:
        raise ValueError("degree must be >= 0")
    if t is None:
        t = default_patch_size(m, mesh.dim) if m >= 1 else 1
    geoms = all_geometries(mesh)
    barycenters = np.array([g.barycenter for g in geoms])

    def fit_one(K):
        patch = build_patch(mesh, topology, K, t, barycenters)
        return _fit_with_retry(mesh, topology, patch, m, barycenters)

    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(fit_one, range(mesh.num_elements)))
    else:
        results = [fit_one(K) for K in range(mesh.num_elements)]
    bases = [r[0] for r in results]
    patches = [r[1] for r in results]
    return ReconstructedSpace(mesh, topology, m, t, bases, patches, geoms)


def interpolate(space, g):
    """Sample a scalar field at every element's node: the DOF vector of R g."""
    return np.array([float(g(*x)) for x in (p.nodes[0] for p in space.patches)])
