"""Symmetric interior penalty assembly over the reconstructed space.

One DOF per element: matrix row/column j is the sampled value on element j.
Element K couples every DOF in its patch, so local face blocks live on the
union of the two side patches and global sparsity is the support-overlap
graph of the space.

Only the lower triangle is stored (SymSparseMatrix), which makes symmetry
exact by construction.  Local blocks are numerically symmetrized before
scattering so the stored triangle is the symmetric representative.

Boundary faces use one-sided traces and enforce the essential conditions
weakly (Nitsche style): v = 0 for the second-order form, v = dv/dn = 0 for
the clamped fourth-order form.  The simply supported fourth-order variant
keeps only the value-jump consistency terms and the value-jump penalty on
boundary faces, since the normal derivative is unconstrained there and the
second Laplace trace is a natural condition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DegreeTooLow
from .quadrature import element_rule, face_rule


@dataclass
class FormConfig:
    """Penalty bases and boundary-condition mode for one bilinear form.

    Effective penalties scale with the degree: eta * m^2 for the value jump
    of the second-order form, alpha * m^4 and beta * m^2 for the value and
    gradient jumps of the fourth-order form.
    """

    problem: str = "laplace"           # laplace | biharmonic
    bc: str = "homogeneous_dirichlet"  # homogeneous_dirichlet | clamped | simply_supported
    m: int = 1
    eta: float = 5.5
    alpha: float = 5.0
    beta: float = 2.5

    def __post_init__(self):
        if self.problem not in ("laplace", "biharmonic"):
            raise ValueError(f"unknown problem {self.problem!r}")
        if self.problem == "laplace":
            if self.bc != "homogeneous_dirichlet":
                raise ValueError("the second-order form supports homogeneous Dirichlet only")
            if self.m < 1:
                raise ValueError("degree must be >= 1 for the second-order form")
        else:
            if self.bc not in ("clamped", "simply_supported"):
                raise ValueError(f"unknown biharmonic bc {self.bc!r}")
        if min(self.eta, self.alpha, self.beta) <= 0.0:
            raise ValueError("penalty bases must be positive")

    @property
    def p(self):
        return 1 if self.problem == "laplace" else 2


class SymSparseMatrix:
    """Symmetric sparse matrix stored as its lower triangle."""

    def __init__(self, n, lower):
        self.n = n
        self.lower = lower.tocsr()
        self.lower.sum_duplicates()

    @classmethod
    def from_triplets(cls, n, rows, cols, vals):
        lower = sp.coo_matrix((vals, (rows, cols)), shape=(n, n))
        return cls(n, lower)

    def full(self):
        """Expand to a symmetric CSR matrix."""
        up = self.lower.T.tocsr()
        return self.lower + up - sp.diags(self.lower.diagonal())

    def dense(self):
        return self.full().toarray()

    def quadratic_form(self, v):
        return float(v @ (self.full() @ v))

    @property
    def nnz(self):
        return self.lower.nnz

    def export_text(self, path):
        """Coordinate text export: one 0-based "row col value" per line for
        every stored entry of the full symmetric matrix."""
        full = self.full().tocoo()
        with open(path, "w") as fh:
            for r, c, v in zip(full.row, full.col, full.data):
                fh.write(f"{r} {c} %.17g\n" % v)


class _Accumulator:
    def __init__(self, n):
        self.n = n
        self.rows = []
        self.cols = []
        self.vals = []

    def add_block(self, ids, block):
        """Scatter a symmetric local block; keeps entries with row >= col."""
        ids = np.asarray(ids)
        block = 0.5 * (block + block.T)
        R = np.repeat(ids, len(ids))
        C = np.tile(ids, len(ids))
        keep = R >= C
        self.rows.append(R[keep])
        self.cols.append(C[keep])
        self.vals.append(block.ravel()[keep])

    def build(self):
        if not self.rows:
            return SymSparseMatrix.from_triplets(self.n, [], [], [])
        return SymSparseMatrix.from_triplets(
            self.n,
            np.concatenate(self.rows),
            np.concatenate(self.cols),
            np.concatenate(self.vals),
        )


def _face_coords(space, f):
    return space.mesh.vertices[list(space.topology.faces[f])]


def _face_sides(space, f):
    kp, km = space.topology.sides[f]
    return int(kp), int(km)


# --------------------------------------------------------------------------
# stiffness and mass
# --------------------------------------------------------------------------

def assemble_laplace(space, config, elements=None, faces=None):
    """Stiffness matrix of the second-order interior penalty form."""
    if config.problem != "laplace":
        raise ValueError("config.problem must be 'laplace'")
    _check_degree(space, config)
    quad_order = 2 * space.m
    eta = config.eta * config.m ** 2 * _dim_factor(space)
    acc = _Accumulator(space.num_dofs)

    for K in _iter(elements, space.num_dofs):
        pts, wts = element_rule(space.geometries[K], quad_order)
        G = space.bases[K].gradients(pts)
        acc.add_block(space.members(K), np.einsum("qad,q,qbd->ab", G, wts, G))

    topo = space.topology
    for f in _iter(faces, topo.num_faces):
        pts, wts = face_rule(space.mesh.dim, quad_order, _face_coords(space, f))
        n = topo.normals[f]
        kp, km = _face_sides(space, f)
        bp = space.bases[kp]
        if km >= 0:
            bm = space.bases[km]
            ids = space.members(kp) + space.members(km)
            J = np.hstack([bp.values(pts), -bm.values(pts)])
            AG = 0.5 * np.hstack([bp.gradients(pts) @ n, bm.gradients(pts) @ n])
        else:
            ids = space.members(kp)
            J = bp.values(pts)
            AG = bp.gradients(pts) @ n
        E = np.einsum("qa,q,qb->ab", AG, wts, J)
        block = -(E + E.T) + (eta / topo.h_e[f]) * np.einsum("qa,q,qb->ab", J, wts, J)
        acc.add_block(ids, block)
    return acc.build()


def assemble_biharmonic(space, config, elements=None, faces=None):
    """Stiffness matrix of the fourth-order interior penalty form."""
    if config.problem != "biharmonic":
        raise ValueError("config.problem must be 'biharmonic'")
    if space.m < 2 or config.m < 2:
        raise DegreeTooLow("the fourth-order form needs degree >= 2")
    _check_degree(space, config)
    quad_order = 2 * space.m
    alpha = config.alpha * config.m ** 4 * _dim_factor(space)
    beta = config.beta * config.m ** 2 * _dim_factor(space)
    simply_supported = config.bc == "simply_supported"
    acc = _Accumulator(space.num_dofs)

    for K in _iter(elements, space.num_dofs):
        pts, wts = element_rule(space.geometries[K], quad_order)
        L = space.bases[K].laplacians(pts)
        acc.add_block(space.members(K), np.einsum("qa,q,qb->ab", L, wts, L))

    topo = space.topology
    for f in _iter(faces, topo.num_faces):
        pts, wts = face_rule(space.mesh.dim, quad_order, _face_coords(space, f))
        n = topo.normals[f]
        kp, km = _face_sides(space, f)
        bp = space.bases[kp]
        on_boundary = km < 0
        if not on_boundary:
            bm = space.bases[km]
            ids = space.members(kp) + space.members(km)
            J = np.hstack([bp.values(pts), -bm.values(pts)])
            JG = np.hstack([bp.gradients(pts) @ n, -(bm.gradients(pts) @ n)])
            AL = 0.5 * np.hstack([bp.laplacians(pts), bm.laplacians(pts)])
            AGL = 0.5 * np.hstack([bp.grad_laplacians(pts) @ n, bm.grad_laplacians(pts) @ n])
        else:
            ids = space.members(kp)
            J = bp.values(pts)
            JG = bp.gradients(pts) @ n
            AL = bp.laplacians(pts)
            AGL = bp.grad_laplacians(pts) @ n

        h = topo.h_e[f]
        E1 = np.einsum("qa,q,qb->ab", J, wts, AGL)
        block = (E1 + E1.T) + (alpha / h ** 3) * np.einsum("qa,q,qb->ab", J, wts, J)
        if not (on_boundary and simply_supported):
            E2 = np.einsum("qa,q,qb->ab", AL, wts, JG)
            block -= E2 + E2.T
            block += (beta / h) * np.einsum("qa,q,qb->ab", JG, wts, JG)
        acc.add_block(ids, block)
    return acc.build()


def assemble_mass(space, elements=None):
    """Mass matrix of the reconstructed space (L2 Gram of the shape set)."""
    quad_order = 2 * space.m
    acc = _Accumulator(space.num_dofs)
    for K in _iter(elements, space.num_dofs):
        pts, wts = element_rule(space.geometries[K], quad_order)
        V = space.bases[K].values(pts)
        acc.add_block(space.members(K), np.einsum("qa,q,qb->ab", V, wts, V))
    return acc.build()


def load_vector(space, f, quad_order=None):
    """b[j] = integral of f against shape function j."""
    order = quad_order if quad_order is not None else 2 * space.m + 2
    order = _cap_order(space.mesh.dim, order)
    b = np.zeros(space.num_dofs)
    for K in range(space.num_dofs):
        pts, wts = element_rule(space.geometries[K], order)
        V = space.bases[K].values(pts)
        fv = np.asarray(f(pts), dtype=float)
        b[space.members(K)] += V.T @ (wts * fv)
    return b


def _check_degree(space, config):
    if config.m != space.m:
        raise ValueError(f"config degree {config.m} != space degree {space.m}")


def _dim_factor(space):
    # 3D trace constants on tetrahedra need roughly twice the face penalty
    # that triangles do; without this the fourth-order spectrum dips below
    # the exact one on coarse cube meshes.
    return space.mesh.dim - 1


def _iter(seq, n):
    return range(n) if seq is None else seq


def _cap_order(dim, order):
    from .quadrature import MAX_ORDER

    return min(order, MAX_ORDER[dim])


# --------------------------------------------------------------------------
# fields and energy norms
# --------------------------------------------------------------------------

class AnalyticField:
    """A smooth scalar field bundled with the derivatives the norms need."""

    def __init__(self, value, gradient=None, laplacian=None):
        self._value = value
        self._gradient = gradient
        self._laplacian = laplacian

    def value(self, pts):
        return np.asarray(self._value(pts), dtype=float)

    def gradient(self, pts):
        if self._gradient is None:
            raise ValueError("field has no gradient callable")
        return np.asarray(self._gradient(pts), dtype=float)

    def laplacian(self, pts):
        if self._laplacian is None:
            raise ValueError("field has no laplacian callable")
        return np.asarray(self._laplacian(pts), dtype=float)


class _DiscreteEval:
    def __init__(self, space, vector):
        self.space = space
        self.vector = np.asarray(vector, dtype=float)

    def on_element(self, K, pts):
        coef = self.vector[self.space.members(K)]
        basis = self.space.bases[K]
        return {
            "val": basis.values(pts) @ coef,
            "grad": np.einsum("ptd,t->pd", basis.gradients(pts), coef),
            "lap": basis.laplacians(pts) @ coef,
        }


class _ExactEval:
    def __init__(self, field, p):
        self.field = field
        self.p = p

    def on_element(self, K, pts):
        out = {"val": self.field.value(pts), "grad": self.field.gradient(pts)}
        out["lap"] = self.field.laplacian(pts) if self.p == 2 else None
        return out


class _DiffEval:
    def __init__(self, a, b):
        self.a = a
        self.b = b

    def on_element(self, K, pts):
        da, db = self.a.on_element(K, pts), self.b.on_element(K, pts)
        out = {}
        for key in ("val", "grad", "lap"):
            if da[key] is None or db[key] is None:
                out[key] = None
            else:
                out[key] = da[key] - db[key]
        return out


def _as_eval(space, p, exact=None, vector=None):
    if exact is not None and vector is not None:
        return _DiffEval(_ExactEval(exact, p), _DiscreteEval(space, vector))
    if vector is not None:
        return _DiscreteEval(space, vector)
    if exact is not None:
        return _ExactEval(exact, p)
    raise ValueError("need at least one of exact=, vector=")


def energy_product(space, p, eval_a, eval_b, quad_order=None):
    """Bilinear pairing whose diagonal is the squared broken energy norm.

    p=1: broken grad L2 pairing plus h^-1-weighted value-jump terms over all
    faces.  p=2: broken Laplacian pairing plus h^-3 value jumps and h^-1
    gradient (normal) jumps.
    """
    order = quad_order if quad_order is not None else min(2 * space.m + 2, _max_vol_order(space))
    total = 0.0
    for K in range(space.num_dofs):
        pts, wts = element_rule(space.geometries[K], order)
        da, db = eval_a.on_element(K, pts), eval_b.on_element(K, pts)
        if p == 1:
            total += float(np.einsum("qd,q,qd->", da["grad"], wts, db["grad"]))
        else:
            total += float(np.einsum("q,q,q->", da["lap"], wts, db["lap"]))

    topo = space.topology
    face_order = min(order, 21 if space.mesh.dim == 2 else 12)
    for f in range(topo.num_faces):
        pts, wts = face_rule(space.mesh.dim, face_order, _face_coords(space, f))
        n = topo.normals[f]
        kp, km = _face_sides(space, f)
        da_p, db_p = eval_a.on_element(kp, pts), eval_b.on_element(kp, pts)
        if km >= 0:
            da_m, db_m = eval_a.on_element(km, pts), eval_b.on_element(km, pts)
            ja = da_p["val"] - da_m["val"]
            jb = db_p["val"] - db_m["val"]
            jga = (da_p["grad"] - da_m["grad"]) @ n
            jgb = (db_p["grad"] - db_m["grad"]) @ n
        else:
            ja, jb = da_p["val"], db_p["val"]
            jga, jgb = da_p["grad"] @ n, db_p["grad"] @ n
        h = topo.h_e[f]
        if p == 1:
            total += float(np.sum(wts * ja * jb)) / h
        else:
            total += float(np.sum(wts * ja * jb)) / h ** 3
            total += float(np.sum(wts * jga * jgb)) / h
    return total


def energy_norm(space, p, exact=None, vector=None, quad_order=None):
    """Broken energy norm of a discrete field, an analytic field, or their
    difference (pass both exact= and vector=)."""
    ev = _as_eval(space, p, exact=exact, vector=vector)
    return float(np.sqrt(max(energy_product(space, p, ev, ev, quad_order), 0.0)))


def l2_norm(space, exact=None, vector=None, quad_order=None):
    """Element-wise L2 norm of a field or a difference (no face terms)."""
    ev = _as_eval(space, 1, exact=exact, vector=vector)
    order = quad_order if quad_order is not None else min(2 * space.m + 2, _max_vol_order(space))
    total = 0.0
    for K in range(space.num_dofs):
        pts, wts = element_rule(space.geometries[K], order)
        v = ev.on_element(K, pts)["val"]
        total += float(np.sum(wts * v * v))
    return float(np.sqrt(total))


def _max_vol_order(space):
    from .quadrature import MAX_ORDER

    return MAX_ORDER[space.mesh.dim]
