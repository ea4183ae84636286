"""Element patches: per-element agglomerations that carry the sampling nodes.

A patch starts from its center element and greedily adds, among all
edge/face neighbors of the current member set, the one whose barycenter is
closest to the center's sampling node (ties broken by element id, so
construction is deterministic).  Sampling nodes are the member barycenters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PatchExhausted, RankDeficient
from .mesh import all_geometries
from .quadrature import element_rule


@dataclass
class Patch:
    center: int
    members: list        # element ids, members[0] == center
    nodes: np.ndarray    # (t, dim) sampling-node coordinates
    diameter: float      # d_K, diameter of the union of member elements

    @property
    def size(self):
        return len(self.members)


def required_dim(m, dim):
    """Dimension of the space of polynomials of total degree <= m."""
    return math.comb(m + dim, dim)


def default_patch_size(m, dim):
    """Default number of sampling nodes per patch for degree m."""
    r = required_dim(m, dim)
    return max(r + 1, math.ceil(1.5 * r))


def _patch_diameter(mesh, members):
    vids = sorted({v for K in members for v in mesh.elements[K]})
    coords = mesh.vertices[vids]
    diff = coords[:, None, :] - coords[None, :, :]
    return float(np.sqrt((diff ** 2).sum(-1)).max())


def build_patch(mesh, topology, K, t, barycenters=None):
    """Grow the patch of element K to exactly t members."""
    if t < 1:
        raise ValueError("patch size must be >= 1")
    if barycenters is None:
        barycenters = np.array([g.barycenter for g in all_geometries(mesh)])
    center = barycenters[K]
    members = [K]
    member_set = {K}
    candidates = {}  # element id -> distance to center node
    for nb in topology.neighbors[K]:
        candidates[nb] = float(np.linalg.norm(barycenters[nb] - center))
    while len(members) < t:
        if not candidates:
            raise PatchExhausted(
                f"element {K}: only {len(members)} connected elements reachable, need {t}"
            )
        best = min(candidates, key=lambda e: (candidates[e], e))
        del candidates[best]
        members.append(best)
        member_set.add(best)
        for nb in topology.neighbors[best]:
            if nb not in member_set and nb not in candidates:
                candidates[nb] = float(np.linalg.norm(barycenters[nb] - center))
    nodes = barycenters[members]
    return Patch(K, members, nodes, _patch_diameter(mesh, members))


def grow_patch(mesh, topology, patch, barycenters=None):
    """Add one full ring of Von Neumann neighbors to an existing patch.

    Used as the recovery step when a least-squares fit on the patch turns
    out rank deficient.
    """
    if barycenters is None:
        barycenters = np.array([g.barycenter for g in all_geometries(mesh)])
    member_set = set(patch.members)
    ring = sorted(
        {nb for K in patch.members for nb in topology.neighbors[K]} - member_set,
        key=lambda e: (float(np.linalg.norm(barycenters[e] - patch.nodes[0])), e),
    )
    if not ring:
        raise PatchExhausted(f"element {patch.center}: no further neighbors to grow into")
    members = patch.members + ring
    nodes = barycenters[members]
    return Patch(patch.center, members, nodes, _patch_diameter(mesh, members))


def lambda_constant(mesh, patch, m, sample_order=None):
    """Estimate the patch stability constant: the worst-case ratio of a
    degree-m polynomial's sup on the patch to its sampled node values.

    Sampling uses quadrature points plus vertices of every member element;
    the estimate is the infinity operator norm of the node-values-to-sample
    -values map.  Diagnostic only.
    """
    from .reconstruction import monomial_basis, vandermonde

    basis = monomial_basis(m, patch.nodes.shape[1])
    origin = patch.nodes[0]
    scale = patch.diameter if patch.diameter > 0 else 1.0

    samples = [patch.nodes]
    order = sample_order if sample_order is not None else max(2 * m, 2)
    from .mesh import element_geometry

    for K in patch.members:
        geom = element_geometry(mesh, K)
        pts, _ = element_rule(geom, order)
        samples.append(pts)
        samples.append(mesh.element_coords(K))
    Y = (np.concatenate(samples) - origin) / scale

    V_nodes = vandermonde(basis, (patch.nodes - origin) / scale)
    s = np.linalg.svd(V_nodes, compute_uv=False)
    if s[-1] <= 1e-10 * s[0]:
        raise RankDeficient(f"patch of element {patch.center} has unisolvence defect")
    V_samples = vandermonde(basis, Y)
    B = V_samples @ np.linalg.pinv(V_nodes)
    return float(np.abs(B).sum(axis=1).max())
