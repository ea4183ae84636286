"""Dirichlet Laplace eigenvalues on the pi-square with one DOF per element.

Solves -Laplace(u) = lambda u on [0, pi]^2 with u = 0 on the boundary.
The exact eigenvalues are i^2 + j^2, so the quality of the discrete
spectrum is easy to judge by eye.  The script then refines the mesh and
watches the 20th eigenvalue (exact value 32) converge at the optimal
rate 2m.
"""

import patchdg as pdg


def main():
    m = 2
    mesh = pdg.generate_square_tri(16)
    topo = pdg.build_topology(mesh)
    space = pdg.build_space(mesh, topo, m)
    cfg = pdg.FormConfig(problem="laplace", m=m)

    result, A, M = pdg.compute_spectrum(space, cfg, k=12)
    exact = pdg.exact_spectrum("square_pi", 1, 12)

    print(f"mesh: {mesh.num_elements} triangles, degree m={m}, "
          f"patch size t={space.t}")
    print(f"{'index':>5} {'computed':>12} {'exact':>8} {'rel. error':>12}")
    for i, (lam_h, lam) in enumerate(zip(result.values, exact.values), start=1):
        print(f"{i:5d} {lam_h:12.6f} {lam:8.0f} {abs(lam_h - lam) / lam:12.3e}")

    print("\nconvergence of the 20th eigenvalue (exact 32):")
    meshes = [pdg.generate_square_tri(n) for n in (8, 16, 32)]
    study = pdg.convergence_study(meshes, cfg, "square_pi", 20)
    print(f"{'h':>8} {'value':>12} {'error':>10} {'order':>6}")
    for row in study.eigenvalue_rows:
        order = f"{row.order:6.2f}" if row.order is not None else "     -"
        print(f"{row.scale:8.4f} {row.value:12.6f} {row.error:10.3e} {order}")
    print(f"(theory predicts order {2 * m})")


if __name__ == "__main__":
    main()
