"""Smoke tests for the _tdbem extension module.

Runnable standalone (python3 test_smoke.py) or under pytest; the module
directory must be on PYTHONPATH.
"""

import math
import sys

import numpy as np

import _tdbem as td


def test_mesh_generation():
    ico = td.make_icosahedron(1.0)
    assert ico.n_vertices == 12
    assert ico.n_triangles == 20
    stats = td.mesh_stats(ico)
    assert abs(stats["diameter"] - 2.0) < 1e-13

    sphere = td.refine_uniform(ico, 2, True)
    assert sphere.n_triangles == 320
    td.validate_mesh(sphere)
    radii = np.linalg.norm(sphere.vertices, axis=1)
    assert np.max(np.abs(radii - 1.0)) < 1e-12

    screen = td.make_screen(12)
    assert screen.n_triangles == 288
    assert screen.kind == "screen"


def test_temporal_basis():
    grid = td.make_temporal_grid(0.04, 2.5)
    assert grid.n_steps == 63
    tb = td.TemporalBasis(1, grid)
    psi = td.temporal_correlation(1, tb)
    # psi_1 at dt/2 equals 5/8 for hat shape functions
    assert abs(psi(0.02) - 0.625) < 1e-12
    assert psi(10.0) == 0.0


def test_small_system_end_to_end():
    mesh = td.make_icosahedron(1.0)
    grid = td.make_temporal_grid(0.16, 1.6)
    tb = td.TemporalBasis(1, grid)
    quad = td.QuadratureConfig()
    quad.radial_rule = "analytic"
    quad.outer_refine_depth = 2

    bands = td.assemble_all_bands(mesh, tb, quad)
    assert len(bands) == td.band_cutoff(2.0, 0.16) + 2

    rhs_fn = td.rhs_preset("example2")
    assert abs(rhs_fn.omega_f - math.sqrt(1.5**2 + 3.0**2 + 8.5**2)) < 1e-12
    rhs = td.assemble_rhs(rhs_fn, mesh, tb, quad)
    assert rhs.shape == (20, grid.n_steps)

    sys_ = td.SpaceTimeSystem(bands, grid.n_steps, rhs)
    tri = td.build_preconditioner(sys_)

    # band identities of the extrapolation preconditioner
    assert np.max(np.abs(tri.band(0) - (sys_.band(0) + 2.0 * sys_.band(-1)))) == 0.0
    assert np.max(np.abs(tri.band(1) - (sys_.band(1) - sys_.band(-1)))) == 0.0

    plain = td.gmres_solve(sys_, tolerance=1e-9, max_iterations=200)
    prec = td.gmres_solve(sys_, tolerance=1e-9, max_iterations=200, precond=tri)
    alone = td.standalone_solve(sys_, tri)
    assert plain.converged and prec.converged
    assert abs(plain.energy - prec.energy) < 1e-6 * max(1.0, abs(plain.energy))

    # dense cross-check of the GMRES solution
    dense = td.to_dense(sys_)
    direct = np.linalg.solve(dense, sys_.rhs_flat())
    assert np.linalg.norm(plain.solution - direct) < 1e-7 * np.linalg.norm(direct)

    # the standalone marching solve is close but not identical
    rel = abs(alone.energy - prec.energy) / abs(prec.energy)
    assert rel < 0.2


def test_matvec_and_energy():
    mesh = td.make_icosahedron(1.0)
    grid = td.make_temporal_grid(0.2, 1.0)
    tb = td.TemporalBasis(1, grid)
    quad = td.QuadratureConfig()
    quad.radial_rule = "analytic"
    quad.outer_refine_depth = 1
    bands = td.assemble_all_bands(mesh, tb, quad)
    rhs = td.assemble_rhs(td.rhs_preset("example1"), mesh, tb, quad)
    sys_ = td.SpaceTimeSystem(bands, grid.n_steps, rhs)
    c = np.zeros(20 * grid.n_steps)
    assert np.all(td.matvec(sys_, c) == 0.0)
    assert td.energy(sys_, c) == 0.0


def main():
    tests = [(name, fn) for name, fn in sorted(globals().items())
             if name.startswith("test_") and callable(fn)]
    failed = 0
    for name, fn in tests:
        try:
            fn()
            print(f"PASS {name}")
        except Exception as exc:  # noqa: BLE001
            failed += 1
            print(f"FAIL {name}: {exc!r}")
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
