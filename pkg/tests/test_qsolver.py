import math

import numpy as np
import pytest
import scipy.sparse as sp

import oracles
from billiardwells import qsolver, spectra
from billiardwells.geometry import ShapeSpec, build_double_well
from billiardwells.qsolver import (ConfigurationError, DiscretizationParams,
                                   assemble_hamiltonian, refine_splitting,
                                   richardson_h2, solve_band, solve_double_well)


def _aligned_box(barrier_width):
    """Rectangle whose hard-wall box aligns with lattices dividing w/2."""
    return build_double_well(ShapeSpec(kind="rectangle", barrier_width=barrier_width))


def test_hard_wall_operator_equals_textbook_laplacian():
    # V_b -> inf test mode: the sector operator is the Dirichlet Laplacian
    # of one well, independent of parity
    g = _aligned_box(0.1)
    h = 0.05
    mats = []
    for parity in ("even", "odd"):
        params = DiscretizationParams(h=h, e_max=30.0, parity=parity)
        op = assemble_hamiltonian(g, params, hard_barrier=True)
        mats.append(op.matrix)
    nx = int(round(2.0 / h)) - 1
    ny = int(round(2.4 / h)) - 1
    t_x = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(nx, nx)) / h ** 2
    t_y = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(ny, ny)) / h ** 2
    textbook = sp.kron(t_y, sp.identity(nx)) + sp.kron(sp.identity(ny), t_x)
    for mat in mats:
        assert mat.shape == textbook.shape
        assert abs(mat - textbook.tocsr()).nnz == 0


def test_barrier_node_diagonal_carries_v_b():
    g = build_double_well("rectangle")
    params = DiscretizationParams(h=0.02, e_max=50.0, parity="even")
    op = assemble_hamiltonian(g, params)
    # the axis column x=0 lies mid-barrier
    i0 = np.flatnonzero(np.isclose(op.grid.y, 0.0))[0]
    node = op.index[i0, op.grid.axis_col]
    assert node >= 0
    diag = op.matrix.diagonal()
    assert diag[node] == pytest.approx(4.0 / 0.02 ** 2 + 1000.0, rel=1e-12)


def test_mirror_coupling_present_for_even_absent_for_odd():
    g = build_double_well("rectangle")
    taps = {}
    for parity in ("even", "odd"):
        params = DiscretizationParams(h=0.02, e_max=50.0, parity=parity)
        op = assemble_hamiltonian(g, params)
        i0 = np.flatnonzero(np.isclose(op.grid.y, 0.0))[0]
        adj = op.index[i0, op.grid.axis_col - 1]   # node at x = -h
        row = op.matrix.getrow(adj)
        axis_entries = [v for j, v in zip(row.indices, row.data)
                        if j in set(op.index[:, op.grid.axis_col][op.live[:, op.grid.axis_col]])]
        taps[parity] = axis_entries
    assert taps["even"], "even sector should couple to the axis column"
    assert taps["even"][0] == pytest.approx(-math.sqrt(2.0) / 0.02 ** 2, rel=1e-12)
    assert not taps["odd"], "odd sector must not couple to the axis column"


def test_operator_exactly_symmetric():
    g = build_double_well("stadium")
    params = DiscretizationParams(h=0.025, e_max=40.0, parity="even")
    op = assemble_hamiltonian(g, params)
    assert abs(op.matrix - op.matrix.T).nnz == 0


def test_box_eigenvalue_converges_from_below_at_4x():
    g = _aligned_box(0.08)   # walls on multiples of 0.04 and 0.02
    exact = math.pi ** 2 * (1 / 2.0 ** 2 + 1 / 2.4 ** 2)
    errs = []
    for h in (0.04, 0.02):
        params = DiscretizationParams(h=h, e_max=20.0, parity="even")
        states = solve_band(assemble_hamiltonian(g, params, hard_barrier=True), 20.0)
        errs.append(exact - states[0].energy)
    assert errs[0] > 0 and errs[1] > 0          # FD Dirichlet from below
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.15)


def test_disk_ground_state_near_bessel_zero():
    g = build_double_well("circle")
    r = g.resolved["r"]
    exact = (oracles.BESSEL_J_ZEROS[(0, 1)] / r) ** 2
    params = DiscretizationParams(h=0.01, e_max=8.0, parity="even")
    states = solve_band(assemble_hamiltonian(g, params, hard_barrier=True), 8.0)
    assert abs(states[0].energy - exact) / exact < 0.01


def test_states_normalized_orthonormal_low_residual():
    g = build_double_well("rectangle")
    params = DiscretizationParams(h=0.025, e_max=60.0, parity="even")
    op = assemble_hamiltonian(g, params)
    states = solve_band(op, 60.0)
    assert len(states) >= 5
    vecs = []
    axis_nodes = op.index[:, op.grid.axis_col][op.live[:, op.grid.axis_col]]
    for s in states:
        assert s.full_norm() == pytest.approx(1.0, abs=1e-8)
        assert s.residual <= params.tol
        # recover the unit solver-coordinate vector from the physical psi
        u = np.zeros(op.matrix.shape[0])
        u[op.index[op.live]] = s.psi[op.live]
        u[axis_nodes] /= math.sqrt(2.0)
        u *= math.sqrt(2.0) * op.grid.h
        vecs.append(u)
    gram = np.array([[abs(a @ b) for a in vecs] for b in vecs])
    assert np.allclose(gram, np.eye(len(vecs)), atol=1e-6)


def test_energies_sorted_and_ground_has_no_sign_change(shapes):
    from billiardwells.geometry import Region
    g = shapes["rectangle"]
    params = DiscretizationParams(h=0.025, e_max=30.0, parity="even")
    op = assemble_hamiltonian(g, params)
    states = solve_band(op, 30.0)
    energies = [s.energy for s in states]
    assert energies == sorted(energies)
    xx, yy = np.meshgrid(op.grid.x, op.grid.y)
    well = np.asarray(g.classify(xx, yy)) == Region.LEFT_WELL
    vals = states[0].psi[well]
    vals = vals[np.abs(vals) > 1e-8 * np.abs(vals).max()]
    assert np.all(vals > 0) or np.all(vals < 0)


@pytest.mark.parametrize("kind", ["rectangle", "circle", "stadium", "sinai",
                                  "butterfly", "concave"])
def test_even_ground_below_odd_ground(shapes, kind):
    evens, odds = solve_double_well(shapes[kind], 0.1 / 3, 20.0)
    assert evens[0].energy < odds[0].energy


def test_grid_too_coarse_rejected():
    with pytest.raises(ConfigurationError):
        DiscretizationParams(h=0.1, e_max=300.0, parity="even")
    with pytest.raises(ConfigurationError):
        DiscretizationParams(h=0.02, e_max=300.0, parity="diagonal")


def test_e_max_above_barrier_rejected():
    g = build_double_well("rectangle")
    params = DiscretizationParams(h=0.02, e_max=900.0, parity="even")
    op = assemble_hamiltonian(g, params)
    with pytest.raises(ConfigurationError):
        solve_band(op, 1500.0)


def test_richardson_exact_for_quadratic_model():
    a, b = 0.01, 1.0
    hs = [0.04, 0.02]
    deltas = [a + b * h * h for h in hs]
    extrap, err = richardson_h2(hs, deltas)
    assert extrap == pytest.approx(a, rel=1e-12)
    assert err == pytest.approx(abs(deltas[0] - deltas[1]), rel=1e-12)


def test_refine_splitting_rejects_mismatched_parities():
    g = build_double_well("rectangle")
    evens, odds = solve_double_well(g, 0.1 / 3, 15.0)
    with pytest.raises(ValueError):
        refine_splitting(g, (evens[0], evens[1]), (0.1 / 3, 0.1 / 9))
    with pytest.raises(ValueError):
        refine_splitting(g, (evens[0], odds[1]), (0.1 / 3, 0.1 / 9))


def test_refine_splitting_single_pair_tracks_oracle():
    from billiardwells import oned
    g = build_double_well("rectangle")
    evens, odds = solve_double_well(g, 0.1 / 3, 15.0)
    rec = refine_splitting(g, (evens[0], odds[0]), (0.1 / 3, 0.1 / 9))
    modes = oned.separable_oracle_2d(2.0, 2.4, 0.1, 1000.0, 15.0)
    target = min(modes, key=lambda m: m.e_mean)
    assert rec.delta_extrapolated == pytest.approx(target.delta_e, rel=0.05)


def test_refinement_requires_two_spacings():
    g = build_double_well("rectangle")
    with pytest.raises(ValueError):
        qsolver.refine_splittings(g, 15.0, (0.02,))


def test_solver_deterministic():
    g = build_double_well("butterfly")
    e1, _ = solve_double_well(g, 0.025, 40.0)
    e2, _ = solve_double_well(g, 0.025, 40.0)
    assert [s.energy for s in e1] == [s.energy for s in e2]
    assert all(np.array_equal(a.psi, b.psi) for a, b in zip(e1, e2))
