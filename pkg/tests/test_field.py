import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import erf

from avgflux.exceptions import DomainError, MeshError
from avgflux.field import (
    erf_kernel_integral,
    initial_field,
    kernel,
    pde_residual,
    reconstruct,
    residual_nodes,
)
from avgflux.mesh import build_graded, build_spatial, default_half_width
from avgflux.volterra1d import LinearSource, ProblemSpec1D, solve_flux

ZERO = lambda w: 0.0 * np.asarray(w, dtype=float)


@pytest.fixture(scope="module")
def unit_field():
    spec = ProblemSpec1D.linear(1.0, 1.0)
    mesh = build_graded(1.0, 256)
    sol = solve_flux(spec, mesh)
    grid = build_spatial(default_half_width(1.0), 129)
    return spec, sol, reconstruct(spec, sol, grid)


class TestKernel:
    def test_boundary(self):
        assert kernel(0.0, 1.0, 0.7, 0.2) == 0.0

    def test_value(self):
        np.testing.assert_allclose(kernel(1.0, 1.0, 1.0, 0.0), (1 - math.exp(-1)) / (2 * math.sqrt(math.pi)), rtol=1e-15)

    @given(st.floats(0, 20), st.floats(0, 20), st.floats(0.01, 5))
    def test_symmetric(self, a, b, d):
        assert kernel(a, d, b, 0.0) == pytest.approx(kernel(b, d, a, 0.0), rel=1e-14, abs=1e-300)

    @given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0.01, 3))
    def test_positive(self, a, b, d):
        assert kernel(a, d, b, 0.0) >= 0.0

    @pytest.mark.parametrize("tau", [1.0, 2.0])
    def test_domain(self, tau):
        with pytest.raises(DomainError):
            kernel(1.0, 1.0, 1.0, tau)


class TestErfIdentity:
    def test_report(self):
        rep = erf_kernel_integral()
        assert rep.passed and rep.max_error <= 1e-10

    def test_unit_argument(self):
        rep = erf_kernel_integral(xs=(2.0,), elapsed=(1.0,))
        np.testing.assert_allclose(rep.checks[0].quadrature, 0.8427007929497149, atol=1e-10)

    def test_boundary_and_far_field(self):
        rep = erf_kernel_integral(xs=(0.0, 60.0), elapsed=(1.0,))
        assert abs(rep.checks[0].quadrature) <= 1e-14
        np.testing.assert_allclose(rep.checks[1].quadrature, 1.0, atol=1e-10)


class TestInitialField:
    def test_erf_one(self):
        np.testing.assert_allclose(initial_field(ProblemSpec1D.linear(1.0, 0.0), 2.0, 1.0), math.erf(1.0), rtol=1e-15)

    @pytest.mark.parametrize("h0", [0.5, -3.0])
    def test_boundary(self, h0):
        assert initial_field(ProblemSpec1D.linear(h0, 1.0), 0.0, 0.3) == 0.0

    def test_general_path_matches_constant(self):
        x = np.linspace(0, 6, 13)
        general = initial_field(ProblemSpec1D(lambda xi: 1.7, LinearSource(0.0), 1.0), x, 0.8)
        np.testing.assert_allclose(general, 1.7 * erf(x / (2 * math.sqrt(0.8))), atol=1e-8)

    def test_domain(self):
        spec = ProblemSpec1D.linear(1.0, 0.0)
        with pytest.raises(DomainError):
            initial_field(spec, 1.0, 0.0)
        with pytest.raises(DomainError):
            initial_field(spec, -1.0, 1.0)


class TestReconstruct:
    def test_zero_source_reproduces_free_field(self):
        spec = ProblemSpec1D(1.0, ZERO, 1.0)
        mesh = build_graded(1.0, 64)
        grid = build_spatial(12.0, 97)
        fld = reconstruct(spec, solve_flux(spec, mesh), grid)
        u0 = erf(grid.nodes[None, :] / (2 * np.sqrt(mesh.times[:, None])))
        np.testing.assert_allclose(fld.values, u0, atol=1e-10, rtol=0)

    def test_general_data_zero_source(self):
        spec = ProblemSpec1D(lambda x: math.tanh(x), ZERO, 1.0)
        mesh = build_graded(1.0, 8)
        grid = build_spatial(6.0, 9)
        fld = reconstruct(spec, solve_flux(spec, mesh), grid, [4, 8])
        np.testing.assert_allclose(fld.profile(8), initial_field(spec, grid.nodes, 1.0), atol=1e-12)

    def test_boundary_pinned(self, unit_field):
        _, _, fld = unit_field
        assert np.all(fld.values[:, 0] == 0.0)
        assert np.all(np.isfinite(fld.values))

    def test_initial_data_recovery(self, unit_field):
        _, sol, fld = unit_field
        t1 = sol.times[0]
        far = fld.x_grid.nodes >= 4 * math.sqrt(t1)
        np.testing.assert_allclose(fld.profile(1)[far], 1.0, rtol=0.02)

    def test_below_free_field_while_average_positive(self, unit_field):
        spec, sol, fld = unit_field
        positive = np.cumprod(sol.w > 0).astype(bool)
        assert positive[:10].all()
        for j in np.flatnonzero(positive)[::16] + 1:
            u0 = initial_field(spec, fld.x_grid.nodes, sol.mesh.nodes[j])
            assert np.all(fld.profile(j) <= u0 + 1e-14)

    def test_flux_consistency_under_refinement(self):
        spec = ProblemSpec1D.linear(1.0, 1.0)
        mesh = build_graded(1.0, 128)
        sol = solve_flux(spec, mesh)
        j = 64
        errs = []
        for m in (201, 401, 801):
            grid = build_spatial(2.0, m)
            u = reconstruct(spec, sol, grid, [j]).profile(j)
            errs.append(abs(u[1] / grid.spacing - sol.v[j - 1]))
        assert errs[0] > errs[1] > errs[2]
        np.testing.assert_allclose(errs[0] / errs[1], 2.0, rtol=0.1)

    def test_rejects_symmetric_grid(self):
        spec = ProblemSpec1D.linear(1.0, 1.0)
        mesh = build_graded(1.0, 8)
        with pytest.raises(MeshError):
            reconstruct(spec, solve_flux(spec, mesh), build_spatial(1.0, 9, symmetric=True))

    def test_mesh_mismatch(self):
        spec = ProblemSpec1D.linear(1.0, 1.0)
        sol = solve_flux(spec, build_graded(1.0, 8))
        import dataclasses

        bad = dataclasses.replace(sol, mesh=build_graded(1.0, 16))
        with pytest.raises(MeshError):
            reconstruct(spec, bad, build_spatial(1.0, 9))

    @pytest.mark.parametrize("idx", [[0], [9], []])
    def test_bad_indices(self, idx):
        spec = ProblemSpec1D.linear(1.0, 1.0)
        sol = solve_flux(spec, build_graded(1.0, 8))
        with pytest.raises(MeshError):
            reconstruct(spec, sol, build_spatial(1.0, 9), idx)

    def test_csv(self):
        spec = ProblemSpec1D.linear(1.0, 1.0)
        mesh = build_graded(1.0, 4)
        fld = reconstruct(spec, solve_flux(spec, mesh), build_spatial(1.0, 3), [4])
        lines = fld.to_csv().splitlines()
        assert lines[0] == "t,x,u"
        assert len(lines) == 4
        assert lines[1] == "1,0,0"

    def test_missing_profile(self, unit_field):
        spec, sol, _ = unit_field
        fld = reconstruct(spec, sol, build_spatial(1.0, 5), [3])
        with pytest.raises(KeyError):
            fld.profile(4)


class TestPdeResidual:
    @staticmethod
    def residual(spec, m, n):
        mesh = build_graded(1.0, n)
        sol = solve_flux(spec, mesh)
        _, needed = residual_nodes(mesh)
        fld = reconstruct(spec, sol, build_spatial(default_half_width(1.0), m), needed)
        return pde_residual(fld, spec)

    def test_free_field_converges(self):
        spec = ProblemSpec1D(1.0, ZERO, 1.0)
        r = [self.residual(spec, m, n) for m, n in ((128, 256), (256, 512))]
        assert r[1] < r[0] / 3

    def test_linear_case_decreases(self):
        spec = ProblemSpec1D.linear(1.0, 1.0)
        r = [self.residual(spec, m, n) for m, n in ((128, 256), (256, 512))]
        assert r[1] <= 5e-3 and r[1] < r[0] / 3

    def test_coarse_grid_rejected(self, unit_field):
        spec, sol, _ = unit_field
        fld = reconstruct(spec, sol, build_spatial(12.0, 40))
        with pytest.raises(MeshError):
            pde_residual(fld, spec)

    def test_missing_neighbours(self, unit_field):
        spec, sol, _ = unit_field
        fld = reconstruct(spec, sol, build_spatial(12.0, 100), [100])
        with pytest.raises(MeshError):
            pde_residual(fld, spec)

    def test_nodes_cover_stencils(self):
        mesh = build_graded(1.0, 16)
        centres, needed = residual_nodes(mesh)
        assert centres.size > 0
        assert needed.min() >= 1 and needed.max() <= mesh.count
