import math

import numpy as np
import pytest

from avgflux.exceptions import MeshError
from avgflux.mesh import build_graded, build_spatial, default_half_width


class TestGradedMesh:
    def test_uniform(self):
        np.testing.assert_array_equal(build_graded(1.0, 4, 1.0).nodes, [0, 0.25, 0.5, 0.75, 1])

    def test_quadratic(self):
        np.testing.assert_array_equal(build_graded(1.0, 4, 2.0).nodes, [0, 1 / 16, 1 / 4, 9 / 16, 1])

    def test_first_node(self):
        assert build_graded(2.0, 8, 2.0).nodes[1] == 2 / 64

    def test_default_grading(self):
        assert build_graded(1.0, 8).grading == 2.0

    @pytest.mark.parametrize("args", [(0.0, 4, 2.0), (-1.0, 4, 2.0), (math.inf, 4, 2.0), (1.0, 1, 2.0),
                                      (1.0, 2.5, 2.0), (1.0, 4, 0.5), (1.0, 4, math.nan)])
    def test_invalid(self, args):
        with pytest.raises(MeshError):
            build_graded(*args)

    @pytest.mark.parametrize("r", [1.0, 2.0])
    def test_refinement_nesting(self, r):
        coarse = build_graded(3.0, 32, r)
        fine = coarse.refined()
        np.testing.assert_allclose(fine.nodes[::2], coarse.nodes, rtol=1e-15, atol=0)

    def test_large_count(self):
        m = build_graded(1.0, 2**16, 2.0)
        assert np.all(np.isfinite(m.nodes))
        assert np.all(np.diff(m.nodes) > 0)
        assert m.nodes[0] == 0.0 and m.nodes[-1] == 1.0

    def test_immutable(self):
        m = build_graded(1.0, 4)
        with pytest.raises(ValueError):
            m.nodes[1] = 0.3

    def test_views(self):
        m = build_graded(1.0, 4)
        assert len(m) == 5
        np.testing.assert_array_equal(m.times, m.nodes[1:])
        np.testing.assert_allclose(m.steps.sum(), 1.0)

    def test_density_near_origin(self):
        m = build_graded(1.0, 100, 2.0)
        np.testing.assert_allclose(m.nodes[1:6] / m.nodes[1], np.arange(1, 6) ** 2.0)


class TestSpatialGrid:
    def test_one_sided(self):
        g = build_spatial(2.0, 5)
        np.testing.assert_array_equal(g.nodes, [0, 0.5, 1, 1.5, 2])

    def test_symmetric_exact_mirror(self):
        g = build_spatial(12.0, 129, symmetric=True)
        np.testing.assert_array_equal(g.nodes, -g.nodes[::-1])
        assert g.nodes[64] == 0.0

    @pytest.mark.parametrize("sym", [False, True])
    @pytest.mark.parametrize("m", [3, 17, 256])
    def test_spacing_times_count(self, sym, m):
        g = build_spatial(3.7, m, sym)
        np.testing.assert_allclose(g.spacing * (g.count - 1), g.length, rtol=1e-12)

    def test_refined_halves_spacing(self):
        g = build_spatial(1.0, 9)
        np.testing.assert_allclose(g.refined().spacing, g.spacing / 2)
        np.testing.assert_allclose(g.refined().nodes[::2], g.nodes)

    @pytest.mark.parametrize("args", [(0.0, 5), (1.0, 2), (1.0, 4.5)])
    def test_invalid(self, args):
        with pytest.raises(MeshError):
            build_spatial(*args)

    def test_default_half_width(self):
        assert default_half_width(4.0) == 24.0
