import numpy as np
import pytest

from dihedral_lab.index_lab import (
    DecComplex,
    PolygonError,
    dec_complex,
    harmonic_dims,
    index_experiment,
)

SQUARE = {"type": "square"}
TRIANGLE = {"type": "right_triangle"}


def brute_force_betti(c: DecComplex):
    """Rank-nullity oracle computed from explicit kernels via SVD bases,
    independent of the library's rank arithmetic."""
    def null_dim(mat):
        if mat.size == 0:
            return mat.shape[1]
        s = np.linalg.svd(mat, compute_uv=False)
        return mat.shape[1] - int(np.sum(s > 1e-10))

    # b0 = dim ker d0, b1 = dim(ker d1 / im d0), b2 = dim coker d1
    b0 = null_dim(c.d0)
    z1 = null_dim(c.d1)
    im0 = c.d0.shape[1] - null_dim(c.d0)
    b1 = z1 - im0
    im1 = c.d1.shape[1] - null_dim(c.d1)
    b2 = c.d1.shape[0] - im1
    return b0, b1, b2


class TestDecComplex:
    def test_square_8x8_counts(self):
        c = dec_complex(SQUARE, 8)
        assert c.vertex_count == 81
        assert c.edge_count == 2 * 8 * 9
        assert c.face_count == 64
        assert c.composition_residual() == 0.0

    def test_square_2x2_exact_composition(self):
        c = dec_complex(SQUARE, 2)
        assert c.composition_residual() == 0.0

    def test_triangle_composition(self):
        for k in (1, 2, 5):
            c = dec_complex(TRIANGLE, k)
            assert c.composition_residual() == 0.0

    def test_triangle_counts(self):
        c = dec_complex(TRIANGLE, 2)
        assert c.vertex_count == 6
        assert c.face_count == 4  # three lower + one upper triangle

    def test_zero_resolution_rejected(self):
        with pytest.raises(PolygonError):
            dec_complex(SQUARE, 0)

    def test_unknown_polygon(self):
        with pytest.raises(PolygonError):
            dec_complex({"type": "hexagon"}, 4)

    def test_union(self):
        c = dec_complex({"type": "union", "parts": [SQUARE, SQUARE]}, 3)
        single = dec_complex(SQUARE, 3)
        assert c.vertex_count == 2 * single.vertex_count
        assert c.composition_residual() == 0.0


class TestHarmonicDims:
    @pytest.mark.parametrize("k", [2, 3, 8, 16, 32])
    def test_square_disk_cohomology(self, k):
        assert harmonic_dims(dec_complex(SQUARE, k)) == (1, 0, 0)

    @pytest.mark.parametrize("k", [1, 2, 6])
    def test_triangle_disk_cohomology(self, k):
        assert harmonic_dims(dec_complex(TRIANGLE, k)) == (1, 0, 0)

    def test_two_squares_additive(self):
        c = dec_complex({"type": "union", "parts": [SQUARE, SQUARE]}, 4)
        assert harmonic_dims(c) == (2, 0, 0)

    def test_against_brute_force_oracle_small(self):
        for poly, k in ((SQUARE, 2), (SQUARE, 3), (TRIANGLE, 2)):
            c = dec_complex(poly, k)
            assert harmonic_dims(c) == brute_force_betti(c)


def identity_scene():
    return {
        "resolution": 8,
        "M": {"type": "square"},
        "N": [{"polygon": {"type": "square"},
               "map": {"matrix": [[1.0, 0.0], [0.0, 1.0]],
                       "offset": [0.0, 0.0]}}],
    }


class TestIndexExperiment:
    def test_identity_square(self):
        out = index_experiment(identity_scene())
        assert (out["b0"], out["b1"], out["b2"]) == (1, 0, 0)
        assert out["index"] == 1
        assert out["chi"] == 1
        assert out["deg"] == 1
        assert out["match"] is True

    def test_two_component_cover(self):
        scene = {
            "resolution": 6,
            "M": {"type": "square"},
            "N": [
                {"polygon": {"type": "square"},
                 "map": {"matrix": [[1.0, 0.0], [0.0, 1.0]],
                         "offset": [0.0, 0.0]}},
                {"polygon": {"type": "square"},
                 "map": {"matrix": [[1.0, 0.0], [0.0, 1.0]],
                         "offset": [0.0, 0.0]}},
            ],
        }
        out = index_experiment(scene)
        assert out["index"] == 2
        assert out["deg"] == 2
        assert out["match"] is True

    def test_triangle_identity(self):
        scene = {
            "resolution": 5,
            "M": {"type": "right_triangle"},
            "N": [{"polygon": {"type": "right_triangle"},
                   "map": {"matrix": [[1.0, 0.0], [0.0, 1.0]],
                           "offset": [0.0, 0.0]}}],
        }
        out = index_experiment(scene)
        assert out["match"] is True
        assert out["chi"] == 1

    def test_orientation_reversing_reported(self):
        # determinant-sign oracle: the flip map has degree -1; the index
        # model keeps index = +1, so the scene must report a mismatch
        scene = {
            "resolution": 4,
            "M": {"type": "square"},
            "N": [{"polygon": {"type": "square"},
                   "map": {"matrix": [[0.0, 1.0], [1.0, 0.0]],
                           "offset": [0.0, 0.0]}}],
        }
        out = index_experiment(scene)
        assert out["deg"] == -1
        assert out["index"] == 1
        assert out["match"] is False

    def test_shrinking_affine_map(self):
        scene = {
            "resolution": 4,
            "M": {"type": "square"},
            "N": [{"polygon": {"type": "square"},
                   "map": {"matrix": [[0.5, 0.0], [0.0, 0.5]],
                           "offset": [0.25, 0.25]}}],
        }
        out = index_experiment(scene)
        assert out["match"] is True

    def test_map_out_of_target_rejected(self):
        scene = identity_scene()
        scene["N"][0]["map"]["offset"] = [3.0, 0.0]
        with pytest.raises(PolygonError):
            index_experiment(scene)

    def test_degenerate_map_rejected(self):
        scene = identity_scene()
        scene["N"][0]["map"]["matrix"] = [[1.0, 0.0], [2.0, 0.0]]
        with pytest.raises(PolygonError):
            index_experiment(scene)

    def test_empty_scene_rejected(self):
        with pytest.raises(PolygonError):
            index_experiment({"resolution": 2, "M": SQUARE, "N": []})
