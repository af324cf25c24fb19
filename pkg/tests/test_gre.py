"""Ratio-gradient edge magnitude against a windowed-mean oracle."""

import math

import numpy as np
import pytest
from conftest import make_raster

from msfa.errors import ParameterError
from msfa.filters import apply_descriptor
from msfa.filters._pad import pad_reflect
from msfa.filters.gre import gre, one_sided_extent
from msfa.filters.params import GreParams


def gre_oracle(values: np.ndarray, x: int, y: int, alpha: float, eps: float) -> float:
    """Scalar recomputation of the ratio magnitude at one pixel."""
    v = values.astype(np.float64) + eps
    k_max = one_sided_extent(alpha)
    w_k = [math.exp(-k / alpha) for k in range(1, k_max + 1)]
    sym = [math.exp(-abs(o) / alpha) for o in range(-k_max, k_max + 1)]
    sym_sum = sum(sym)

    def cross_smooth_h(arr):
        # Vertical symmetric smoothing feeding the horizontal gradient.
        p = pad_reflect(arr, k_max, k_max, 0, 0)
        return sum(wk * p[i:i + arr.shape[0], :] for i, wk in enumerate(sym)) / sym_sum

    def cross_smooth_v(arr):
        p = pad_reflect(arr, 0, 0, k_max, k_max)
        return sum(wk * p[:, i:i + arr.shape[1]] for i, wk in enumerate(sym)) / sym_sum

    def one_sided(arr, xx, yy, dx, dy):
        p = pad_reflect(arr, k_max, k_max, k_max, k_max)
        num = sum(wk * p[yy + k_max + k * dy, xx + k_max + k * dx]
                  for k, wk in zip(range(1, k_max + 1), w_k))
        return num / sum(w_k)

    sh = cross_smooth_h(v)
    sv = cross_smooth_v(v)
    gh = abs(math.log(one_sided(sh, x, y, 1, 0) / one_sided(sh, x, y, -1, 0)))
    gv = abs(math.log(one_sided(sv, x, y, 0, 1) / one_sided(sv, x, y, 0, -1)))
    return math.hypot(gh, gv)


class TestPadReflect:
    def test_matches_numpy_reflect(self, rng):
        v = rng.random((6, 7))
        got = pad_reflect(v, 2, 1, 3, 2)
        want = np.pad(v, ((2, 1), (3, 2)), mode="reflect")
        assert (got == want).all()

    def test_oversize_pad_falls_back_to_edge(self, rng):
        v = rng.random((3, 3))
        got = pad_reflect(v, 5, 5, 5, 5)
        want = np.pad(v, ((5, 5), (5, 5)), mode="edge")
        assert (got == want).all()


class TestExtent:
    def test_weight_cutoff_extent(self):
        assert one_sided_extent(2.0) == 56
        assert one_sided_extent(1.0) == 28
        assert one_sided_extent(0.01) == 1


class TestGre:
    def test_constant_image_is_exactly_zero(self):
        r = make_raster(np.full((20, 20), 0.6, dtype=np.float32))
        out = gre(r, GreParams(alpha=2.0, eps=0.0)).values
        assert (out == 0).all()

    def test_matches_oracle_on_random_image(self, rng):
        v = rng.random((24, 24), dtype=np.float32) * 0.9 + 0.1
        p = GreParams(alpha=1.5, eps=1e-3)
        fs = gre(make_raster(v), p)
        for x, y in [(0, 0), (11, 7), (23, 23), (4, 19)]:
            want = gre_oracle(v, x, y, p.alpha, p.eps)
            assert abs(float(fs.values[0, y, x]) - want) <= 1e-6

    def test_step_boundary_magnitude_is_one(self):
        # Left plateau 1/e, right plateau 1: the one-sided means each sit
        # fully inside a constant half at the two boundary-adjacent
        # columns, so the log ratio is exactly 1 there. alpha=1 keeps the
        # window extent (28 px) inside each 32 px half.
        v = np.full((64, 64), 1.0 / math.e, dtype=np.float32)
        v[:, 32:] = 1.0
        out = gre(make_raster(v), GreParams(alpha=1.0, eps=0.0)).values[0]
        row = out[32, :]
        assert int(np.argmax(row)) in (31, 32)
        assert row[31] == pytest.approx(1.0, abs=1e-6)
        assert row[32] == pytest.approx(1.0, abs=1e-6)
        # Vertical component is zero on a vertically constant image.
        assert (out == out[:1, :]).all()

    def test_multiplicative_invariance(self, rng):
        v = rng.random((32, 32), dtype=np.float32) * 0.9 + 0.1
        p = GreParams(alpha=2.0, eps=0.0)
        base = gre(make_raster(v), p).values
        for c in (0.5, 2.0, 10.0):
            scaled = gre(make_raster(c * v, normalized=False), p).values
            assert np.abs(scaled - base).max() <= 1e-6

    def test_eps_zero_rejects_nonpositive(self):
        v = np.zeros((8, 8), dtype=np.float32)
        with pytest.raises(ParameterError, match="positive"):
            gre(make_raster(v), GreParams(eps=0.0))

    def test_default_eps_handles_zeros(self):
        v = np.zeros((16, 16), dtype=np.float32)
        v[:, 8:] = 1.0
        out = gre(make_raster(v)).values
        assert np.isfinite(out).all()
        assert out.max() > 0

    def test_output_contract(self, rng):
        r = make_raster(rng.random((20, 26), dtype=np.float32))
        fs = gre(r)
        assert fs.values.shape == (1, 20, 26)
        assert fs.values.dtype == np.float32
        assert fs.labels == ("gre",)
        assert (fs.values >= 0).all()

    def test_alpha_validation(self):
        with pytest.raises(ParameterError):
            GreParams(alpha=0.5)

    def test_dispatch_parity(self, rng):
        r = make_raster(rng.random((20, 20), dtype=np.float32))
        a = gre(r).values
        b = apply_descriptor("gre", r, GreParams()).values
        assert (a == b).all()
