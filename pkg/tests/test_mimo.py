"""Closed-form forward pass and normalized convolution tests."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oscnet import mimo
from oscnet.errors import DegenerateNormalizationError

FIG3_WEIGHTS = np.array(
    [[-3.0, -9.0, 0.0], [8.0, 2.0, -6.0], [-1.0, 7.0, 10.0], [7.0, 5.0, -1.0]]
)
FIG3_INPUTS = np.array([3.0, -7.0, 4.0, -2.0])


def reference_normalized_convolution(image, taps, anchor):
    """Independent oracle: plain double loop over truncated windows."""
    h, w = image.shape
    kh, kw = taps.shape
    ar, ac = anchor
    out = np.zeros_like(image)
    for r in range(h):
        for c in range(w):
            acc = 0.0
            den = 0.0
            for i in range(kh):
                for j in range(kw):
                    rr, cc = r + i - ar, c + j - ac
                    if 0 <= rr < h and 0 <= cc < w:
                        acc += taps[i, j] * image[rr, cc]
                        den += taps[i, j]
            out[r, c] = acc / den
    return out


class TestForwardSingle:
    def test_first_reference_output(self):
        """w=[-3,8,-1,7], x=[3,-7,4,-2] gives -83/11."""
        got = mimo.forward_single([-3.0, 8.0, -1.0, 7.0], FIG3_INPUTS)
        assert got == pytest.approx(-83.0 / 11.0, rel=1e-12)

    def test_second_reference_output(self):
        got = mimo.forward_single([-9.0, 2.0, 7.0, 5.0], FIG3_INPUTS)
        assert got == pytest.approx(-4.6, rel=1e-12)

    def test_single_tap_identity(self):
        assert mimo.forward_single([1.0], [42.5]) == pytest.approx(42.5, rel=1e-12)

    def test_degenerate_weight_sum_raises(self):
        with pytest.raises(DegenerateNormalizationError):
            mimo.forward_single([1.0, -1.0], [2.0, 3.0])

    def test_all_zero_weights_raise(self):
        with pytest.raises(DegenerateNormalizationError):
            mimo.forward_single([0.0, 0.0], [1.0, 2.0])

    @given(
        st.lists(
            st.floats(min_value=0.1, max_value=10.0), min_size=1, max_size=12
        ),
        st.data(),
    )
    def test_weighted_average_identity(self, magnitudes, data):
        """tan(atan2 decode) equals sum(w*x)/sum(w) to 1e-12 relative.

        Signs are drawn freely but instances with heavy cancellation in
        sum(w) are re-signed: float64 cannot hold the identity to 1e-12
        once the condition number sum|w| / |sum w| passes ~1e4.
        """
        w = np.array(magnitudes)
        signs = np.array(
            data.draw(
                st.lists(
                    st.sampled_from((-1.0, 1.0)),
                    min_size=len(w),
                    max_size=len(w),
                )
            )
        )
        w = w * signs
        if abs(w.sum()) < 1e-3 * np.abs(w).sum():
            w = np.abs(w)
        x = np.array(
            data.draw(
                st.lists(
                    st.floats(min_value=-10.0, max_value=10.0),
                    min_size=len(w),
                    max_size=len(w),
                )
            )
        )
        expected = float(np.sum(w * x) / np.sum(w))
        assert mimo.forward_single(w, x) == pytest.approx(
            expected, rel=1e-12, abs=1e-12
        )

    def test_affine_covariance(self, rng):
        """forward(w, a*x + b) = a*forward(w, x) + b."""
        w = rng.uniform(0.5, 3.0, size=6)
        x = rng.uniform(-4.0, 4.0, size=6)
        a, b = 2.5, -1.25
        lhs = mimo.forward_single(w, a * x + b)
        rhs = a * mimo.forward_single(w, x) + b
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


class TestForward:
    def test_reference_network(self):
        net = mimo.MimoNetwork(FIG3_WEIGHTS)
        np.testing.assert_allclose(
            mimo.forward(net, FIG3_INPUTS),
            [-83.0 / 11.0, -4.6, 28.0],
            rtol=1e-12,
        )

    def test_single_tap_columns_pass_through(self):
        net = mimo.MimoNetwork(np.eye(4))
        np.testing.assert_allclose(
            mimo.forward(net, FIG3_INPUTS), FIG3_INPUTS, rtol=1e-12
        )

    def test_matches_bruteforce_average(self, rng):
        w = rng.uniform(0.2, 4.0, size=(6, 3))
        x = rng.uniform(-5.0, 5.0, size=6)
        expected = (w * x[:, None]).sum(axis=0) / w.sum(axis=0)
        np.testing.assert_allclose(
            mimo.forward(mimo.MimoNetwork(w), x), expected, rtol=1e-12
        )

    def test_degenerate_column_reports_index(self):
        w = np.array([[1.0, 1.0], [2.0, -1.0]])
        with pytest.raises(DegenerateNormalizationError) as excinfo:
            mimo.forward(mimo.MimoNetwork(w), np.array([1.0, 2.0]))
        assert excinfo.value.column == 1

    def test_column_independence(self, rng):
        w = rng.uniform(0.5, 2.0, size=(5, 3))
        x = rng.uniform(-2.0, 2.0, size=5)
        base = mimo.forward(mimo.MimoNetwork(w), x)
        w2 = w.copy()
        w2[:, 1] = rng.uniform(0.5, 2.0, size=5)
        bumped = mimo.forward(mimo.MimoNetwork(w2), x)
        assert bumped[0] == base[0] and bumped[2] == base[2]
        assert bumped[1] != base[1]


class TestGaussianKernel:
    def test_size_one(self):
        k = mimo.gaussian_kernel(1, 1.0)
        np.testing.assert_array_equal(k.taps, [[1.0]])
        assert k.anchor == (0, 0)

    def test_flat_limit(self):
        k = mimo.gaussian_kernel(3, 1e6)
        np.testing.assert_allclose(k.taps, np.ones((3, 3)), atol=1e-6)

    def test_center_to_edge_ratio(self):
        """Center over side-adjacent tap is exp(1/2) at sigma = 1."""
        k = mimo.gaussian_kernel(3, 1.0)
        assert k.taps[1, 1] / k.taps[1, 0] == pytest.approx(
            np.exp(0.5), rel=1e-12
        )

    def test_rejects_even_size(self):
        with pytest.raises(ValueError):
            mimo.gaussian_kernel(4, 1.0)


class TestConvolveImage:
    def test_identity_kernel(self, rng):
        img = rng.uniform(0.0, 1.0, size=(5, 7))
        k = mimo.ConvolutionKernel(taps=np.array([[1.0]]), anchor=(0, 0))
        np.testing.assert_allclose(mimo.convolve_image(img, k), img, rtol=1e-12)

    def test_constant_image_fixed_point(self):
        img = np.full((6, 6), 0.37)
        k = mimo.gaussian_kernel(3, 1.0)
        for border in ("renormalize", "reflect"):
            np.testing.assert_allclose(
                mimo.convolve_image(img, k, border=border), img, rtol=1e-12
            )

    def test_matches_reference_oracle_on_ramp(self):
        """8x8 ramp under a 3x3 Gaussian matches the double-loop oracle."""
        img = np.add.outer(np.arange(8.0), np.arange(8.0)) / 14.0
        k = mimo.gaussian_kernel(3, 1.0)
        expected = reference_normalized_convolution(img, k.taps, k.anchor)
        np.testing.assert_allclose(
            mimo.convolve_image(img, k, border="renormalize"), expected, atol=1e-9
        )

    def test_zero_border_uses_full_denominator(self):
        img = np.ones((4, 4))
        k = mimo.gaussian_kernel(3, 1.0)
        out = mimo.convolve_image(img, k, border="zero")
        # corners lose 5 of 9 taps of mass but keep the full denominator
        corner_expected = (
            k.taps[1:, 1:].sum() / k.taps.sum()
        )
        assert out[0, 0] == pytest.approx(corner_expected, rel=1e-12)
        assert out[2, 2] == pytest.approx(1.0, rel=1e-12)

    def test_degenerate_truncated_window(self):
        """At the bottom-right corner only the zero tap survives truncation."""
        taps = np.array([[0.0, 1.0], [1.0, 1.0]])
        k = mimo.ConvolutionKernel(taps=taps, anchor=(0, 0))
        img = np.ones((3, 3))
        with pytest.raises(DegenerateNormalizationError):
            mimo.convolve_image(img, k, border="renormalize")

    def test_degenerate_kernel_rejected_at_construction(self):
        with pytest.raises(DegenerateNormalizationError):
            mimo.ConvolutionKernel(taps=np.array([[1.0, -1.0]]), anchor=(0, 0))
