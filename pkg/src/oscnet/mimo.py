"""Closed-form forward propagation and the image-convolution application.

A free output oscillator coupled to pinned inputs settles (up to an
antipodal twin) at

    theta_out = atan2( sum_i J_i sin(theta_i), sum_i J_i cos(theta_i) ),

and with the value/coupling encoding of :mod:`oscnet.phase` the readout
tan(theta_out) is algebraically the normalized weighted average

    sum_i w_i x_i / sum_i w_i.

One analytic evaluation therefore replaces settling the ODE.  Outputs do
not couple to each other, so a multi-output network is M independent
single-output solves sharing the inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateNormalizationError
from .phase import encode_coupling

__all__ = [
    "DEGENERACY_RTOL",
    "MimoNetwork",
    "ConvolutionKernel",
    "forward_single",
    "forward",
    "gaussian_kernel",
    "convolve_image",
]

# |sum w| below this fraction of sum |w| counts as a vanishing denominator.
DEGENERACY_RTOL = 1e-9

BORDER_RULES = ("renormalize", "reflect", "zero")


def _check_normalization(weights, column: int | None = None, context: str = ""):
    abs_sum = float(np.sum(np.abs(weights)))
    total = float(np.sum(weights))
    if abs_sum == 0.0 or abs(total) < DEGENERACY_RTOL * abs_sum:
        where = f" (column {column})" if column is not None else ""
        ctx = f" {context}" if context else ""
        raise DegenerateNormalizationError(
            f"weight sum {total:.3e} is degenerate against magnitude "
            f"{abs_sum:.3e}{ctx}{where}",
            column=column,
        )


@dataclass(frozen=True)
class MimoNetwork:
    """N pinned inputs fully connected to M free outputs via abstract weights."""

    weights: np.ndarray  # (n_inputs, n_outputs)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.size == 0:
            raise ValueError("weights must be a non-empty N x M matrix")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "weights", w)

    @property
    def n_inputs(self) -> int:
        return self.weights.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.weights.shape[1]


def forward_single(weights, inputs) -> float:
    """Decoded response of one output oscillator.

    Encodes the inputs, solves the output phase with the two-argument
    arctangent, and reads out tan.  Numerically equal to
    sum(w*x)/sum(w); raises DegenerateNormalizationError when the weight
    sum vanishes relative to the total weight magnitude.
    """
    w = np.asarray(weights, dtype=np.float64)
    x = np.asarray(inputs, dtype=np.float64)
    if w.shape != x.shape or w.ndim != 1:
        raise ValueError("weights and inputs must be 1-D and equally long")
    _check_normalization(w)
    theta, coupling = encode_coupling(w, x)
    s = float(np.sum(coupling * np.sin(theta)))
    c = float(np.sum(coupling * np.cos(theta)))
    return float(np.tan(np.arctan2(s, c)))


def forward(net: MimoNetwork, inputs) -> np.ndarray:
    """Column-wise forward pass; output j depends only on weight column j."""
    x = np.asarray(inputs, dtype=np.float64)
    if x.shape != (net.n_inputs,):
        raise ValueError(f"expected {net.n_inputs} inputs, got shape {x.shape}")
    out = np.empty(net.n_outputs)
    for j in range(net.n_outputs):
        try:
            out[j] = forward_single(net.weights[:, j], x)
        except DegenerateNormalizationError as err:
            raise DegenerateNormalizationError(str(err), column=j) from None
    return out


@dataclass(frozen=True)
class ConvolutionKernel:
    """Tap weights applied as a normalized weighted average around an anchor."""

    taps: np.ndarray
    anchor: tuple

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float64)
        if taps.ndim != 2 or taps.size == 0:
            raise ValueError("taps must be a non-empty 2-D array")
        if not np.all(np.isfinite(taps)):
            raise ValueError("taps must be finite")
        ar, ac = (int(v) for v in self.anchor)
        if not (0 <= ar < taps.shape[0] and 0 <= ac < taps.shape[1]):
            raise ValueError("anchor outside the kernel")
        _check_normalization(taps.ravel(), context="in kernel taps")
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "anchor", (ar, ac))


def gaussian_kernel(size: int, sigma: float) -> ConvolutionKernel:
    """Unnormalized Gaussian taps on an odd size x size grid.

    taps[r][c] = exp(-((r-a)^2 + (c-a)^2) / (2 sigma^2)) with a = size//2.
    Normalization happens inside the forward pass, not here.
    """
    if size < 1 or size % 2 == 0:
        raise ValueError("size must be a positive odd integer")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    a = size // 2
    r = np.arange(size) - a
    d2 = r[:, None] ** 2 + r[None, :] ** 2
    taps = np.exp(-d2 / (2.0 * sigma**2))
    return ConvolutionKernel(taps=taps, anchor=(a, a))


def convolve_image(image, kernel: ConvolutionKernel, border: str = "renormalize") -> np.ndarray:
    """Normalized convolution: every output pixel is one oscillator solve.

    Border handling:
      * ``renormalize`` (default): the window is truncated at the image
        edge and only the overlapping taps enter the weighted average.
      * ``reflect``: the image is mirror-padded (edge pixel not repeated).
      * ``zero``: the image is zero-padded; all taps stay in the
        denominator.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise ValueError("image must be a non-empty 2-D array")
    if border not in BORDER_RULES:
        raise ValueError(f"border must be one of {BORDER_RULES}")
    taps = kernel.taps
    kh, kw = taps.shape
    ar, ac = kernel.anchor
    h, w = img.shape

    if border == "renormalize":
        out = np.empty_like(img)
        for r in range(h):
            r0 = r - ar
            tr0, tr1 = max(0, -r0), min(kh, h - r0)
            for c in range(w):
                c0 = c - ac
                tc0, tc1 = max(0, -c0), min(kw, w - c0)
                sub = taps[tr0:tr1, tc0:tc1]
                window = img[r0 + tr0 : r0 + tr1, c0 + tc0 : c0 + tc1]
                try:
                    out[r, c] = forward_single(sub.ravel(), window.ravel())
                except DegenerateNormalizationError as err:
                    raise DegenerateNormalizationError(
                        f"truncated window at pixel ({r},{c}) is degenerate: {err}"
                    ) from None
        return out

    pad_mode = "reflect" if border == "reflect" else "constant"
    padded = np.pad(img, ((ar, kh - 1 - ar), (ac, kw - 1 - ac)), mode=pad_mode)
    out = np.empty_like(img)
    flat_taps = taps.ravel()
    for r in range(h):
        for c in range(w):
            window = padded[r : r + kh, c : c + kw]
            out[r, c] = forward_single(flat_taps, window.ravel())
    return out
