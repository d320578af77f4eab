"""Prenatal visual-system development on a simulated retina.

A rectangular world of pixels projects onto irregularly placed retina
cells through a row-stochastic transmission operator (a distance Gaussian
per cell, modeling lens blur and the unknown cell layout).  Spontaneous
retinal waves, moving Gaussian blobs sweeping the world along random
lines, provide the only training signal.  Each wave frame drives a
forward pass through the retina-to-LGN weights, and a winner-takes-all
Hebbian update teaches one LGN unit per world position to recognize
activity at its location, so that reading the LGN grid reconstructs the
world without the system ever knowing where its retina cells sit.

Competition is local: only the LGN units whose grid positions are nearest
the wave's current center are candidates for a frame.  Global competition
with one unit per pixel collapses to a handful of winners.  The candidate
set defaults to a single unit (the nearest): measurements show that with
wider sets a unit that has already learned its location out-responds its
untrained neighbors inside their own homes, monopolizing whole regions
and leaving most units untrained (9-unit sets reach straight-line
correlation ~0.15 on the 16x16 reference configuration versus ~0.7 for
the nearest-unit rule).  Wider sets stay available via ``neighborhood``
for experimentation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateNormalizationError, NumericOverflowError
from .hebbian import linear_lr
from .mimo import DEGENERACY_RTOL
from .seeding import substream

__all__ = [
    "RetinaWorld",
    "WaveParams",
    "RetinalWave",
    "build_world",
    "generate_wave",
    "develop",
    "straight_line_images",
    "evaluate_straight_line",
    "pseudo_inverse_weights",
]

WEIGHT_LIMIT = 1e12
MIN_FRAME_SIGNAL = 0.05  # frames dimmer than this carry no usable wave


@dataclass(frozen=True)
class RetinaWorld:
    """World grid, retina sampling model, and retina-to-LGN weights."""

    grid: tuple  # (rows, cols)
    positions: np.ndarray  # (n_cells, 2) in the unit square, (row, col) order
    transmission: np.ndarray  # (n_cells, rows*cols), rows sum to 1
    lgn_weights: np.ndarray  # (n_cells, rows*cols)

    def __post_init__(self):
        rows, cols = (int(v) for v in self.grid)
        pos = np.asarray(self.positions, dtype=np.float64)
        trans = np.asarray(self.transmission, dtype=np.float64)
        w = np.asarray(self.lgn_weights, dtype=np.float64)
        n_pixels = rows * cols
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError("positions must be (n_cells, 2)")
        if np.any(pos < 0.0) or np.any(pos > 1.0):
            raise ValueError("positions must lie inside the unit square")
        n_cells = pos.shape[0]
        if trans.shape != (n_cells, n_pixels):
            raise ValueError("transmission must be (n_cells, rows*cols)")
        if not np.allclose(trans.sum(axis=1), 1.0, atol=1e-9):
            raise ValueError("transmission rows must sum to 1")
        if w.shape != (n_cells, n_pixels):
            raise ValueError("lgn_weights must be (n_cells, rows*cols)")
        object.__setattr__(self, "grid", (rows, cols))
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "transmission", trans)
        object.__setattr__(self, "lgn_weights", w)

    @property
    def n_cells(self) -> int:
        return self.positions.shape[0]

    @property
    def n_pixels(self) -> int:
        return self.grid[0] * self.grid[1]

    def retina_response(self, image) -> np.ndarray:
        """r = P @ p for a world image (grid-shaped or flat)."""
        p = np.asarray(image, dtype=np.float64).ravel()
        if p.size != self.n_pixels:
            raise ValueError("image does not match the world grid")
        return self.transmission @ p

    def lgn_readout(self, image) -> np.ndarray:
        """Flat LGN activity l_j = sum_i w_ij r_i for a world image."""
        return self.retina_response(image) @ self.lgn_weights


@dataclass(frozen=True)
class WaveParams:
    """Moving-blob wave generator settings, in pixel units."""

    sigma: float = 0.5
    speed: float = 0.5
    duration: int | None = None  # frames; None = long enough to cross the grid

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.speed < 0:
            raise ValueError("speed must be non-negative")
        if self.speed == 0 and self.duration is None:
            raise ValueError("speed 0 needs an explicit duration")
        if self.duration is not None and self.duration < 1:
            raise ValueError("duration must be at least 1 frame")


@dataclass(frozen=True)
class RetinalWave:
    """One wave: a stack of world-pixel frames with values in [0, 1]."""

    frames: np.ndarray  # (n_frames, rows, cols)
    params: WaveParams

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 3 or frames.shape[0] < 1:
            raise ValueError("frames must be (n_frames, rows, cols)")
        if frames.min() < 0.0 or frames.max() > 1.0:
            raise ValueError("frame values must lie in [0, 1]")
        object.__setattr__(self, "frames", frames)


def _pixel_centers_unit(rows: int, cols: int) -> np.ndarray:
    """(row, col) pixel centers mapped into the unit square."""
    rr, cc = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    return np.column_stack([(rr.ravel() + 0.5) / rows, (cc.ravel() + 0.5) / cols])


def _pixel_grid(rows: int, cols: int):
    return np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")


def build_world(grid, n_cells: int, blur_sigma: float, seed: int) -> RetinaWorld:
    """Seeded world: uniform random cell positions, distance-Gaussian transmission.

    blur_sigma is in unit-square units.  Each transmission row is
    exp(-d^2 / (2 sigma^2)) over pixel centers, normalized to sum 1, so a
    vanishing blur degenerates to nearest-pixel sampling.
    """
    rows, cols = (int(v) for v in grid)
    if rows < 1 or cols < 1:
        raise ValueError("grid must have positive extent")
    if n_cells < 1:
        raise ValueError("need at least one retina cell")
    if not blur_sigma > 0:
        raise ValueError("blur_sigma must be positive")
    if n_cells < rows * cols:
        warnings.warn(
            f"{n_cells} cells sample {rows * cols} pixels; reconstruction "
            "will be rank-deficient",
            stacklevel=2,
        )
    rng = np.random.default_rng(substream(seed, "positions"))
    positions = rng.uniform(0.0, 1.0, size=(n_cells, 2))
    centers = _pixel_centers_unit(rows, cols)
    d2 = np.sum((positions[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    # Subtract the row minimum before exponentiating so tiny sigmas cannot
    # underflow every entry of a row to zero.
    logits = -(d2 - d2.min(axis=1, keepdims=True)) / (2.0 * blur_sigma**2)
    trans = np.exp(logits)
    trans /= trans.sum(axis=1, keepdims=True)
    w_rng = np.random.default_rng(substream(seed, "weights"))
    w = w_rng.uniform(0.0, 1.0, size=(n_cells, rows * cols))
    w /= w.sum(axis=0)
    return RetinaWorld(grid=(rows, cols), positions=positions, transmission=trans, lgn_weights=w)


def generate_wave(world: RetinaWorld, params: WaveParams, seed: int) -> RetinalWave:
    """A Gaussian blob traversing the grid along a seeded random line.

    The line has a random direction and a random perpendicular offset, so
    over many waves every pixel is visited.  The blob starts and ends a
    few sigma outside the grid.
    """
    rows, cols = world.grid
    rng = np.random.default_rng(seed)
    angle = rng.uniform(0.0, 2.0 * np.pi)
    direction = np.array([np.sin(angle), np.cos(angle)])
    perp = np.array([-direction[1], direction[0]])
    half_diag = 0.5 * np.hypot(rows - 1, cols - 1)
    offset = rng.uniform(-half_diag, half_diag)
    center = np.array([(rows - 1) / 2.0, (cols - 1) / 2.0]) + offset * perp
    margin = 3.0 * params.sigma
    half_len = half_diag + margin
    if params.duration is not None:
        n_frames = params.duration
    else:
        n_frames = int(np.ceil(2.0 * half_len / params.speed)) + 1
    start = center - half_len * direction
    rr, cc = _pixel_grid(rows, cols)
    frames = np.empty((n_frames, rows, cols))
    for t in range(n_frames):
        blob = start + (t * params.speed) * direction
        d2 = (rr - blob[0]) ** 2 + (cc - blob[1]) ** 2
        frames[t] = np.exp(-d2 / (2.0 * params.sigma**2))
    return RetinalWave(frames=np.clip(frames, 0.0, 1.0), params=params)


def _frame_centroid(frame) -> np.ndarray:
    """Intensity-weighted center of a frame, in pixel coordinates."""
    total = frame.sum()
    rr, cc = _pixel_grid(*frame.shape)
    return np.array([(rr * frame).sum() / total, (cc * frame).sum() / total])


def develop(
    world: RetinaWorld,
    n_waves: int,
    lr_schedule=None,
    lam: float = 0.0,
    seed: int = 0,
    wave_params: WaveParams = WaveParams(),
    neighborhood: int = 1,
    update_per: str = "frame",
) -> RetinaWorld:
    """Train the LGN weights on n_waves spontaneous waves.

    Per frame (default) or once per wave on the temporal-mean frame:
    compute the retina response, let the ``neighborhood`` LGN units
    closest to the wave's current center compete, and apply the
    winner-takes-all update to those columns.  Deterministic per seed.

    Defaults (nearest-unit candidate set, no loser decay, the 0.5 -> 0.05
    rate ramp) are the measured sweet spot for the straight-line
    reconstruction experiment; see the module docstring for why wider
    candidate sets underperform.  Loser decay with lam > 0 pushes
    persistently losing units into anti-correlated templates and is off
    by default here (unlike the classifier, whose data regime needs it).
    """
    if n_waves < 0:
        raise ValueError("n_waves must be non-negative")
    if update_per not in ("frame", "wave"):
        raise ValueError("update_per must be 'frame' or 'wave'")
    if n_waves == 0:
        return world
    schedule = lr_schedule if lr_schedule is not None else linear_lr(0.5, 0.05)
    if not callable(schedule):
        value = float(schedule)
        schedule = lambda step, total: value  # noqa: E731  constant rate
    rows, cols = world.grid
    rr, cc = _pixel_grid(rows, cols)
    unit_pos = np.column_stack([rr.ravel(), cc.ravel()]).astype(np.float64)
    W = world.lgn_weights.copy()
    k = min(neighborhood, world.n_pixels)
    wave_seed_root = substream(seed, "waves")
    for wave_idx in range(n_waves):
        wave = generate_wave(world, wave_params, seed=wave_seed_root + wave_idx)
        lr = schedule(wave_idx, n_waves)
        frames = (
            wave.frames
            if update_per == "frame"
            else wave.frames.mean(axis=0, keepdims=True)
        )
        for frame_idx, frame in enumerate(frames):
            if frame.max() < MIN_FRAME_SIGNAL:
                continue
            centroid = _frame_centroid(frame)
            d2 = np.sum((unit_pos - centroid) ** 2, axis=1)
            candidates = np.argpartition(d2, k - 1)[:k]
            candidates = candidates[np.argsort(d2[candidates], kind="stable")]
            r = world.transmission @ frame.ravel()
            try:
                _local_wta_update(W, r, candidates, lr, lam)
            except (DegenerateNormalizationError, NumericOverflowError) as err:
                raise type(err)(
                    f"wave {wave_idx}, frame {frame_idx}: {err}"
                ) from err
    return replace(world, lgn_weights=W)


def _local_wta_update(W, r, candidates, lr, lam):
    cols = W[:, candidates]
    col_sums = cols.sum(axis=0)
    col_mags = np.abs(cols).sum(axis=0)
    bad = (col_mags == 0.0) | (np.abs(col_sums) < DEGENERACY_RTOL * col_mags)
    if np.any(bad):
        j = int(candidates[np.argmax(bad)])
        raise DegenerateNormalizationError(
            f"LGN column {j} has a degenerate sum", column=j
        )
    responses = (r @ cols) / col_sums
    winner = int(np.argmax(responses))
    y = responses[winner]
    coef = np.full(candidates.size, -lr * lam)
    coef[winner] = lr
    W[:, candidates] = cols + (coef * y) * (r[:, None] - y * cols)
    peak = np.abs(W[:, candidates]).max()
    if not np.isfinite(peak) or peak > WEIGHT_LIMIT:
        raise NumericOverflowError(f"|W| reached {peak:.3e}; reduce the learning rate")


def straight_line_images(grid) -> np.ndarray:
    """Test battery: every row line, every column line, both diagonals."""
    rows, cols = grid
    images = []
    for r in range(rows):
        img = np.zeros((rows, cols))
        img[r, :] = 1.0
        images.append(img)
    for c in range(cols):
        img = np.zeros((rows, cols))
        img[:, c] = 1.0
        images.append(img)
    if rows == cols and rows > 1:
        images.append(np.eye(rows))
        images.append(np.fliplr(np.eye(rows)))
    return np.stack(images)


def evaluate_straight_line(world: RetinaWorld) -> tuple[float, float]:
    """(mse, correlation) of LGN reconstructions of straight-line images.

    Each test image is pushed through transmission and the learned
    readout; unit j's value is placed at grid position j and compared to
    the source pixel by pixel.  Correlation is the comparable metric (the
    readout scale is arbitrary); MSE is reported alongside for reference.
    """
    images = straight_line_images(world.grid)
    mses, corrs = [], []
    for img in images:
        p = img.ravel()
        l = world.lgn_readout(img)
        mses.append(float(np.mean((l - p) ** 2)))
        l_std = float(np.std(l))
        p_std = float(np.std(p))
        if l_std == 0.0 or p_std == 0.0:
            corrs.append(0.0)
        else:
            corrs.append(float(np.corrcoef(l, p)[0, 1]))
    return float(np.mean(mses)), float(np.mean(corrs))


def pseudo_inverse_weights(world: RetinaWorld) -> np.ndarray:
    """Least-squares readout weights, the reconstruction ceiling.

    With W = pinv(P).T the readout of r = P @ p is the least-squares
    reconstruction of p; no learned weights can correlate better.
    """
    return np.linalg.pinv(world.transmission).T
