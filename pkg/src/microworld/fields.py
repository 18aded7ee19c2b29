"""Per-patch scalar fields (pheromone, nest scent): evaporation and diffusion.

Fields are float64 arrays indexed [y, x], one value per patch, always
non-negative. Diffusion is mass-conserving: the share a patch gives away is
split in eight equal parts, and any part whose target would fall off a
bounded grid stays at the source.
"""

from __future__ import annotations

import numpy as np

from .grid import MOORE8_OFFSETS, WorldGrid


class FieldError(ValueError):
    pass


def new_field(grid: WorldGrid) -> np.ndarray:
    return np.zeros((grid.height, grid.width), dtype=np.float64)


def field_evaporate(values: np.ndarray, rate: float, out: np.ndarray | None = None) -> np.ndarray:
    """Multiply every patch by (1 - rate). out may alias values."""
    if not 0.0 <= rate <= 1.0:
        raise FieldError(f"evaporation rate must be in [0, 1], got {rate}")
    if out is None:
        out = np.empty_like(values)
    np.multiply(values, 1.0 - rate, out=out)
    return out


def field_diffuse(values: np.ndarray, share: float, out: np.ndarray | None = None) -> np.ndarray:
    """Spread `share` of each patch equally over its eight neighbors.

    Eighths aimed off a bounded grid remain at the source, so the total is
    conserved exactly (up to float accumulation). out may alias values.
    """
    if not 0.0 <= share <= 1.0:
        raise FieldError(f"diffusion share must be in [0, 1], got {share}")
    h, w = values.shape
    piece = values * (share / 8.0)
    if out is None:
        out = np.empty_like(values)
    np.multiply(values, 1.0 - share, out=out)
    for dx, dy in MOORE8_OFFSETS:
        sy0, sy1 = max(0, -dy), h - max(0, dy)
        sx0, sx1 = max(0, -dx), w - max(0, dx)
        out[sy0 + dy:sy1 + dy, sx0 + dx:sx1 + dx] += piece[sy0:sy1, sx0:sx1]
        # eighths with no in-bounds target stay home
        if dy < 0:
            out[:sy0, :] += piece[:sy0, :]
        elif dy > 0:
            out[sy1:, :] += piece[sy1:, :]
        if dx < 0:
            out[sy0:sy1, :sx0] += piece[sy0:sy1, :sx0]
        elif dx > 0:
            out[sy0:sy1, sx1:] += piece[sy0:sy1, sx1:]
    return out
