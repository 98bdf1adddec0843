"""Three-well placement over per-scenario injectability grids.

Grid node ``(i, j)`` sits at real coordinates ``(i, j)`` with 1-based
``i in [1, rows]`` and ``j in [1, cols]``.  A design ``x`` holds three
well coordinates ``(u1, v1, u2, v2, u3, v3)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..worstcase import WorstCaseProblem


class GridFormatError(ValueError):
    pass


@dataclass
class GridStack:
    values: np.ndarray  # (m, rows, cols)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 3:
            raise ValueError("grid values must have shape (m, rows, cols)")
        if self.rows < 2 or self.cols < 2:
            raise ValueError("grids need at least 2 rows and 2 columns")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid values must be finite")
        if np.any(self.values < 0):
            raise ValueError("grid values must be non-negative")

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def rows(self) -> int:
        return self.values.shape[1]

    @property
    def cols(self) -> int:
        return self.values.shape[2]

    def __eq__(self, other) -> bool:
        return isinstance(other, GridStack) and np.array_equal(self.values, other.values)


def bilinear_interpolate(grid: np.ndarray, point) -> float:
    """Bilinear interpolation of one 2-D layer at 1-based real coordinates."""
    rows, cols = grid.shape
    u, v = (float(c) for c in point)
    if not (1 <= u <= rows and 1 <= v <= cols):
        raise ValueError(f"point ({u}, {v}) outside [1, {rows}] x [1, {cols}]")
    return float(_interp(grid[None], np.array([[u, v]]))[0, 0])


def _interp(layers: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Interpolate every layer at every point; returns shape (layers, points)."""
    _, rows, cols = layers.shape
    u = pts[:, 0] - 1.0
    v = pts[:, 1] - 1.0
    i0 = np.clip(np.floor(u).astype(np.intp), 0, rows - 2)
    j0 = np.clip(np.floor(v).astype(np.intp), 0, cols - 2)
    fu = u - i0
    fv = v - j0
    g00 = layers[:, i0, j0]
    g01 = layers[:, i0, j0 + 1]
    g10 = layers[:, i0 + 1, j0]
    g11 = layers[:, i0 + 1, j0 + 1]
    return (g00 * (1 - fu) * (1 - fv) + g01 * (1 - fu) * fv + g10 * fu * (1 - fv) + g11 * fu * fv)


def _interference_sum(fb: np.ndarray, dist: np.ndarray) -> np.ndarray:
    """Interference-weighted injection for sorted wells.

    ``fb`` has shape (k, q, 3) with per-well volumes; ``dist`` has shape
    (k, 3, 3).  Wells are ranked by volume, descending, ties by index.
    """
    order = np.argsort(-fb, axis=2, kind="stable")
    fs = np.take_along_axis(fb, order, axis=2)
    a, b, c = order[..., 0], order[..., 1], order[..., 2]
    k = np.arange(fb.shape[0])[:, None]
    keep = 1.0 - np.exp(-dist)
    return fs[..., 0] + fs[..., 1] * keep[k, b, a] + fs[..., 2] * keep[k, c, a] * keep[k, c, b]


def well_values(stack: GridStack, X: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Total injection ``f(x, s)`` for rows of ``X`` and scenarios ``idx``; shape (k, q)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != 6:
        raise ValueError(f"well placement needs 6 coordinates, got {X.shape[1]}")
    lo = np.array([1.0, 1.0])
    hi = np.array([stack.rows, stack.cols], dtype=float)
    W = np.clip(X.reshape(-1, 3, 2), lo, hi)
    k = W.shape[0]
    fb = _interp(stack.values[idx], W.reshape(-1, 2)).reshape(len(idx), k, 3).transpose(1, 0, 2)
    diff = W[:, :, None, :] - W[:, None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=3))
    return _interference_sum(fb, dist)


def well_placement_eval(stack: GridStack, x, s: int) -> float:
    return float(well_values(stack, np.asarray(x)[None, :], np.array([s]))[0, 0])


def make_well_problem(stack: GridStack) -> WorstCaseProblem:
    """Max-min well placement posed as minimisation of ``max_s -f(x, s)``."""
    lo = np.ones(6)
    hi = np.tile([float(stack.rows), float(stack.cols)], 3)

    def evaluate(X, idx):
        return -well_values(stack, X, idx)

    return WorstCaseProblem(
        n=6,
        m=stack.m,
        evaluate=evaluate,
        name="WellPlacement",
        domain=(lo, hi),
        params={"family": "WellPlacement", "m": stack.m, "rows": stack.rows, "cols": stack.cols},
    )


def generate_synthetic_grids(
    seed: int,
    m: int = 50,
    rows: int = 50,
    cols: int = 50,
    bump_count: int = 12,
    smoothness: float = 6.0,
) -> GridStack:
    """Random non-negative injectability fields with a shared macro-structure.

    Every scenario reuses the same ``bump_count`` Gaussian bumps with
    scenario-specific amplitudes and jittered centres, then adds a few
    private bumps.  The scenario that is worst at a location therefore
    changes across the grid.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = np.random.default_rng(seed)
    ii, jj = np.meshgrid(np.arange(1, rows + 1), np.arange(1, cols + 1), indexing="ij")
    centers = rng.uniform([1, 1], [rows, cols], size=(bump_count, 2))
    widths = smoothness * rng.uniform(0.6, 1.6, size=bump_count)
    heights = rng.uniform(0.3, 1.0, size=bump_count)
    private = max(1, bump_count // 3)
    values = np.empty((m, rows, cols))
    for s in range(m):
        layer = np.full((rows, cols), 0.05)
        amp = heights * rng.lognormal(0.0, 0.35, size=bump_count)
        shift = rng.normal(0.0, smoothness / 3, size=(bump_count, 2))
        for c, w, a in zip(centers + shift, widths, amp):
            layer += a * np.exp(-((ii - c[0]) ** 2 + (jj - c[1]) ** 2) / (2 * w * w))
        pc = rng.uniform([1, 1], [rows, cols], size=(private, 2))
        pw = smoothness * rng.uniform(0.4, 1.0, size=private)
        pa = rng.uniform(0.1, 0.5, size=private)
        for c, w, a in zip(pc, pw, pa):
            layer += a * np.exp(-((ii - c[0]) ** 2 + (jj - c[1]) ** 2) / (2 * w * w))
        values[s] = layer
    return GridStack(values)


def save_grids(stack: GridStack, path) -> None:
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"{stack.m} {stack.rows} {stack.cols}\n")
        for s in range(stack.m):
            for row in stack.values[s]:
                fh.write(" ".join(repr(float(v)) for v in row))
                fh.write("\n")
            if s + 1 < stack.m:
                fh.write("\n")


def load_grids(path) -> GridStack:
    path = Path(path)
    text = path.read_text()
    lines = text.splitlines()
    header_at = next((i for i, ln in enumerate(lines) if ln.strip()), None)
    if header_at is None:
        raise GridFormatError(f"{path}: empty file, missing 'm rows cols' header")
    parts = lines[header_at].split()
    try:
        m, rows, cols = (int(p) for p in parts)
    except ValueError:
        raise GridFormatError(f"{path}: malformed header {lines[header_at]!r}, expected 'm rows cols'") from None
    if m < 1 or rows < 2 or cols < 2:
        raise GridFormatError(f"{path}: header dimensions must be m >= 1, rows >= 2, cols >= 2")
    tokens = " ".join(lines[header_at + 1 :]).split()
    expected = m * rows * cols
    if len(tokens) != expected:
        raise GridFormatError(f"{path}: expected {expected} values for header ({m}, {rows}, {cols}), found {len(tokens)}")
    try:
        vals = np.array([float(t) for t in tokens])
    except ValueError as exc:
        raise GridFormatError(f"{path}: {exc}") from None
    if not np.all(np.isfinite(vals)):
        raise GridFormatError(f"{path}: non-finite grid value")
    if np.any(vals < 0):
        raise GridFormatError(f"{path}: negative grid value")
    return GridStack(vals.reshape(m, rows, cols))


def worst_scenario_map(stack: GridStack) -> np.ndarray:
    """Index of the lowest-volume scenario at every grid node."""
    return np.argmin(stack.values, axis=0)


def distinct_worst_scenarios(stack: GridStack) -> int:
    return int(np.unique(worst_scenario_map(stack)).size)


__all__ = [
    "GridStack",
    "GridFormatError",
    "bilinear_interpolate",
    "well_values",
    "well_placement_eval",
    "make_well_problem",
    "generate_synthetic_grids",
    "save_grids",
    "load_grids",
    "worst_scenario_map",
    "distinct_worst_scenarios",
]
