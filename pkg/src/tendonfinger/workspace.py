"""
Reachable-point sweeps of the coupled finger and occupancy-grid areas.

Each link's cloud is produced by sweeping the first joint angle over its
full range (the other joints follow through the coupling ratios) while
shrinking every link up to and including that link from zero to its full
length, collecting the link's end point.

Sampling formula: link i sweeps 1 + i variables (theta_1 plus i partial
lengths). Each variable of link i gets

    n_i = max(2, ceil(resolution ** (2 / (i + 1))))

samples, so every link's cloud holds roughly resolution**2 points and
the total work stays bounded by the single resolution knob. Per-link
counts are n_i ** (i + 1) exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyCloud, ResolutionTooLow
from .model import THETA1_MAX, THETA1_MIN, FingerGeometry

CLOUD_CSV_HEADER = "link,x_m,y_m"


@dataclass(frozen=True)
class WorkspaceCloud:
    """Per-link reachable point sets from one sweep."""

    points_per_link: tuple[np.ndarray, np.ndarray, np.ndarray]
    sample_counts: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]
    resolution: int
    bounding_box: tuple[float, float, float, float]  # xmin, ymin, xmax, ymax

    def all_points(self) -> np.ndarray:
        return np.vstack(self.points_per_link)


def samples_per_variable(resolution: int, link: int) -> int:
    """Samples for each swept variable of 1-based link `link`."""
    return max(2, math.ceil(resolution ** (2.0 / (link + 1))))


def sweep_workspace(geom: FingerGeometry, resolution: int) -> WorkspaceCloud:
    """Sweep the coupled configuration space; see the module docstring
    for the per-link sampling formula."""
    if resolution < 2:
        raise ResolutionTooLow(f"resolution must be >= 2, got {resolution}")

    radii = np.asarray(geom.guide_radii)
    rate = radii[0] / radii  # theta_j = theta_1 * R1 / Rj

    clouds = []
    counts = []
    for link in (1, 2, 3):
        n = samples_per_variable(resolution, link)
        theta1 = np.linspace(THETA1_MIN, THETA1_MAX, n)
        phi = np.cumsum(theta1[:, None] * rate[None, :], axis=1)  # (n, 3)
        axes = [np.linspace(0.0, geom.link_lengths[j], n) for j in range(link)]
        grids = np.meshgrid(np.arange(n), *axes, indexing="ij")
        idx = grids[0].ravel()
        x = np.zeros(idx.shape)
        y = np.zeros(idx.shape)
        for j in range(link):
            lj = grids[1 + j].ravel()
            x += lj * np.cos(phi[idx, j])
            y += lj * np.sin(phi[idx, j])
        clouds.append(np.column_stack((x, y)))
        counts.append(tuple([n] * (link + 1)))

    allpts = np.vstack(clouds)
    bbox = (
        float(allpts[:, 0].min()), float(allpts[:, 1].min()),
        float(allpts[:, 0].max()), float(allpts[:, 1].max()),
    )
    return WorkspaceCloud(
        points_per_link=tuple(clouds),
        sample_counts=tuple(counts),
        resolution=resolution,
        bounding_box=bbox,
    )


@dataclass(frozen=True)
class OccupancyGrid:
    """Boolean cell grid over a cloud with its area estimate."""

    marked: np.ndarray  # (ny, nx) bool, row 0 at ymin
    origin: tuple[float, float]
    cell_size: float

    @property
    def area(self) -> float:
        return float(np.count_nonzero(self.marked)) * self.cell_size ** 2


def occupancy_grid(
    cloud: WorkspaceCloud, cell_size: float, *, links=None
) -> OccupancyGrid:
    """Mark every cell containing at least one cloud point.

    `links` restricts the gridded points to the given 1-based link ids;
    the grid extent always covers the whole cloud's bounding box so
    per-link grids share cell alignment.
    """
    xmin, ymin, xmax, ymax = cloud.bounding_box
    diag = math.hypot(xmax - xmin, ymax - ymin)
    if cell_size <= 0.0:
        raise ValueError("cell_size must be > 0")
    if diag > 0.0 and cell_size > diag:
        raise ValueError("cell_size exceeds the bounding-box diagonal")

    if links is None:
        pts = cloud.all_points()
    else:
        chosen = [cloud.points_per_link[i - 1] for i in links]
        pts = np.vstack(chosen) if chosen else np.empty((0, 2))
    if pts.shape[0] == 0:
        raise EmptyCloud("no points to grid")

    nx = int(math.floor((xmax - xmin) / cell_size)) + 1
    ny = int(math.floor((ymax - ymin) / cell_size)) + 1
    ix = np.clip(((pts[:, 0] - xmin) / cell_size).astype(int), 0, nx - 1)
    iy = np.clip(((pts[:, 1] - ymin) / cell_size).astype(int), 0, ny - 1)
    marked = np.zeros((ny, nx), dtype=bool)
    marked[iy, ix] = True
    return OccupancyGrid(marked=marked, origin=(xmin, ymin), cell_size=cell_size)


def cloud_to_csv(cloud: WorkspaceCloud) -> str:
    """One row per point: link,x_m,y_m."""
    lines = [CLOUD_CSV_HEADER]
    for link, pts in enumerate(cloud.points_per_link, start=1):
        for x, y in pts:
            lines.append(f"{link},{x:.9g},{y:.9g}")
    return "\n".join(lines) + "\n"


def grid_to_pgm(grid: OccupancyGrid) -> str:
    """ASCII PGM (P2, maxval 1), top row at the largest y."""
    ny, nx = grid.marked.shape
    lines = ["P2", f"{nx} {ny}", "1"]
    for row in grid.marked[::-1]:
        lines.append(" ".join("1" if v else "0" for v in row))
    return "\n".join(lines) + "\n"


def grid_sidecar(grid: OccupancyGrid, per_link_area: dict | None = None) -> str:
    """JSON sidecar describing an occupancy grid export."""
    ny, nx = grid.marked.shape
    doc = {
        "cell_size_m": grid.cell_size,
        "origin_m": list(grid.origin),
        "nx": nx,
        "ny": ny,
        "area_m2": grid.area,
    }
    if per_link_area is not None:
        doc["per_link_area_m2"] = per_link_area
    return json.dumps(doc, indent=2) + "\n"
