"""Poisson network geometry on a wrap-around square window.

BSs form a homogeneous PPP; each BS serves one user placed uniformly at
random in its Voronoi cell under the torus metric.  Users are placed by
rejection: draw uniform points in the window, give each cell the first
draw that lands in it.  That is the exact uniform-in-cell law without
ever constructing Voronoi polygons on a torus.

The path-loss matrix (user i, BS k) -> |X_k - Y_i|^-alpha is dense and
precomputed once per realization; the slot engine only ever needs sums
over its columns.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError, RejectionBudgetError

__all__ = [
    "Window",
    "NetworkRealization",
    "sample_ppp",
    "torus_distance",
    "place_users",
    "build_pathloss",
    "make_realization",
    "dump_realization_csv",
]

# per-BS rejection budget; exceeding it means a pathologically tiny cell
_REJECTION_BUDGET = 10**6
_PATHLOSS_ENTRY_WARN = 10**8


@dataclass(frozen=True)
class Window:
    """Square observation window of side W; wraparound makes it a torus."""

    side: float
    wraparound: bool = True

    def __post_init__(self) -> None:
        if not self.side > 0:
            raise DomainError(f"window side must be positive, got {self.side}")


@dataclass(frozen=True, eq=False)
class NetworkRealization:
    """One sampled network: BS points, their users, distances, path losses."""

    bs_points: np.ndarray
    user_points: np.ndarray
    link_distance: np.ndarray
    pathloss_matrix: np.ndarray
    window: Window
    alpha: float

    @property
    def n_pairs(self) -> int:
        return self.bs_points.shape[0]


def sample_ppp(intensity: float, window: Window, rng: np.random.Generator) -> np.ndarray:
    """Sample PPP(intensity) on the window; resamples until >= 2 points
    (a realization needs at least one interferer)."""
    if not intensity > 0:
        raise DomainError(f"intensity must be positive, got {intensity}")
    lam = intensity * window.side**2
    for _ in range(100_000):
        count = rng.poisson(lam)
        if count >= 2:
            return rng.uniform(0.0, window.side, size=(count, 2))
    raise RejectionBudgetError(
        f"could not draw >= 2 BSs at intensity*area = {lam}")


def torus_distance(p, q, window: Window):
    """Distance between points (or arrays of points) with per-coordinate
    wrap to [-W/2, W/2]; plain Euclidean when wraparound is off."""
    d = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
    if window.wraparound:
        d = d - window.side * np.round(d / window.side)
    out = np.hypot(d[..., 0], d[..., 1])
    return float(out) if out.ndim == 0 else out


def _dist_matrix(users: np.ndarray, bs: np.ndarray, window: Window,
                 block: int = 512) -> np.ndarray:
    # chunked over user rows to cap the (block, n, 2) temporaries
    n_u, n_b = users.shape[0], bs.shape[0]
    out = np.empty((n_u, n_b))
    for lo in range(0, n_u, block):
        hi = min(lo + block, n_u)
        d = users[lo:hi, None, :] - bs[None, :, :]
        if window.wraparound:
            d -= window.side * np.round(d / window.side)
        out[lo:hi] = np.hypot(d[..., 0], d[..., 1])
    return out


def _nearest_tree(bs_points: np.ndarray, window: Window) -> cKDTree:
    if window.wraparound:
        return cKDTree(bs_points, boxsize=window.side)
    return cKDTree(bs_points)


def place_users(bs_points: np.ndarray, window: Window,
                rng: np.random.Generator) -> np.ndarray:
    """One user per BS, uniform in that BS's Voronoi cell (torus metric)."""
    n = bs_points.shape[0]
    if n < 2:
        raise DomainError("need at least 2 BSs to place users")
    tree = _nearest_tree(bs_points, window)
    users = np.full((n, 2), np.nan)
    unplaced = np.ones(n, dtype=bool)
    total_draws = 0
    budget = n * _REJECTION_BUDGET
    while unplaced.any():
        batch = max(2048, 2 * int(unplaced.sum()))
        if total_draws + batch > budget:
            missing = np.flatnonzero(unplaced)[:10]
            raise RejectionBudgetError(
                f"user placement exhausted {budget} draws; "
                f"unfilled cells (first few): {missing.tolist()}")
        cand = rng.uniform(0.0, window.side, size=(batch, 2))
        total_draws += batch
        owner = tree.query(cand)[1]
        fresh = unplaced[owner]
        if not fresh.any():
            continue
        cells, first = np.unique(owner[fresh], return_index=True)
        users[cells] = cand[np.flatnonzero(fresh)[first]]
        unplaced[cells] = False
    return users


def build_pathloss(bs_points: np.ndarray, user_points: np.ndarray, alpha: float,
                   window: Window) -> np.ndarray:
    """Dense torus-distance^-alpha matrix indexed (user i, BS k)."""
    if not alpha > 2:
        raise DomainError(f"alpha must exceed 2, got {alpha}")
    dist = _dist_matrix(user_points, bs_points, window)
    if np.any(dist == 0.0):
        raise DomainError("coincident BS/user point; resample the realization")
    return dist**(-alpha)


def make_realization(intensity: float, window: Window, alpha: float,
                     rng: np.random.Generator) -> NetworkRealization:
    """Sample geometry until non-degenerate, then freeze points, distances,
    and the path-loss table.  The nearest-BS association is asserted."""
    if not alpha > 2:
        raise DomainError(f"alpha must exceed 2, got {alpha}")
    for _ in range(100):
        bs = sample_ppp(intensity, window, rng)
        users = place_users(bs, window, rng)
        dist = _dist_matrix(users, bs, window)
        if np.any(dist == 0.0):
            continue  # probability-zero degeneracy; redraw
        n = bs.shape[0]
        if n * n > _PATHLOSS_ENTRY_WARN:
            warnings.warn(f"path-loss table has {n * n:.2e} entries",
                          RuntimeWarning, stacklevel=2)
        if not np.array_equal(dist.argmin(axis=1), np.arange(n)):
            raise AssertionError("user not nearest to its serving BS")
        d_link = dist.diagonal().copy()
        pathloss = dist**(-alpha)
        # diagonal is definitionally D_i^-alpha; rewrite to keep it exact
        pathloss[np.arange(n), np.arange(n)] = d_link**(-alpha)
        return NetworkRealization(bs_points=bs, user_points=users,
                                  link_distance=d_link,
                                  pathloss_matrix=pathloss,
                                  window=window, alpha=alpha)
    raise RejectionBudgetError("100 degenerate geometry redraws in a row")


def dump_realization_csv(net: NetworkRealization, path) -> None:
    """Optional dump: one row per pair (bs_id, bs_x, bs_y, user_x, user_y, D)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bs_id", "bs_x", "bs_y", "user_x", "user_y", "D"])
        for i in range(net.n_pairs):
            w.writerow([i,
                        f"{net.bs_points[i, 0]:.9g}", f"{net.bs_points[i, 1]:.9g}",
                        f"{net.user_points[i, 0]:.9g}", f"{net.user_points[i, 1]:.9g}",
                        f"{net.link_distance[i]:.9g}"])
