"""Per-view visibility bookkeeping and artificial missingness.

A view with hidden objects is handled through the visible-first permutation:
reorder rows/columns so visible objects come first, read the four blocks, and
invert the permutation to write imputed blocks back. Masks are generated with
a seeded PCG64 generator so they are bit-reproducible.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .linalg import symmetrize


class Fill(str, enum.Enum):
    """Baseline fill for masked entries."""

    ZERO = "zero"
    MEAN = "mean"


def _validate_hidden(ell: int, hidden) -> tuple[int, ...]:
    idx = tuple(int(i) for i in hidden)
    if any(i < 0 or i >= ell for i in idx):
        raise DimensionError(f"hidden index out of range [0, {ell})")
    if len(set(idx)) != len(idx):
        raise DimensionError("hidden index set contains duplicates")
    if len(idx) >= ell:
        raise DimensionError("at least one object must stay visible")
    return tuple(sorted(idx))


@dataclass(frozen=True)
class VisibilityPattern:
    """Which objects are hidden in each of the K views."""

    ell: int
    hidden: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.ell < 1:
            raise DimensionError("ell must be >= 1")
        clean = tuple(_validate_hidden(self.ell, h) for h in self.hidden)
        object.__setattr__(self, "hidden", clean)

    @property
    def n_views(self) -> int:
        return len(self.hidden)

    @property
    def n_visible(self) -> tuple[int, ...]:
        return tuple(self.ell - len(h) for h in self.hidden)

    @property
    def total_hidden(self) -> int:
        return sum(len(h) for h in self.hidden)

    def to_json_dict(self) -> dict:
        return {
            "ell": self.ell,
            "views": [{"hidden": list(h)} for h in self.hidden],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "VisibilityPattern":
        return cls(
            ell=int(obj["ell"]),
            hidden=tuple(tuple(v["hidden"]) for v in obj["views"]),
        )


@dataclass(frozen=True)
class PartitionedView:
    """Blocks of a symmetric matrix under the visible-first permutation.

    ``perm`` lists original indices in (visible..., hidden...) order, so
    ``full[np.ix_(perm, perm)]`` is the partitioned layout.
    """

    q_vv: np.ndarray
    q_vh: np.ndarray
    q_hh: np.ndarray
    perm: np.ndarray = field(repr=False)

    @property
    def ell(self) -> int:
        return len(self.perm)

    @property
    def n_visible(self) -> int:
        return self.q_vv.shape[0]


def visible_indices(ell: int, hidden) -> np.ndarray:
    hidden_set = set(hidden)
    return np.array([i for i in range(ell) if i not in hidden_set], dtype=int)


def partition(full: np.ndarray, hidden) -> PartitionedView:
    """Extract the visible/hidden blocks of ``full`` for one view."""
    ell = full.shape[0]
    if full.shape != (ell, ell):
        raise DimensionError(f"expected square matrix, got {full.shape}")
    hid = np.array(_validate_hidden(ell, hidden), dtype=int)
    vis = visible_indices(ell, hid)
    perm = np.concatenate([vis, hid])
    return PartitionedView(
        q_vv=full[np.ix_(vis, vis)],
        q_vh=full[np.ix_(vis, hid)],
        q_hh=full[np.ix_(hid, hid)],
        perm=perm,
    )


def unpartition(view: PartitionedView) -> np.ndarray:
    """Reassemble the full matrix in original index order. Exact: no arithmetic."""
    n_v = view.q_vv.shape[0]
    n_h = view.q_hh.shape[0] if view.q_hh.size else view.q_vh.shape[1]
    if view.q_vh.shape != (n_v, n_h):
        raise DimensionError(
            f"inconsistent blocks: q_vv {view.q_vv.shape}, q_vh {view.q_vh.shape}, "
            f"q_hh {view.q_hh.shape}"
        )
    ell = n_v + n_h
    if len(view.perm) != ell:
        raise DimensionError("permutation length does not match block dims")
    stacked = np.block([[view.q_vv, view.q_vh], [view.q_vh.T, view.q_hh]])
    out = np.empty((ell, ell))
    out[np.ix_(view.perm, view.perm)] = stacked
    return out


def random_mask(
    ell: int,
    n_views: int,
    fraction: float,
    seed: int,
    correlated: bool = False,
) -> VisibilityPattern:
    """Draw hidden index sets for each view without replacement.

    Uses numpy's PCG64 generator seeded with ``seed``; the same arguments
    always produce the same pattern. With ``correlated=True`` all views share
    a single draw instead of independent ones.
    """
    if not 0.0 <= fraction < 1.0:
        raise ValueError("fraction must be in [0, 1)")
    if fraction * ell > ell - 1:
        raise ValueError(
            f"fraction {fraction} would leave no visible object (ell={ell})"
        )
    n_hidden = math.floor(fraction * ell)
    rng = np.random.Generator(np.random.PCG64(seed))
    if correlated:
        shared = np.sort(rng.choice(ell, size=n_hidden, replace=False))
        hidden = tuple(tuple(int(i) for i in shared) for _ in range(n_views))
    else:
        hidden = tuple(
            tuple(int(i) for i in np.sort(rng.choice(ell, size=n_hidden, replace=False)))
            for _ in range(n_views)
        )
    return VisibilityPattern(ell=ell, hidden=hidden)


def apply_mask(full: np.ndarray, hidden, fill: Fill = Fill.ZERO) -> np.ndarray:
    """Overwrite every entry with a hidden row or column.

    ZERO writes zeros; MEAN writes the scalar mean of the visible block.
    Entries with both indices visible are never touched. Note the MEAN
    result need not be positive definite; it exists only as a baseline.
    """
    full = symmetrize(full)
    ell = full.shape[0]
    hid = np.array(_validate_hidden(ell, hidden), dtype=int)
    out = full.copy()
    if hid.size == 0:
        return out
    if Fill(fill) is Fill.ZERO:
        value = 0.0
    else:
        vis = visible_indices(ell, hid)
        value = float(np.mean(full[np.ix_(vis, vis)]))
    out[hid, :] = value
    out[:, hid] = value
    return out
