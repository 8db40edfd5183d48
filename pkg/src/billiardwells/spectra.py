"""Splitting statistics: pairing, Weyl counts, spread index, correlations.

The tunneling rate of a pair is reported as the splitting dE itself
(no conversion to a time).  The spread of rates at fixed energy is
quantified by the windowed max/min ratio of dE over confident pairs,
which is what collapses as the well shape turns chaotic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import spearmanr


class SpectraError(RuntimeError):
    """Inconsistent sector data (usually a missed eigenvalue window)."""


@dataclass
class SplittingRecord:
    """One symmetric/antisymmetric pair."""
    ordinal: int
    e_even: float
    e_odd: float
    confidence: float = 1.0
    n_x: int | None = None
    n_y: int | None = None

    @property
    def e_mean(self):
        return 0.5 * (self.e_even + self.e_odd)

    @property
    def delta_e(self):
        return abs(self.e_odd - self.e_even)

    @property
    def confident(self):
        return self.confidence >= 1.0


@dataclass(frozen=True)
class SpreadPoint:
    center: float
    halfwidth: float
    ratio: float       # max dE / min dE over confident pairs in the window
    count: int


def _energy(obj):
    return obj.energy if hasattr(obj, "energy") else float(obj)


def pair_states(evens, odds):
    """Pair the k-th even state with the k-th odd state.

    Confidence degrades when a splitting exceeds half the local mean pair
    spacing (estimated over +-5 neighboring pairs), which marks likely
    mispairings.  A sector length mismatch above 2 aborts: it means an
    eigenvalue window was missed upstream.
    """
    e_ev = [_energy(s) for s in evens]
    e_od = [_energy(s) for s in odds]
    if any(b < a for a, b in zip(e_ev, e_ev[1:])) or any(b < a for a, b in zip(e_od, e_od[1:])):
        raise ValueError("sector energies must be sorted ascending")
    if abs(len(e_ev) - len(e_od)) > 2:
        raise SpectraError(
            f"sector size mismatch: {len(e_ev)} even vs {len(e_od)} odd states")
    n = min(len(e_ev), len(e_od))
    means = [(e_ev[k] + e_od[k]) / 2.0 for k in range(n)]
    records = []
    for k in range(n):
        delta = abs(e_od[k] - e_ev[k])
        if n >= 2:
            lo, hi = max(0, k - 5), min(n - 1, k + 5)
            spacing = (means[hi] - means[lo]) / (hi - lo)
        else:
            spacing = means[k]  # single pair: fall back to its own energy scale
        conf = 1.0 if delta <= 0.5 * spacing else min(1.0, 0.5 * spacing / delta) if delta > 0 else 1.0
        records.append(SplittingRecord(ordinal=k, e_even=e_ev[k], e_odd=e_od[k],
                                       confidence=conf))
    return records


def weyl_count(area, perimeter, energy):
    """Asymptotic Dirichlet state count N(E) = (A/4pi) E - (P/4pi) sqrt(E)."""
    if energy <= 0:
        return 0.0
    return (area / (4.0 * math.pi)) * energy \
        - (perimeter / (4.0 * math.pi)) * math.sqrt(energy)


def weyl_estimate(g, energy, single_well=False):
    """Expected state count for a geometry; a guide, not an exact count.

    The barrier faces count as walls in the perimeter term, valid well
    below the barrier height.  With single_well=True the estimate covers
    one well only (half the doubled-domain count, up to boundary terms).
    """
    if single_well:
        return weyl_count(g.spec.well_area, g.perimeter("left"), energy)
    return weyl_count(g.area_total, g.perimeter_total, energy)


def regularization_index(records, window_width=50.0, stride=25.0):
    """Sliding-window max/min splitting ratios over confident pairs.

    Windows with fewer than 3 confident pairs are omitted rather than
    reported; requires at least 10 confident records overall.
    """
    confident = [r for r in records if r.confident and r.delta_e > 0]
    if len(confident) < 10:
        raise ValueError(f"need >= 10 confident records, got {len(confident)}")
    e = np.array([r.e_mean for r in confident])
    d = np.array([r.delta_e for r in confident])
    points = []
    lo = float(e.min())
    while lo < e.max():
        m = (e >= lo) & (e < lo + window_width)
        if np.count_nonzero(m) >= 3:
            points.append(SpreadPoint(center=lo + window_width / 2.0,
                                      halfwidth=window_width / 2.0,
                                      ratio=float(d[m].max() / d[m].min()),
                                      count=int(np.count_nonzero(m))))
        lo += stride
    return points


def rank_correlation(records, summaries):
    """Spearman rank correlation of log dE against <psi><p_x>.

    Joins records and Husimi summaries by pair ordinal; flagged summaries
    (zero barrier amplitude) are excluded.
    """
    by_ordinal = {s.ordinal: s for s in summaries if not getattr(s, "flagged", False)}
    pairs = [(r.delta_e, by_ordinal[r.ordinal].weighted)
             for r in records if r.ordinal in by_ordinal and r.delta_e > 0]
    if len(pairs) < 10:
        raise ValueError(f"need >= 10 joined pairs, got {len(pairs)}")
    log_d = np.log([p[0] for p in pairs])
    weighted = np.array([p[1] for p in pairs])
    rho = spearmanr(log_d, weighted).statistic
    return float(rho)


def attach_rectangle_labels(records, oracle_modes):
    """Copy (n_x, n_y) labels from the separable oracle onto records, by rank.

    Both sequences are sorted by mean energy; the k-th record takes the
    k-th oracle label.  Only meaningful for the rectangular shape.
    """
    modes = sorted(oracle_modes, key=lambda m: m.e_mean)
    for rec, mode in zip(sorted(records, key=lambda r: r.e_mean), modes):
        rec.n_x, rec.n_y = mode.n_x, mode.n_y
    return records
