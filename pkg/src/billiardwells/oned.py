"""Exact 1D double square well.

Two wells of width L separated by a barrier of width d and height V_b,
hard walls at x = +-(d/2 + L), hbar^2/2m = 1.  Matching continuity of
psi and psi' at the barrier edge gives one transcendental condition per
parity (k = sqrt(E), kappa = sqrt(V_b - E)):

    even:  kappa * tanh(kappa d/2) = -k * cot(k L)
    odd :  kappa * coth(kappa d/2) = -k * cot(k L)

Above the barrier (test modes such as V_b = 0) the conditions continue
analytically with kappa = i q, q = sqrt(E - V_b):

    even:  -q * tan(q d/2) = -k * cot(k L)
    odd :   q * cot(q d/2) = -k * cot(k L)

The module also provides the separable spectrum of the 2D rectangular
double well, used as an independent oracle for the grid solver.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OneDWellSpec:
    well_width: float = 2.0
    barrier_width: float = 0.1
    barrier_height: float = 1000.0

    def __post_init__(self):
        if self.well_width <= 0 or self.barrier_width <= 0:
            raise ValueError("well_width and barrier_width must be > 0")
        if self.barrier_height < 0:
            raise ValueError("barrier_height must be >= 0")


def _matching(spec, parity):
    """F(E) whose roots are the eigenvalues of the given parity sector."""
    L, d, vb = spec.well_width, spec.barrier_width, spec.barrier_height

    def f(e):
        k = math.sqrt(e)
        well = k / math.tan(k * L)
        if e < vb:
            kap = math.sqrt(vb - e)
            barrier = kap * math.tanh(kap * d / 2) if parity == "even" \
                else kap / math.tanh(kap * d / 2)
        else:
            q = math.sqrt(e - vb)
            if parity == "even":
                barrier = -q * math.tan(q * d / 2)
            else:
                barrier = q / math.tan(q * d / 2) if q > 0 else 2.0 / d
        return barrier + well

    return f


def _pole_ks(spec, parity, k_max):
    """k values where the matching function blows up (never roots)."""
    L, d, vb = spec.well_width, spec.barrier_width, spec.barrier_height
    poles = [m * math.pi / L for m in range(1, int(k_max * L / math.pi) + 2)]
    # above-barrier branch: poles of tan(qd/2) (even) or cot(qd/2) (odd)
    if k_max ** 2 > vb:
        q_max = math.sqrt(k_max ** 2 - vb)
        if parity == "even":
            qs = [(m + 0.5) * 2 * math.pi / d for m in range(int(q_max * d / (2 * math.pi)) + 2)]
        else:
            qs = [m * 2 * math.pi / d for m in range(1, int(q_max * d / (2 * math.pi)) + 2)]
        poles += [math.sqrt(q * q + vb) for q in qs if q <= q_max]
    return sorted(p for p in poles if p < k_max)


def levels(spec, parity, e_max):
    """All eigenvalues of one parity sector with E <= e_max, ascending."""
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    if e_max <= 0:
        return []
    L = spec.well_width
    k_max = math.sqrt(e_max)
    f = _matching(spec, parity)
    # scan between consecutive poles so every sign change brackets a root
    edges = [1e-9] + _pole_ks(spec, parity, k_max) + [k_max]
    step = math.pi / (64 * L)
    roots = []
    pad = 1e-10
    for lo, hi in zip(edges[:-1], edges[1:]):
        a, b = lo + pad, hi - pad
        if b <= a:
            continue
        ks = np.linspace(a, b, max(int((b - a) / step) + 2, 2))
        vals = np.array([f(k * k) for k in ks])
        for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
            e = brentq(f, ks[i] ** 2, ks[i + 1] ** 2, rtol=1e-13)
            roots.append(e)
    return sorted(r for r in roots if r <= e_max)


def splitting_1d(spec, e_max):
    """(E_mean, delta_E) for consecutive even/odd pairs below e_max."""
    ev = levels(spec, "even", e_max)
    od = levels(spec, "odd", e_max)
    if len(ev) not in (len(od), len(od) + 1):
        raise RuntimeError(f"sector count mismatch: {len(ev)} even vs {len(od)} odd")
    if len(ev) > len(od):
        log.info("dropping unpaired even root %.6f near E_max", ev[-1])
    pairs = []
    for e, o in zip(ev, od):
        pairs.append(((e + o) / 2.0, o - e))
    return pairs


@dataclass(frozen=True)
class RectangleMode:
    """One symmetric/antisymmetric pair of the separable 2D rectangle."""
    n_x: int
    n_y: int
    e_even: float
    e_odd: float

    @property
    def e_mean(self):
        return (self.e_even + self.e_odd) / 2.0

    @property
    def delta_e(self):
        return self.e_odd - self.e_even


def separable_oracle_2d(l_x, l_y, d, v_b, e_max):
    """Exact spectrum of the rectangular double well, as splitting pairs.

    E(n_x, n_y; +-) = eps_{+-}(n_x) + (n_y pi / l_y)^2 where eps are the 1D
    double-well levels along x; the splitting is independent of n_y.
    Returns RectangleMode entries with e_even <= e_max, sorted by e_mean.
    """
    spec = OneDWellSpec(well_width=l_x, barrier_width=d, barrier_height=v_b)
    ev = levels(spec, "even", e_max)
    od = levels(spec, "odd", e_max)
    modes = []
    for n_x, (e1d_even, e1d_odd) in enumerate(zip(ev, od), start=1):
        n_y = 1
        while True:
            ey = (n_y * math.pi / l_y) ** 2
            if e1d_even + ey > e_max:
                break
            modes.append(RectangleMode(n_x, n_y, e1d_even + ey, e1d_odd + ey))
            n_y += 1
    modes.sort(key=lambda m: m.e_mean)
    return modes
