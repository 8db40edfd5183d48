"""Coherent-state projection of eigenstates along the barrier.

The wave function on a vertical sampling line one grid cell inside the
left well is projected onto Gaussian coherent states, giving a positive
phase-space density H(y0, p_y) over position along the barrier and the
momentum parallel to it.  From H follow the barrier amplitude
<psi> = integral of H, the mean normal momentum
<p_x> = integral of sqrt(E - p_y^2) H / <psi>, and their product, the
weighted normal momentum that orders tunneling rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Region


class HusimiError(ValueError):
    """Projection request inconsistent with the state or the line."""


@dataclass(frozen=True)
class BarrierLine:
    """Vertical sampling line just inside the left well."""
    x_line: float
    col: int               # column index in the half-domain grid
    y: np.ndarray          # ordinates of the sampled rows (all LeftWell)
    rows: np.ndarray       # row indices matching y

    @property
    def extent(self):
        return float(self.y[-1] - self.y[0])


def build_barrier_line(g, grid):
    """Place the sampling line one grid cell inside the well/barrier interface.

    The line sits on the first grid column at least h inside the leftmost
    point of the barrier-facing interface and is nudged further in until
    every sampled row classifies as LeftWell.
    """
    h = grid.h
    depth = -g.left_interface_x_min  # > 0
    span = g.barrier_y_halfspan
    j_from_axis = int(math.ceil(depth / h + 1.0 - 1e-9))
    for _ in range(4):
        col = grid.axis_col - j_from_axis
        if col < 0:
            raise HusimiError("barrier line does not fit inside the well")
        x_line = grid.x[col]
        inside = np.flatnonzero(np.abs(grid.y) <= span + 1e-12)
        region = np.asarray(g.classify(np.full(inside.size, x_line), grid.y[inside]))
        good = np.flatnonzero(region == Region.LEFT_WELL)
        # wall rows may trim the ends of the interval, but a hole in the
        # middle means the line is badly placed: move one cell further in
        if good.size >= 8 and np.all(np.diff(good) == 1):
            rows = inside[good]
            return BarrierLine(x_line=float(x_line), col=int(col),
                               y=grid.y[rows].copy(), rows=rows)
        j_from_axis += 1
    raise HusimiError("could not place a barrier line inside the left well")


@dataclass(frozen=True)
class HusimiGrid:
    """H(y0, p_y) >= 0 on its quadrature grids."""
    h: np.ndarray          # (n_y0, n_py)
    y0: np.ndarray
    py: np.ndarray


def coherent_projection(psi_line, y, sigma, y0_grid, py_grid):
    """|<coherent state | psi>|^2 on the (y0, p_y) grid.

    H(y0,py) = | int psi(y) (pi sigma^2)^(-1/4)
                 exp(-(y-y0)^2/(2 sigma^2) - i py y) dy |^2
    by trapezoid quadrature over the sampled line.
    """
    psi_line = np.asarray(psi_line)
    y = np.asarray(y, dtype=float)
    if sigma <= 0:
        raise HusimiError("sigma must be > 0")
    if y[-1] - y[0] < 4.0 * sigma:
        raise HusimiError(
            f"line extent {y[-1] - y[0]:.3f} shorter than 4 sigma = {4 * sigma:.3f}: "
            "coherent state does not fit")
    w = np.empty_like(y)  # trapezoid weights
    w[1:-1] = 0.5 * (y[2:] - y[:-2])
    w[0] = 0.5 * (y[1] - y[0])
    w[-1] = 0.5 * (y[-1] - y[-2])
    amp = (math.pi * sigma * sigma) ** -0.25
    gauss = amp * np.exp(-((y0_grid[:, None] - y[None, :]) ** 2) / (2 * sigma * sigma))
    plane = np.exp(-1j * py_grid[:, None] * y[None, :])
    overlap = (gauss * (psi_line * w)[None, :]) @ plane.T
    return np.abs(overlap) ** 2


def husimi_grid(state, line, sigma, n_y0=64, n_py=64, energy=None):
    """Barrier Husimi distribution of one eigenstate."""
    e = state.energy if energy is None else energy
    if e <= 0:
        raise HusimiError("state energy must be > 0")
    p_max = math.sqrt(e)
    y0 = np.linspace(line.y[0], line.y[-1], n_y0)
    py = np.linspace(-p_max, p_max, n_py)
    psi_line = state.psi[line.rows, line.col]
    h = coherent_projection(psi_line, line.y, sigma, y0, py)
    return HusimiGrid(h=h, y0=y0, py=py)


def barrier_amplitude(hg):
    """<psi>: double trapezoid integral of H."""
    return float(np.trapz(np.trapz(hg.h, hg.py, axis=1), hg.y0))


def mean_normal_momentum(hg, energy):
    """<p_x> in [0, sqrt(E)]; raises if the barrier amplitude vanishes."""
    amp = barrier_amplitude(hg)
    if amp <= 0.0:
        raise HusimiError("zero barrier amplitude: <p_x> undefined")
    px = np.sqrt(np.maximum(energy - hg.py ** 2, 0.0))
    val = np.trapz(np.trapz(hg.h * px[None, :], hg.py, axis=1), hg.y0) / amp
    return float(min(val, math.sqrt(energy)))


def default_sigma(energy):
    """Coherent-state width 1/sqrt(kbar) balancing y and p_y resolution."""
    return energy ** -0.25


@dataclass
class HusimiSummary:
    """Per-pair barrier statistics; the even member represents the pair."""
    ordinal: int
    e_mean: float
    grid: HusimiGrid | None
    amp: float
    p_norm: float
    flagged: bool = False

    @property
    def weighted(self):
        return self.amp * self.p_norm


def summarize_pair(state_even, line, ordinal, e_mean=None, sigma=None,
                   n_y0=64, n_py=64):
    """Husimi summary of one splitting pair from its symmetric member."""
    if state_even.parity != "even":
        raise HusimiError("the symmetric (even) member represents the pair")
    e = state_even.energy if e_mean is None else e_mean
    s = default_sigma(e) if sigma is None else sigma
    hg = husimi_grid(state_even, line, s, n_y0=n_y0, n_py=n_py, energy=e)
    amp = barrier_amplitude(hg)
    if amp <= 0.0:
        return HusimiSummary(ordinal=ordinal, e_mean=e, grid=hg,
                             amp=0.0, p_norm=0.0, flagged=True)
    return HusimiSummary(ordinal=ordinal, e_mean=e, grid=hg,
                         amp=amp, p_norm=mean_normal_momentum(hg, e))


def summarize_spectrum(g, evens, records, sigma=None, n_y0=64, n_py=64):
    """Husimi summaries for every record with a usable even member."""
    if not evens:
        return []
    line = build_barrier_line(g, evens[0].grid)
    out = []
    for rec in records:
        if rec.ordinal >= len(evens):
            continue
        try:
            out.append(summarize_pair(evens[rec.ordinal], line, rec.ordinal,
                                      e_mean=rec.e_mean, sigma=sigma,
                                      n_y0=n_y0, n_py=n_py))
        except HusimiError:
            # lowest pairs: the coherent state may not fit the line extent
            out.append(HusimiSummary(ordinal=rec.ordinal, e_mean=rec.e_mean,
                                     grid=None, amp=0.0, p_norm=0.0, flagged=True))
    return out
