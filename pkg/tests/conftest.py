import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from billiardwells import geometry, qsolver, spectra

DESK_H = 0.02
DESK_E_MAX = 300.0


@pytest.fixture(scope="session")
def shapes():
    """All six geometries, built once."""
    return {kind: geometry.build_double_well(kind) for kind in geometry.SHAPE_KINDS}


@pytest.fixture(scope="session")
def desk_runs(shapes):
    """Desk-scale sector solves + pairings for the shapes the suite reuses."""
    out = {}
    for kind in ("rectangle", "concave", "butterfly"):
        evens, odds = qsolver.solve_double_well(shapes[kind], DESK_H, DESK_E_MAX)
        records = spectra.pair_states(evens, odds)
        out[kind] = (evens, odds, records)
    return out
