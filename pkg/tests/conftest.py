import numpy as np
import pytest

from jurylab.measure import MeasureSpec, affine


def random_measure(rng: np.random.Generator, allow_atoms: bool = True) -> MeasureSpec:
    """A random valid measure: 1-2 affine pieces, optional atom, exact mass 1."""
    kind = rng.integers(0, 3)
    if kind == 0:
        return affine(float(rng.uniform(-2.0, 2.0)))
    pts = np.sort(rng.uniform(0.0, 1.0, 4))
    while np.min(np.diff(pts)) < 0.05:
        pts = np.sort(rng.uniform(0.0, 1.0, 4))
    (lo1, hi1, lo2, hi2) = (float(v) for v in pts)
    pieces = []
    raw_mass = 0.0
    for lo, hi in ((lo1, hi1), (lo2, hi2)):
        c0 = float(rng.uniform(0.1, 2.0))
        c1 = float(rng.uniform(-c0 / max(hi, 1e-9), 1.0))
        pieces.append((lo, hi, c0, c1))
        raw_mass += c0 * (hi - lo) + 0.5 * c1 * (hi * hi - lo * lo)
    atom_mass = float(rng.uniform(0.05, 0.4)) if (allow_atoms and kind == 2) else 0.0
    scale = (1.0 - atom_mass) / raw_mass
    pieces = tuple((lo, hi, c0 * scale, c1 * scale) for lo, hi, c0, c1 in pieces)
    atoms = ((float(rng.uniform(0.0, 1.0)), atom_mass),) if atom_mass else ()
    return MeasureSpec(pieces=pieces, atoms=atoms)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
