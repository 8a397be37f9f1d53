import numpy as np
import pytest

from jurylab.measure import (
    MeasureSpec,
    affine,
    atom_mass,
    bias,
    cdf,
    dirac,
    from_json,
    interval_mass,
    lebesgue,
    moment,
    quantile,
    reflect,
    sample,
    to_json,
)
from jurylab.streams import generator

from conftest import random_measure

COIN = MeasureSpec(atoms=((0.0, 0.5), (1.0, 0.5)), label="coin")


class TestConstruction:
    def test_mass_must_be_one(self):
        with pytest.raises(ValueError, match="total mass"):
            MeasureSpec(pieces=((0.0, 0.5, 1.0, 0.0),))

    def test_negative_density_rejected(self):
        with pytest.raises(ValueError, match="negative"):
            MeasureSpec(pieces=((0.0, 1.0, -0.5, 3.0),))

    def test_overlapping_pieces_rejected(self):
        with pytest.raises(ValueError, match="overlap"):
            MeasureSpec(pieces=((0.0, 0.6, 1.0, 0.0), (0.5, 1.0, 0.8, 0.0)))

    def test_duplicate_atoms_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            MeasureSpec(atoms=((0.5, 0.5), (0.5, 0.5)))

    def test_atom_outside_interval_rejected(self):
        with pytest.raises(ValueError):
            MeasureSpec(atoms=((1.5, 1.0),))

    def test_affine_family_range(self):
        with pytest.raises(ValueError):
            affine(2.5)
        with pytest.raises(ValueError):
            affine(-2.01)
        affine(2.0)
        affine(-2.0)


class TestMoments:
    def test_lebesgue_first_moment(self):
        assert moment(lebesgue(), 1) == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("i", range(1, 9))
    def test_lebesgue_monomials(self, i):
        assert moment(lebesgue(), i) == pytest.approx(1.0 / (i + 1), abs=1e-14)

    def test_tilted_dense_at_one(self):
        spec = affine(2.0)  # density 2x
        assert moment(spec, 1) == pytest.approx(2.0 / 3.0, abs=1e-14)
        assert bias(spec) == pytest.approx(2.0 / 12.0, abs=1e-14)

    @pytest.mark.parametrize("i", [1, 2, 5, 9])
    def test_coin_moments_all_half(self, i):
        assert moment(COIN, i) == pytest.approx(0.5, abs=1e-15)

    def test_moments_non_increasing_random(self, rng):
        for _ in range(200):
            spec = random_measure(rng)
            moms = [moment(spec, i) for i in range(1, 13)]
            assert all(a >= b - 1e-14 for a, b in zip(moms, moms[1:]))

    def test_holder_chain_random(self, rng):
        for _ in range(200):
            spec = random_measure(rng)
            for k in range(1, 11):
                lhs = moment(spec, k + 1) ** (1.0 / (k + 1))
                rhs = moment(spec, k) ** (1.0 / k)
                assert lhs >= rhs - 1e-12


class TestIntervalMass:
    def test_lebesgue_length(self):
        assert interval_mass(lebesgue(), 0.9, 1.0) == pytest.approx(0.1, abs=1e-14)

    def test_atom_readout(self):
        assert interval_mass(COIN, 1.0, 1.0) == pytest.approx(0.5, abs=1e-15)
        assert atom_mass(COIN, 0.0) == pytest.approx(0.5, abs=1e-15)
        assert atom_mass(lebesgue(), 1.0) == 0.0

    def test_tilted_upper_half(self):
        assert interval_mass(affine(2.0), 0.5, 1.0) == pytest.approx(0.75, abs=1e-14)

    def test_reversed_bounds_rejected(self):
        with pytest.raises(ValueError, match="out of order"):
            interval_mass(lebesgue(), 0.7, 0.3)


class TestSampling:
    def test_dirac_constant(self):
        draws = sample(dirac(0.5), generator(0), 100)
        assert np.all(draws == 0.5)

    def test_lebesgue_mean(self):
        draws = sample(lebesgue(), generator(42), 100_000)
        assert abs(draws.mean() - 0.5) < 0.01  # ~3 sigma would be 0.003

    def test_tilted_mean(self):
        draws = sample(affine(2.0), generator(43), 100_000)
        assert abs(draws.mean() - 2.0 / 3.0) < 0.01

    @pytest.mark.parametrize("spec", [lebesgue(), affine(2.0), affine(-1.0)])
    def test_empirical_cdf_ks(self, spec):
        n = 100_000
        x = np.sort(sample(spec, generator(7), n))
        f = cdf(spec, x)
        i = np.arange(1, n + 1)
        ks = max(np.max(np.abs(i / n - f)), np.max(np.abs((i - 1) / n - f)))
        assert ks <= 0.01

    def test_quantile_inverts_cdf(self, rng):
        u = np.linspace(1e-4, 1 - 1e-4, 777)
        for _ in range(20):
            spec = random_measure(rng, allow_atoms=False)
            x = quantile(spec, u)
            assert np.max(np.abs(cdf(spec, x) - u)) < 1e-9

    def test_atom_frequency(self):
        mix = MeasureSpec(
            pieces=((0.0, 0.4, 0.25, 0.0), (0.6, 1.0, 0.5, 1.25)),
            atoms=((0.5, 0.3),),
        )
        draws = sample(mix, generator(9), 200_000)
        assert abs(np.mean(draws == 0.5) - 0.3) < 0.01

    def test_deterministic_given_seed(self):
        a = sample(lebesgue(), generator(5), 100)
        b = sample(lebesgue(), generator(5), 100)
        assert np.array_equal(a, b)


class TestReflect:
    def test_reflect_moments(self):
        spec = affine(1.0)
        assert moment(reflect(spec), 1) == pytest.approx(1.0 - moment(spec, 1), abs=1e-14)

    def test_reflect_atoms(self):
        assert atom_mass(reflect(dirac(0.0)), 1.0) == 1.0


class TestSerialization:
    @pytest.mark.parametrize(
        "spec",
        [
            lebesgue(),
            affine(-1.25),
            COIN,
            MeasureSpec(
                pieces=((0.0, 0.4, 0.25, 0.0), (0.6, 1.0, 0.5, 1.25)),
                atoms=((0.5, 0.3),),
                label="mix",
            ),
        ],
    )
    def test_round_trip_bit_exact(self, spec):
        back = from_json(to_json(spec))
        assert back == spec  # tuple equality on float64 fields is bitwise

    def test_decimal_inputs_round_trip(self):
        spec = MeasureSpec(pieces=((0.0, 1.0, 0.999999999999, 0.000000000002),))
        assert from_json(to_json(spec)) == spec
