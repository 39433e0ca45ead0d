import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathlim.errors import NoPathError, PreconditionError, RangeError
from pathlim.graph import parse_digraph, path_weight, z_table
from pathlim.limits import boltzmann_cylinder, limit_kernel, uniform_cylinder
from pathlim.oracle import enumerate_paths
from pathlim.residual import growth_eval
from pathlim.sampling import (
    BoltzmannSampler,
    LimitWalkSampler,
    SamplerConfig,
    SplitMix64,
    UniformSampler,
    dump_paths,
    empirical_cylinder,
    sample_boltzmann,
    sample_limit_walk,
    sample_uniform,
    splitmix64_reference,
)


def within(freq, p, n, sigmas=4.0):
    return abs(freq - p) <= sigmas * np.sqrt(p * (1 - p) / n) + 1e-12


class TestSplitMix64:
    def test_seed_zero(self):
        assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF

    def test_matches_reference_across_blocks(self):
        rng = SplitMix64(1234567)
        got = [int(z) for z in rng.next_u64_array(5000)] + [rng.next_u64() for _ in range(10)]
        assert got == splitmix64_reference(1234567, 5010)

    def test_large_seed_wraps(self):
        assert SplitMix64(2**64 + 5).next_u64() == SplitMix64(5).next_u64()

    def test_doubles(self):
        rng = SplitMix64(42)
        ref = splitmix64_reference(42, 3)
        assert [rng.random() for _ in range(3)] == [(z >> 11) * 2.0**-53 for z in ref]

    def test_scalar_and_array_share_stream(self):
        a = SplitMix64(9)
        mixed = [a.random()] + a.random_array(5000).tolist() + [a.random()]
        assert mixed == SplitMix64(9).random_array(5002).tolist()

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**64 - 1))
    def test_unit_interval(self, seed):
        u = SplitMix64(seed).random_array(64)
        assert np.all((u >= 0) & (u < 1))


class TestUniform:
    def test_g5_deterministic(self, fixtures):
        assert sample_uniform(fixtures["G5"], "a", 4, SplitMix64(3)) == ("a", "b", "a", "b", "a")

    def test_g1_deterministic(self, fixtures):
        assert sample_uniform(fixtures["G1"], "a", 3, SplitMix64(3)) == ("a",) * 4

    def test_g2_step_probabilities(self, fixtures):
        s = UniformSampler(fixtures["G2"], "a", 6)
        for table in s.cum:
            assert table[0] == pytest.approx([0.5, 1.0])

    def test_no_path(self):
        with pytest.raises(NoPathError):
            UniformSampler(parse_digraph("a b 1"), "a", 2)

    def test_negative_k(self, fixtures):
        with pytest.raises(PreconditionError):
            UniformSampler(fixtures["G2"], "a", -1)

    def test_length_zero(self, fixtures):
        assert UniformSampler(fixtures["G2"], "a", 0).sample_many(SplitMix64(1), 3) == [("a",)] * 3

    @pytest.mark.parametrize("name", ["G2", "G3", "G4"])
    def test_path_frequencies(self, fixtures, name):
        g, k, n = fixtures[name], 4, 50_000
        samples = UniformSampler(g, "a", k).sample_many(SplitMix64(11), n)
        total = z_table(g, k).z("a", k)
        for path, w in enumerate_paths(g, "a", k):
            freq = sum(1 for p in samples if p == path) / n
            assert within(freq, w / total, n), path

    def test_g2_cylinder_band(self, fixtures):
        n = 100_000
        samples = UniformSampler(fixtures["G2"], "a", 12).sample_many(SplitMix64(2024), n)
        assert abs(empirical_cylinder(samples, ("a", "a")) - 0.5) <= 3 * np.sqrt(0.25 / n)

    def test_weighted_edges(self):
        g = parse_digraph("a b 3\na c 1\nb b 1\nc c 1")
        n = 40_000
        samples = UniformSampler(g, "a", 2).sample_many(SplitMix64(5), n)
        assert within(empirical_cylinder(samples, ("a", "b")), 0.75, n)

    def test_paths_are_valid(self, fixtures):
        g = fixtures["G4"]
        for p in UniformSampler(g, "a", 7).sample_many(SplitMix64(8), 200):
            assert len(p) == 8
            assert path_weight(g, p) > 0


class TestBoltzmann:
    def test_g1_geometric(self, fixtures):
        s = BoltzmannSampler(fixtures["G1"], "a", 0.25)
        assert s.cum[0] == pytest.approx([0.5, 1.0])
        n = 20_000
        lengths = np.array([len(p) - 1 for p in s.sample_many(SplitMix64(1), n)])
        # Geometric(1/2) on {0, 1, ...}: mean 1, variance 2
        assert abs(lengths.mean() - 1.0) <= 4 * np.sqrt(2 / n)

    def test_g2_step_probabilities(self, fixtures):
        # G_a(1/4) = 2, G_b(1/4) = 2: halt 1/2, stay 1/4, move 1/4
        s = BoltzmannSampler(fixtures["G2"], "a", 0.25)
        assert np.diff(s.cum[0], prepend=0.0) == pytest.approx([0.5, 0.25, 0.25])

    def test_g2_step_probabilities_exhaustive(self, fixtures):
        g, s = fixtures["G2"], 0.25
        G = sum(w * s**k for k in range(80) for _, w in enumerate_paths(g, "a", k))
        stay = sum(w * s**k for k in range(1, 80) for p, w in enumerate_paths(g, "a", k) if p[1] == "a")
        assert stay / G == pytest.approx(0.25, rel=1e-9)

    def test_small_s_halts(self, fixtures):
        assert sample_boltzmann(fixtures["G4"], "a", 0.0, SplitMix64(1)) == ("a",)
        samples = BoltzmannSampler(fixtures["G4"], "a", 1e-9).sample_many(SplitMix64(1), 100)
        assert all(p == ("a",) for p in samples)

    def test_out_of_range(self, fixtures):
        with pytest.raises(RangeError):
            BoltzmannSampler(fixtures["G2"], "a", 0.6)

    @pytest.mark.parametrize("name,s", [("G2", 0.4), ("G4", 0.6), ("G5", 0.8)])
    def test_mean_length(self, fixtures, name, s):
        g, n, h = fixtures[name], 20_000, 1e-6
        G = lambda t: growth_eval(g, t).G("a")
        expected = s * (G(s + h) - G(s - h)) / (2 * h) / G(s)
        lengths = np.array([len(p) - 1 for p in BoltzmannSampler(g, "a", s).sample_many(SplitMix64(77), n)])
        assert abs(lengths.mean() - expected) <= 4 * lengths.std() / np.sqrt(n)

    def test_prefix_frequencies(self, fixtures):
        g, s, n = fixtures["G4"], 0.6, 20_000
        samples = BoltzmannSampler(g, "a", s).sample_many(SplitMix64(3), n)
        for u in [("a", "b"), ("a", "c"), ("a", "b", "c"), ("a", "c", "b", "c")]:
            assert within(empirical_cylinder(samples, u), boltzmann_cylinder(g, "a", s, u), n), u

    def test_ignores_unreachable_part(self):
        # d has radius 10 but is not reachable from a
        g = parse_digraph("a a 1\nd d 10\nd a 1")
        assert len(sample_boltzmann(g, "a", 0.5, SplitMix64(1))) >= 1


class TestLimitWalk:
    def test_g2(self, fixtures):
        s = LimitWalkSampler(limit_kernel(fixtures["G2"], "a"), "a", 1)
        n = 40_000
        samples = s.sample_many(SplitMix64(4), n)
        assert within(empirical_cylinder(samples, ("a", "a")), 0.5, n)
        assert {p[1] for p in samples} == {"a", "b"}

    def test_g5_deterministic(self, fixtures):
        g = fixtures["G5"]
        assert sample_limit_walk(g, limit_kernel(g, "a"), "a", 3, SplitMix64(0)) == ("a", "b", "a", "b")

    def test_g3_support(self, fixtures):
        g = fixtures["G3"]
        assert sample_limit_walk(g, limit_kernel(g, "a"), "a", 5, SplitMix64(0)) == ("a",) * 6

    def test_outside_support(self, fixtures):
        g = fixtures["G3"]
        with pytest.raises(PreconditionError):
            sample_limit_walk(g, limit_kernel(g, "a"), "b", 2, SplitMix64(0))

    def test_g4_prefix_frequencies(self, fixtures):
        g, n = fixtures["G4"], 50_000
        kernel = limit_kernel(g, "a")
        samples = LimitWalkSampler(kernel, "a", 3).sample_many(SplitMix64(6), n)
        for u in [("a", "b"), ("a", "c"), ("a", "b", "c", "b")]:
            assert within(empirical_cylinder(samples, u), kernel.prefix_probability(u), n), u


class TestDeterminism:
    @pytest.mark.parametrize("mode", ["uniform:6", "boltzmann:0.45", "walk:6"])
    def test_same_seed_same_dump(self, fixtures, mode):
        cfg = SamplerConfig.parse(mode, seed=99, count=50)
        assert dump_paths(cfg.run(fixtures["G2"], "a")) == dump_paths(cfg.run(fixtures["G2"], "a"))

    def test_different_seeds_differ(self, fixtures):
        a = SamplerConfig.parse("uniform:10", 1, 20).run(fixtures["G2"], "a")
        b = SamplerConfig.parse("uniform:10", 2, 20).run(fixtures["G2"], "a")
        assert a != b

    def test_batch_equals_sequential(self, fixtures):
        s = UniformSampler(fixtures["G4"], "a", 5)
        rng = SplitMix64(13)
        sequential = [s.sample(rng) for _ in range(30)]
        assert s.sample_many(SplitMix64(13), 30) == sequential


class TestConfigAndDump:
    def test_parse(self):
        cfg = SamplerConfig.parse("boltzmann:0.3", 5, 10)
        assert (cfg.mode, cfg.param, cfg.seed, cfg.count) == ("boltzmann", 0.3, 5, 10)
        assert SamplerConfig.parse("uniform:8", 0, 1).param == 8

    @pytest.mark.parametrize("mode", ["uniform", "gibbs:3", "uniform:x", "walk:1.5", ""])
    def test_parse_errors(self, mode):
        with pytest.raises(ValueError):
            SamplerConfig.parse(mode, 0, 1)

    def test_negative_count(self):
        with pytest.raises(ValueError):
            SamplerConfig.parse("uniform:2", 0, -1)

    def test_dump_format(self):
        assert dump_paths([("a", "b"), ("a",)]) == "a b\na\n"
        assert dump_paths([]) == ""

    def test_dump_shape(self, fixtures):
        lines = dump_paths(SamplerConfig.parse("uniform:8", 7, 10).run(fixtures["G2"], "a")).splitlines()
        assert len(lines) == 10
        assert all(len(line.split()) == 9 for line in lines)


class TestEmpiricalCylinder:
    def test_all_match(self):
        assert empirical_cylinder([("a", "b")] * 5, ("a",)) == 1

    def test_none_match(self):
        assert empirical_cylinder([("a", "b")] * 5, ("b",)) == 0

    def test_empty(self):
        assert empirical_cylinder([], ("a",)) == 0

    def test_extension_semantics(self):
        samples = [("a",), ("a", "b"), ("a", "b", "c"), ("a", "c")]
        assert empirical_cylinder(samples, ("a", "b")) == 0.5

    def test_matches_exact_g4(self, fixtures):
        g, n = fixtures["G4"], 50_000
        samples = UniformSampler(g, "a", 6).sample_many(SplitMix64(21), n)
        assert within(empirical_cylinder(samples, ("a", "b")), uniform_cylinder(g, "a", 6, ("a", "b")), n)
