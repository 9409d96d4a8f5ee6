import math
from fractions import Fraction

import pytest

from gramforge import (
    Alphabet,
    ChainModel,
    KGramDistribution,
    classify_chain,
    convex_combine,
    entropy_rate,
    estimate,
    identity_chain,
    implied_higher_stats,
    l1_distance,
    marginalize,
    simulate,
    standard_solution,
    suffix_systems,
    two_state_family,
    two_state_feasible_interval,
    verify_model,
    vertex_solution,
)
from gramforge.presets import beacon13_distribution
from gramforge.stats import ConsistencyError

from conftest import (
    GOLDEN_ENTROPY,
    GOLDEN_R3_STANDARD,
    GOLDEN_R3_U02,
    GOLDEN_R3_U05,
    GOLDEN_R3_VERTEX,
    GOLDEN_STANDARD,
    GOLDEN_U02,
    GOLDEN_U05,
    GOLDEN_VERTEX_RAW,
    assert_table_close,
    gram,
    random_consistent_input,
    table_of,
)


@pytest.fixture(scope="module")
def golden_models(golden_r2):
    standard = standard_solution(golden_r2)
    vertex_raw = vertex_solution(golden_r2, solver_raw=True)
    return {
        "standard": standard,
        "vertex": vertex_raw,
        "u05": convex_combine(standard, vertex_raw, 0.5),
        "u02": convex_combine(standard, vertex_raw, 0.2),
    }


class TestSuffixSystems:
    def test_golden_systems(self, golden_r2):
        systems = {"".join(s.suffix): s for s in suffix_systems(golden_r2)}
        y0 = systems["0"]
        assert {a: float(w) for a, w in y0.row_weights.items()} == {
            "0": 0.513, "1": 0.244,
        }
        assert {b: float(w) for b, w in y0.col_weights.items()} == {
            "0": 0.513, "1": 0.244,
        }
        assert (y0.pre, y0.post) == (2, 2)
        y1 = systems["1"]
        assert {a: float(w) for a, w in y1.row_weights.items()} == {
            "0": 0.244, "1": 0.0,
        }
        assert {b: float(w) for b, w in y1.col_weights.items()} == {
            "0": 0.244, "1": 0.0,
        }
        assert (y1.pre, y1.post) == (1, 1)

    def test_order_one_single_system(self):
        dist = estimate(list("aababb"), 1)
        (sys,) = suffix_systems(dist)
        assert sys.suffix == ()
        assert sys.row_weights == dict(zip(("a", "b"), (Fraction(1, 2), Fraction(1, 2))))
        assert sys.row_weights == sys.col_weights

    def test_inconsistent_rejected(self, alpha01):
        bad = KGramDistribution(
            alpha01, 2,
            {gram("00"): 0.5, gram("01"): 0.3, gram("10"): 0.1, gram("11"): 0.1},
        )
        with pytest.raises(ConsistencyError):
            suffix_systems(bad)


class TestStandardSolution:
    def test_golden_table(self, golden_models):
        assert_table_close(golden_models["standard"], GOLDEN_STANDARD)

    def test_residuals(self, golden_models):
        res = verify_model(golden_models["standard"])
        assert res["row_residual"] <= 1e-12
        assert res["stationary_residual"] <= 1e-12

    def test_order_one_rows_equal_distribution(self):
        R = beacon13_distribution()
        model = standard_solution(R)
        for s in model.states:
            row = {t[-1]: p for t, p in model.row(s).items()}
            assert row == {
                sym: float(R.prob((sym,)))
                for sym in R.alphabet.symbols
                if R.prob((sym,)) > 0
            }

    def test_uniform_binary(self, alpha01):
        R = KGramDistribution.from_probs(
            alpha01, 1, {("0",): Fraction(1, 2), ("1",): Fraction(1, 2)}
        )
        model = standard_solution(R)
        assert table_of(model) == {
            ("0", "0"): 0.5, ("0", "1"): 0.5, ("1", "0"): 0.5, ("1", "1"): 0.5,
        }

    def test_zero_state_retention(self, golden_r2):
        full = standard_solution(golden_r2)
        assert gram("11") in full.states
        pruned = standard_solution(golden_r2, prune_zero_states=True)
        assert gram("11") not in pruned.states
        assert len(pruned.states) == 3

    def test_irreducible_on_support(self, golden_r2):
        pruned = standard_solution(golden_r2, prune_zero_states=True)
        assert classify_chain(pruned, warn_periodic=False).irreducible


class TestVertexSolution:
    def test_golden_positive_states(self, golden_r2):
        model = vertex_solution(golden_r2)
        got = table_of(model)
        for key, val in GOLDEN_VERTEX_RAW.items():
            if key[0] != "11":
                assert round(got.get(key, 0.0), 3) == val
        # default fills the unconstrained zero state with the standard row
        assert got[("11", "10")] == pytest.approx(1.0)

    def test_solver_raw_full_table(self, golden_models):
        assert_table_close(golden_models["vertex"], GOLDEN_VERTEX_RAW)

    def test_single_point_polytope_matches_standard(self):
        # pre(y) = post(y) = 1 everywhere: both constructions coincide
        seq = list("abab" * 10)
        R = estimate(seq, 2, mode="circular")
        assert table_of(vertex_solution(R)) == table_of(standard_solution(R))

    def test_three_symbol_northwest_sums(self):
        a = Alphabet(("a", "b", "c"))
        R = KGramDistribution.from_probs(
            a, 1,
            {("a",): Fraction(1, 2), ("b",): Fraction(3, 10), ("c",): Fraction(1, 5)},
        )
        model = vertex_solution(R, rule="northwest")
        # recompute the transportation allocation Q(a,b) = R(a) P(a -> b)
        q = {
            (s[0], t[0]): float(R.prob(s)) * p
            for s in model.states
            for t, p in model.row(s).items()
        }
        assert len(q) <= 5  # pre + post - 1
        for sym in a.symbols:
            row_sum = sum(v for (x, _), v in q.items() if x == sym)
            col_sum = sum(v for (_, y), v in q.items() if y == sym)
            assert row_sum == pytest.approx(float(R.prob((sym,))), abs=1e-12)
            assert col_sum == pytest.approx(float(R.prob((sym,))), abs=1e-12)

    @pytest.mark.parametrize("rule", ["northwest", "lexicographic-greedy"])
    def test_rules_give_vertices_on_random_inputs(self, rule):
        for case in range(25):
            R = random_consistent_input(900 + case, sigma=3, k=2)
            model = vertex_solution(R, rule=rule)
            res = verify_model(model)
            assert res["stationary_residual"] <= 1e-9
            for system in suffix_systems(R):
                y = system.suffix
                cells = sum(
                    1
                    for a in R.alphabet.symbols
                    if R.prob((a,) + y) > 0
                    for t, p in model.row((a,) + y).items()
                    if p > 0
                )
                assert cells <= system.pre + system.post - 1

    def test_bad_rule(self, golden_r2):
        with pytest.raises(ValueError):
            vertex_solution(golden_r2, rule="random")
        with pytest.raises(ValueError):
            vertex_solution(golden_r2, rule="lexicographic-greedy", solver_raw=True)


class TestConvexCombine:
    def test_golden_u05(self, golden_models):
        assert_table_close(golden_models["u05"], GOLDEN_U05)

    def test_golden_u02(self, golden_models):
        assert_table_close(golden_models["u02"], GOLDEN_U02)

    def test_endpoints_exact(self, golden_models):
        a, b = golden_models["standard"], golden_models["vertex"]
        assert table_of(convex_combine(a, b, 1)) == table_of(a)
        assert table_of(convex_combine(a, b, 0)) == table_of(b)

    @pytest.mark.parametrize("u", [0.0, 0.2, 0.5, 0.8, 1.0])
    def test_stationarity_preserved(self, golden_models, u):
        mix = convex_combine(golden_models["standard"], golden_models["vertex"], u)
        assert verify_model(mix)["stationary_residual"] <= 1e-9

    def test_irreducible_with_irreducible_component(self, golden_r2):
        a = standard_solution(golden_r2, prune_zero_states=True)
        b = vertex_solution(golden_r2, prune_zero_states=True)
        mix = convex_combine(a, b, 0.5)
        assert classify_chain(mix, warn_periodic=False).irreducible

    def test_mismatch_rejected(self, golden_models, alpha01):
        other = standard_solution(
            KGramDistribution.from_probs(
                alpha01, 1, {("0",): Fraction(1, 2), ("1",): Fraction(1, 2)}
            )
        )
        with pytest.raises(ValueError):
            convex_combine(golden_models["standard"], other, 0.5)
        shifted = KGramDistribution.from_probs(
            alpha01, 2,
            {gram("00"): Fraction("0.52"), gram("01"): Fraction("0.24"),
             gram("10"): Fraction("0.24"), gram("11"): 0},
        )
        with pytest.raises(ValueError, match="stationary"):
            convex_combine(golden_models["standard"], standard_solution(shifted), 0.5)

    def test_u_out_of_range(self, golden_models):
        with pytest.raises(ValueError):
            convex_combine(golden_models["standard"], golden_models["vertex"], 1.5)


class TestTwoStateFamily:
    def test_worked_numbers_exact(self):
        model = two_state_family(0.3, 0.8)
        t = table_of(model)
        assert abs(t[("0", "0")] - 0.8) <= 1e-12
        assert abs(t[("0", "1")] - 0.2) <= 1e-12
        assert abs(t[("1", "1")] - 8 / 15) <= 1e-12  # 0.5333...
        assert abs(t[("1", "0")] - 7 / 15) <= 1e-12  # 0.4666...
        implied = implied_higher_stats(model)
        expected = {"00": 0.56, "01": 0.14, "10": 0.14, "11": 0.16}
        for key, val in expected.items():
            assert abs(float(implied.prob(gram(key))) - val) <= 1e-12

    def test_half_with_full_self_loop_is_identity(self):
        model = two_state_family(0.5, 1.0)
        assert table_of(model) == {("0", "0"): 1.0, ("1", "1"): 1.0}

    def test_stationarity_brute_force(self):
        # direct pi @ X = pi check at random feasible p00 values
        import numpy as np

        rng = np.random.default_rng(5)
        r = 0.3
        lo, hi = two_state_feasible_interval(r)
        for p00 in rng.uniform(lo, hi, size=5):
            model = two_state_family(r, round(float(p00), 9))
            t = table_of(model)
            X = np.array(
                [
                    [t.get(("0", "0"), 0.0), t.get(("0", "1"), 0.0)],
                    [t.get(("1", "0"), 0.0), t.get(("1", "1"), 0.0)],
                ]
            )
            pi = np.array([1 - r, r])
            assert np.abs(pi @ X - pi).max() <= 1e-9

    def test_infeasible_reports_interval(self):
        with pytest.raises(ValueError, match=r"feasible interval"):
            two_state_family(0.3, 0.1)
        with pytest.raises(ValueError):
            two_state_family(1.2, 0.5)


class TestEntropyRate:
    def test_golden_values(self, golden_models):
        for name, want in GOLDEN_ENTROPY.items():
            assert entropy_rate(golden_models[name]) == pytest.approx(want, abs=5e-4)

    def test_vertex_is_exactly_zero(self, golden_models):
        assert entropy_rate(golden_models["vertex"]) == 0.0

    def test_deterministic_rows_mean_zero(self):
        for case in range(20):
            R = random_consistent_input(1500 + case, sigma=3, k=2)
            v = vertex_solution(R)
            if all(len(v.row(s)) == 1 for s in v.states):
                assert entropy_rate(v) == 0.0

    def test_bounded_by_log_alphabet(self):
        for case in range(10):
            R = random_consistent_input(300 + case, sigma=4, k=1)
            H = entropy_rate(standard_solution(R))
            assert 0 <= H <= math.log2(4) + 1e-12

    def test_concave_along_u(self, golden_models):
        a, b = golden_models["standard"], golden_models["vertex"]
        grid = [0.0, 0.2, 0.5, 0.8, 1.0]
        H = {u: entropy_rate(convex_combine(a, b, u)) for u in grid}
        floor = min(H[0.0], H[1.0])
        assert all(H[u] >= floor - 1e-12 for u in grid)
        # midpoint concavity on the sampled grid
        for lo, hi in [(0.0, 1.0), (0.2, 0.8), (0.0, 0.4)]:
            mid = (lo + hi) / 2
            h_mid = entropy_rate(convex_combine(a, b, mid))
            h_lo = entropy_rate(convex_combine(a, b, lo))
            h_hi = entropy_rate(convex_combine(a, b, hi))
            assert h_mid >= (h_lo + h_hi) / 2 - 1e-12


class TestImpliedStats:
    @pytest.mark.parametrize(
        "model_name, table",
        [
            ("standard", GOLDEN_R3_STANDARD),
            ("vertex", GOLDEN_R3_VERTEX),
            ("u05", GOLDEN_R3_U05),
            ("u02", GOLDEN_R3_U02),
        ],
    )
    def test_golden_three_gram_tables(self, golden_models, model_name, table):
        implied = implied_higher_stats(golden_models[model_name])
        for key, val in table.items():
            assert round(float(implied.prob(gram(key))), 3) == val

    def test_zero_weight_states_contribute_nothing(self, golden_models):
        implied = implied_higher_stats(golden_models["u05"])
        # state 11 has stationary probability 0, so no 11x mass
        assert float(implied.prob(gram("110"))) == 0.0
        assert float(implied.prob(gram("111"))) == 0.0

    def test_marginals_recover_input(self):
        for case in range(20):
            R = random_consistent_input(2100 + case, sigma=3, k=2)
            implied = implied_higher_stats(standard_solution(R))
            for side in ("prefix", "suffix"):
                back = marginalize(implied, 2, side=side)
                assert l1_distance(back, R) <= 1e-9


class TestSimulate:
    def test_identity_chain_constant(self):
        R = estimate(list("aab"), 1)
        model = identity_chain(R)
        assert simulate(model, 20, seed=4, start=("b",)) == ["b"] * 20

    def test_deterministic_vertex_walk(self, golden_models):
        out = simulate(golden_models["vertex"], 50, seed=9, start="00")
        assert out == ["0"] * 50

    def test_convergence_to_stationary(self, golden_r2, golden_models):
        seq = simulate(golden_models["u05"], 100_000, seed=1)
        est = estimate(seq, 2, mode="circular", alphabet=golden_r2.alphabet)
        assert l1_distance(est, golden_r2) <= 0.01

    def test_reproducible(self, golden_models):
        a = simulate(golden_models["u05"], 500, seed=7)
        b = simulate(golden_models["u05"], 500, seed=7)
        assert a == b
        assert a != simulate(golden_models["u05"], 500, seed=8)

    def test_unknown_start(self, golden_models):
        with pytest.raises(ValueError, match="start"):
            simulate(golden_models["standard"], 10, seed=0, start=("2", "2"))

    def test_bad_length(self, golden_models):
        with pytest.raises(ValueError):
            simulate(golden_models["standard"], 0, seed=0)


class TestClassify:
    def test_golden_vertex_classes(self, golden_models):
        with pytest.warns(UserWarning, match="periodic"):
            info = classify_chain(golden_models["vertex"])
        classes = [tuple("".join(g) for g in c) for c in info.communicating_classes]
        assert classes == [("00",), ("01", "10"), ("11",)]
        assert not info.irreducible
        assert info.periods == (1, 2, 1)

    def test_identity_chain_classes(self):
        R = estimate(list("abcabc"), 1)
        info = classify_chain(identity_chain(R), warn_periodic=False)
        assert len(info.communicating_classes) == 3
        assert info.aperiodic
        assert all(p == 1 for p in info.periods)

    def test_standard_positive_irreducible(self, golden_r2):
        model = standard_solution(golden_r2, prune_zero_states=True)
        info = classify_chain(model, warn_periodic=False)
        assert info.irreducible
        assert info.aperiodic


class TestBruteForceEquations:
    """Re-derive the per-suffix linear systems from scratch and check every
    produced solution satisfies them."""

    @staticmethod
    def _check(R, model, tol=1e-12):
        trans = table_of(model)
        for y in {s[1:] for s in model.states}:
            key_y = "".join(y)
            for b in R.alphabet.symbols:
                rhs = float(R.prob(y + (b,)))
                lhs = sum(
                    float(R.prob((a,) + y))
                    * trans.get(("".join((a,) + y), key_y + b), 0.0)
                    for a in R.alphabet.symbols
                )
                assert abs(lhs - rhs) <= tol
            for a in R.alphabet.symbols:
                state = (a,) + y
                if state not in model.trans:
                    continue
                total = sum(
                    trans.get(("".join(state), key_y + b), 0.0)
                    for b in R.alphabet.symbols
                )
                assert abs(total - 1.0) <= tol
                assert all(p >= 0 for p in model.row(state).values())

    @pytest.mark.parametrize("sigma,k", [(2, 1), (2, 2), (3, 1), (3, 2)])
    def test_all_constructions(self, sigma, k):
        for case in range(10):
            R = random_consistent_input(7000 + 97 * case + sigma * 10 + k, sigma, k)
            standard = standard_solution(R)
            self._check(R, standard)
            nw = vertex_solution(R)
            self._check(R, nw)
            self._check(R, vertex_solution(R, rule="lexicographic-greedy"))
            self._check(R, convex_combine(standard, nw, 0.37), tol=1e-12)


class TestModelSerialization:
    def test_roundtrip(self, golden_models):
        model = golden_models["u05"]
        clone = ChainModel.from_json(model.to_json())
        assert table_of(clone) == table_of(model)
        assert clone.meta["construction"] == "convex"
        assert clone.states == model.states

    def test_verify_rejects_corrupt_rows(self, golden_models):
        obj = golden_models["standard"].to_json()
        obj["trans"]["00"]["00"] = 0.9
        with pytest.raises(ValueError, match="row sums"):
            ChainModel.from_json(obj)
        obj = golden_models["standard"].to_json()
        obj["trans"]["00"] = {"10": 1.0}
        with pytest.raises(ValueError, match="overlap"):
            ChainModel.from_json(obj)
