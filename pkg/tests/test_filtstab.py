import itertools
import random
from fractions import Fraction

import pytest

from tensorstab import filtstab, linalg
from tensorstab.errors import EmptyPattern, FormZero, NonConstantFirstTerm, RankOrder, TensorStabError
from tensorstab.exactalg import DeltaPoly, EvPoly
from tensorstab.filtstab import Family, Status, WeightedFiltration
from tensorstab.sheafmodel import Coordinate, Declared, SheafModel
from tensorstab.tensor import SYMMETRIC, TensorForm

from gen import rand_chain, rand_delta, rand_model, rand_ranks, rand_upward_pattern, rand_weights

T = EvPoly.t()
E1, E2, E3 = Coordinate({0}), Coordinate({1}), Coordinate({2})
E12, E23 = Coordinate({0, 1}), Coordinate({1, 2})


def delta(text, n=2):
    return DeltaPoly.parse(text, n)


def single(step):
    return WeightedFiltration.single(step)


class TestGamma:
    @pytest.mark.parametrize(
        "r, ranks, weights, expected",
        [(3, [1], [1], (-2, 1, 1)), (3, [2], [1], (-1, -1, 2)), (3, [1, 2], [1, 2], (-4, -1, 5))],
    )
    def test_examples(self, r, ranks, weights, expected):
        assert filtstab.gamma_vector(r, ranks, weights) == expected

    def test_sorted_and_traceless(self):
        rng = random.Random(10)
        for _ in range(200):
            r = rng.randint(2, 6)
            ranks = rand_ranks(rng, r, rng.randint(1, r - 1))
            g = filtstab.gamma_vector(r, ranks, rand_weights(rng, len(ranks)))
            assert sum(g) == 0 and list(g) == sorted(g)

    def test_rank_order(self):
        with pytest.raises(RankOrder):
            filtstab.gamma_vector(3, [2, 1], [1, 1])


class TestMu:
    def test_example_two_summands(self, example):
        model, form = example
        res = filtstab.filtration_mu(model, form, single(E23))
        assert (res.mu, res.argmin, res.epsilon) == (-2, (1, 1), (2,))

    def test_example_structure_sheaf(self, example):
        model, form = example
        assert filtstab.filtration_mu(model, form, single(E3)).mu == -4

    def test_isotropic_flag_has_weight_zero(self, example):
        model, form = example
        assert filtstab.filtration_mu(model, form, WeightedFiltration((E1, E12), (1, 1))).mu == 0

    def test_epsilon_identity_holds_for_result(self):
        rng = random.Random(11)
        for _ in range(200):
            r = rng.randint(2, 6)
            t = rng.randint(1, min(3, r - 1))
            s = rng.randint(1, 3)
            ranks, w = rand_ranks(rng, r, t), rand_weights(rng, t)
            res = filtstab.mu(rand_upward_pattern(rng, t, s), r, ranks, w)
            assert res.mu == sum(m * (s * k - e * r) for m, k, e in zip(w, ranks, res.epsilon))

    def test_empty_pattern(self):
        with pytest.raises(EmptyPattern):
            filtstab.mu(filtstab.VanishingPattern(1, 2, frozenset()), 3, [1], [1])

    def test_matches_graded_entries(self):
        """mu from the extracted pattern equals the min over nonzero entries of the form in an adapted basis."""
        rng = random.Random(12)
        for _ in range(150):
            r = rng.randint(2, 4)
            s = rng.randint(1, 3)
            entries = {
                (0, tuple(rng.randrange(r) for _ in range(s))): rng.randint(-2, 2) for _ in range(rng.randint(1, 4))
            }
            form = TensorForm(s, 1, r, entries)
            if form.is_zero():
                continue
            t = rng.randint(1, r - 1)
            ranks = rand_ranks(rng, r, t)
            # a random full-rank basis, its leading spans give the chain
            while True:
                basis = [[Fraction(rng.randint(-1, 1)) for _ in range(r)] for _ in range(r)]
                if linalg.det(basis) != 0:
                    break
            subspaces = [basis[:k] for k in ranks]
            w = rand_weights(rng, t)
            gamma = filtstab.gamma_vector(r, ranks, w)
            graded = form.change_basis(basis)
            oracle = min(sum(gamma[a] for a in idx) for (_, idx), _ in graded.items())
            pattern = filtstab.pattern_from_form(form, subspaces)
            assert pattern.is_upward_closed()
            assert filtstab.mu(pattern, r, ranks, w).mu == oracle

    def test_zero_form(self):
        with pytest.raises(FormZero):
            filtstab.pattern_from_form(TensorForm(2, 1, 2, {}), [[(1, 0)]])


class TestPattern:
    def test_restrict_matches_direct_extraction(self):
        rng = random.Random(13)
        for _ in range(100):
            model = rand_model(rng, 4, "P1")
            chain = rand_chain(rng, 4, 3)
            s = rng.randint(1, 3)
            entries = {(0, tuple(rng.randrange(4) for _ in range(s))): 1 for _ in range(rng.randint(1, 3))}
            form = TensorForm(s, 1, 4, entries)
            full = filtstab.chain_pattern(model, form, chain)
            for k in (1, 2):
                for keep in itertools.combinations((1, 2, 3), k):
                    direct = filtstab.chain_pattern(model, form, [chain[i - 1] for i in keep])
                    assert full.restrict(keep) == direct

    def test_minimal_generates(self):
        rng = random.Random(14)
        for _ in range(100):
            t, s = rng.randint(1, 3), rng.randint(1, 3)
            pat = rand_upward_pattern(rng, t, s)
            assert filtstab.VanishingPattern.upward_closure(t, s, pat.minimal()) == pat


class TestLhs:
    @pytest.mark.parametrize("d, expected", [("0,3/2", EvPoly.constant(0)), ("0,1", EvPoly.constant(1)), ("1,0", 3 - 2 * T)])
    def test_example_two_summands(self, example, d, expected):
        model, form = example
        f = single(E23)
        mu = filtstab.filtration_mu(model, form, f).mu
        assert filtstab.delta_stability_lhs(model, f, mu, delta(d)) == expected

    def test_slope_examples(self, example):
        model, form = example
        assert filtstab.slope_stability_lhs(model, single(E23), -2, 1) == -2
        assert filtstab.slope_stability_lhs(model, single(E3), -4, 1) == -4
        assert filtstab.slope_stability_lhs(model, single(E3), -4, 0) == 0

    def test_declared_step_needs_basis(self, example):
        model, form = example
        step = Declared(1, model.summand_hilbert(2))
        with pytest.raises(TensorStabError):
            filtstab.filtration_mu(model, form, single(step))

    def test_declared_step_with_basis_matches_coordinate(self, example):
        model, form = example
        step = Declared(2, model.summand_hilbert(1) + model.summand_hilbert(2), "I1+O", ((0, 1, 0), (0, 0, 1)))
        a = filtstab.filtration_mu(model, form, single(step))
        b = filtstab.filtration_mu(model, form, single(E23))
        assert a == b
        d = delta("0,1")
        assert filtstab.delta_stability_lhs(model, single(step), a.mu, d) == filtstab.delta_stability_lhs(model, single(E23), b.mu, d)


class TestSearch:
    @pytest.mark.parametrize("d", ["0,1/4", "0,1/2", "0,1", "0,5/4", "0,149/100"])
    def test_example_unstable_below_threshold(self, example, d):
        model, form = example
        v = filtstab.search_verdict(model, form, delta(d))
        assert v.status is Status.UNSTABLE and not v.relative_to_family
        cert = v.certificate
        mu = filtstab.filtration_mu(model, form, cert.filtration).mu
        assert filtstab.delta_stability_lhs(model, cert.filtration, mu, delta(d)) == cert.lhs
        assert cert.lhs.sign() > 0

    def test_example_certificate_at_one(self, example):
        model, form = example
        v = filtstab.search_verdict(model, form, delta("0,1"))
        assert v.certificate.filtration.label == "{e2,e3}" and v.certificate.lhs == EvPoly.constant(1)

    def test_example_equality_at_threshold(self, example):
        model, form = example
        v = filtstab.search_verdict(model, form, delta("0,3/2"))
        assert v.status is Status.STRICTLY_SEMISTABLE and v.relative_to_family
        assert v.certificate.filtration.label == "{e2,e3}" and v.certificate.lhs.is_zero()

    @pytest.mark.parametrize("d", ["0,2", "0,10", "1,0"])
    def test_example_stable_above(self, example, d):
        model, form = example
        assert filtstab.search_verdict(model, form, delta(d)).status is Status.STABLE

    def test_identity_form_on_trivial_bundle(self):
        model = SheafModel.of("P2", (0, 0), (0, 0), (0, 0))
        form = TensorForm.from_matrix([[1, 0, 0], [0, 1, 0], [0, 0, 1]], SYMMETRIC)
        assert filtstab.search_verdict(model, form, delta("1,0")).status is Status.STABLE
        assert filtstab.delta2_threshold(model, form) == 0

    def test_zero_form(self, example):
        model, _ = example
        with pytest.raises(FormZero):
            filtstab.search_verdict(model, TensorForm(2, 1, 3, {}), delta("1,0"))

    def test_cell_modes_agree(self):
        rng = random.Random(15)
        for _ in range(60):
            r = rng.randint(2, 4)
            model = rand_model(rng, r)
            s = rng.randint(1, 3)
            entries = {(0, tuple(rng.randrange(r) for _ in range(s))): rng.randint(1, 2) for _ in range(rng.randint(1, 3))}
            form = TensorForm(s, 1, r, entries)
            d = rand_delta(rng, model.n)
            a = filtstab.search_verdict(model, form, d, cells="refinement")
            b = filtstab.search_verdict(model, form, d, cells="pattern")
            assert a.status is b.status

    def test_extra_filtration_in_family(self, example):
        model, form = example
        fam = Family(coordinate=False, extra=(WeightedFiltration((E3, E23), (1, 3)),))
        v = filtstab.search_verdict(model, form, delta("0,10"), fam)
        assert v.checked == 1


class TestThreshold:
    def test_example(self, example):
        model, form = example
        a = filtstab.threshold_analysis(model, form)
        assert a.value == Fraction(3, 2) and a.witness.filtration.label == "{e2,e3}"

    def test_single_structure_sheaf_filtration(self, example):
        model, form = example
        fam = Family(coordinate=False, extra=(single(E3),))
        assert filtstab.delta2_threshold(model, form, fam) == Fraction(3, 4)
        mu = filtstab.filtration_mu(model, form, single(E3)).mu
        first = filtstab.delta_stability_lhs(model, single(E3), mu, EvPoly.constant(0))
        assert first - 4 * EvPoly.constant(Fraction(3, 4)) == 0

    def test_reports_both_boundaries(self, example):
        model, form = example
        by_label = {e.filtration.label: e.threshold for e in filtstab.threshold_analysis(model, form).entries}
        assert by_label["{e3}"] == Fraction(3, 4) and by_label["{e2,e3}"] == Fraction(3, 2)

    def test_non_constant_first_term_warns(self):
        model = SheafModel.of("P2", (1, 0), (-1, 0))
        form = TensorForm.from_matrix([[0, 1], [1, 0]], SYMMETRIC)
        with pytest.warns(NonConstantFirstTerm):
            a = filtstab.threshold_analysis(model, form)
        assert a.warnings

    def test_needs_surface(self):
        model = SheafModel.of("P1", (0, 0), (0, 0))
        with pytest.raises(TensorStabError):
            filtstab.threshold_analysis(model, TensorForm.from_matrix([[0, 1], [1, 0]]))


class TestEstimate:
    def test_subfiltration_bound(self):
        rng = random.Random(16)
        for _ in range(300):
            r = rng.randint(3, 6)
            t = rng.randint(2, min(3, r - 1))
            s = rng.randint(1, 3)
            ranks, w = rand_ranks(rng, r, t), rand_weights(rng, t)
            pat = rand_upward_pattern(rng, t, s)
            full = filtstab.mu(pat, r, ranks, w).mu
            for k in range(1, t):
                for keep in itertools.combinations(range(1, t + 1), k):
                    sub = filtstab.mu(pat.restrict(keep), r, [ranks[i - 1] for i in keep], [w[i - 1] for i in keep]).mu
                    dropped = sum(w[i - 1] * s * ranks[i - 1] for i in range(1, t + 1) if i not in keep)
                    assert full <= sub + dropped


class TestImplicationChain:
    def test_random_instances(self):
        rng = random.Random(17)
        for _ in range(80):
            r = rng.randint(2, 4)
            model = rand_model(rng, r)
            s = rng.randint(1, 3)
            entries = {(0, tuple(rng.randrange(r) for _ in range(s))): rng.randint(1, 2) for _ in range(rng.randint(1, 4))}
            form = TensorForm(s, 1, r, entries)
            d = rand_delta(rng, model.n)
            if d.delta1 == 0:
                continue
            dv = filtstab.search_verdict(model, form, d).status
            sv = filtstab.slope_verdict(model, form, d.tau).status
            if sv is Status.STABLE:
                assert dv is Status.STABLE
            if dv.semistable:
                assert sv.semistable
