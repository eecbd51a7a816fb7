import itertools
import random

import pytest

from tensorstab import filtstab, linalg, weightcones
from tensorstab.errors import RankOrder, ScaleLimit

from gen import rand_upward_pattern


def rays_by_facet_subsets(inequalities, dim):
    """Oracle: intersect every (dim-1)-subset of facets, keep feasible directions."""
    cons = [tuple(int(i == j) for j in range(dim)) for i in range(dim)] + [tuple(a) for a in inequalities]
    if dim == 1:
        return [(1,)] if all(a[0] >= 0 for a in cons) else []
    out = set()
    for subset in itertools.combinations(cons, dim - 1):
        if linalg.rank(subset) != dim - 1:
            continue
        (v,) = linalg.nullspace(subset, dim)
        for sign in (1, -1):
            w = [sign * x for x in v]
            if all(sum(a * x for a, x in zip(c, w)) >= 0 for c in cons):
                out.add(linalg.primitive(w))
    return sorted(out)


def dot(a, b):
    return sum(x * y for x, y in zip(a, b))


class TestLinearForms:
    def test_matches_gamma_sum(self):
        rng = random.Random(5)
        for _ in range(300):
            r = rng.randint(2, 6)
            t = rng.randint(1, min(3, r - 1))
            ranks = sorted(rng.sample(range(1, r), t))
            s = rng.randint(1, 3)
            w = [rng.randint(1, 5) for _ in range(t)]
            idx = tuple(rng.randint(1, t + 1) for _ in range(s))
            gamma = weightcones.gamma_from_weights(r, ranks, w)
            full = ranks + [r]
            assert dot(weightcones.linear_form(r, ranks, idx), w) == sum(gamma[full[i - 1] - 1] for i in idx)

    def test_weights_roundtrip(self):
        g = weightcones.gamma_from_weights(4, [1, 3], [2, 5])
        assert weightcones.weights_from_gamma(4, [1, 3], g) == (2, 5)


class TestConeRays:
    def test_against_brute_force(self):
        rng = random.Random(6)
        for _ in range(200):
            dim = rng.randint(1, 4)
            ineq = [tuple(rng.randint(-3, 3) for _ in range(dim)) for _ in range(rng.randint(0, 4))]
            assert weightcones.cone_rays(ineq, dim) == rays_by_facet_subsets(ineq, dim)

    def test_orthant(self):
        assert weightcones.cone_rays([], 3) == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]

    def test_pointed_to_origin(self):
        assert weightcones.cone_rays([(-1, -1)], 2) == []


class TestRefinement:
    @pytest.mark.parametrize("r, ranks, s", [(3, (1, 2), 2), (4, (1, 2, 3), 2), (4, (1, 3), 3), (5, (1, 2, 4), 2)])
    def test_every_form_difference_has_constant_sign_on_each_cell(self, r, ranks, s):
        forms = {weightcones.linear_form(r, ranks, i) for i in weightcones.all_multi_indices(len(ranks), s)}
        for cell in weightcones.subdivide(r, ranks, s):
            for a, b in itertools.combinations(forms, 2):
                diff = [x - y for x, y in zip(a, b)]
                signs = {(dot(diff, v) > 0) - (dot(diff, v) < 0) for v in cell.rays}
                assert not {1, -1} <= signs

    @pytest.mark.parametrize("r, ranks, s", [(3, (1, 2), 2), (4, (1, 2, 3), 2), (5, (2, 3), 3)])
    def test_cells_cover_orthant(self, r, ranks, s):
        rng = random.Random(7)
        cells = weightcones.subdivide(r, ranks, s)
        for _ in range(100):
            m = [rng.randint(0, 9) for _ in ranks]
            assert any(c.contains(m) for c in cells)

    def test_cell_rays_are_extreme(self):
        for cell in weightcones.subdivide(4, (1, 2, 3), 2):
            ineq = [a for a in cell.inequalities if any(a)]
            assert sorted(cell.rays) == rays_by_facet_subsets(ineq, 3)


class TestEdges:
    def test_three_two_step(self):
        rs = weightcones.edges(3, [1, 2], 2)
        assert set(rs.rays) == {(-6, 3, 3), (-3, -3, 6), (-3, 0, 3)}
        assert rs.a1 == 3
        assert set(weightcones.weight_candidates(3, [1, 2], 2)) == {(1, 0), (0, 1), (1, 1)}

    def test_linear_case_has_only_axes(self):
        rs = weightcones.edges(4, [1, 2, 3], 1)
        assert rs.a1 == 4
        assert set(weightcones.weight_candidates(4, [1, 2, 3], 1)) == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}

    def test_one_step(self):
        rs = weightcones.edges(4, [2], 2)
        assert rs.rays == ((-4, -4, 4, 4),) and rs.weights == ((2,),)

    def test_weights_reproduce_rays(self):
        for r, ranks, s in [(4, (1, 2, 3), 2), (5, (1, 3, 4), 3)]:
            rs = weightcones.edges(r, ranks, s)
            for g, w in zip(rs.rays, rs.weights):
                assert tuple(weightcones.gamma_from_weights(r, ranks, w)) == g
                assert sum(g) == 0 and list(g) == sorted(g)

    def test_rank_order(self):
        with pytest.raises(RankOrder):
            weightcones.edges(4, [2, 2], 2)
        with pytest.raises(RankOrder):
            weightcones.edges(4, [0, 2], 2)

    def test_scale_limits(self):
        with pytest.raises(ScaleLimit):
            weightcones.edges(7, [1], 2)
        with pytest.raises(ScaleLimit):
            weightcones.edges(4, [1], 4)
        with pytest.raises(ScaleLimit):
            weightcones.edges(6, [1, 2, 3, 4, 5], 3)


class TestPatternCells:
    def test_mu_is_linear_on_each_cell(self):
        rng = random.Random(8)
        for _ in range(150):
            r = rng.randint(2, 5)
            t = rng.randint(1, min(3, r - 1))
            s = rng.randint(1, 3)
            ranks = sorted(rng.sample(range(1, r), t))
            pat = rand_upward_pattern(rng, t, s)
            for cell in weightcones.subdivide(r, ranks, s, pat.nonzero):
                lin = weightcones.linear_form(r, ranks, cell.index)
                for m in list(cell.rays) + [cell.interior_point()]:
                    if not all(m):
                        continue
                    assert filtstab.mu(pat, r, ranks, m).mu == dot(lin, m)
                assert cell.contains(cell.interior_point())

    def test_full_flag_r6_s3_through_patterns(self):
        rng = random.Random(9)
        pat = rand_upward_pattern(rng, 5, 3)
        cells = weightcones.subdivide(6, [1, 2, 3, 4, 5], 3, pat.nonzero)
        assert cells and all(len(c.rays) >= 5 for c in cells)
