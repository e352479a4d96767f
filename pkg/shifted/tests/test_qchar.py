import random

from django.conf import settings
from django.test import SimpleTestCase

from shifted.exact_algebra import U, LaurentPoly, RatFunc
from shifted.exceptions import PreconditionError
from shifted.qchar import (
    VARIANT_A, VARIANT_B, KRSpec, Monomial, drinfeld_lweight, fm_qcharacter, hj_limit, kr_dimvec, kr_lweight,
    kr_monomial, polynomial_lweight, prefundamental_lweight, q_strings, random_tpkr_sweep,
    right_negative_closure_check, sl2_expansion, socle_bound_check, solve_a_exponents,
    tpkr_criterion, unique_dominant,
)
from shifted.quiver_core import dynkin_quiver, jordan_quiver


def zeta(r):
    return LaurentPoly.var('zeta', r)


class MonomialTests(SimpleTestCase):

    def test_simple_root_monomial(self):
        a = Monomial.A(dynkin_quiver('A2'), '1', 0)
        self.assertEqual(a.as_dict(), {('1', -1): 1, ('1', 1): 1, ('2', 0): -1})
        self.assertEqual(str(Monomial.A(dynkin_quiver('A1'), '1', 0)), 'Y_{1,-1}Y_{1,1}')

    def test_kr_data(self):
        spec = KRSpec('1', 0, 2)
        self.assertEqual(spec.support(), [-1, 1])
        self.assertEqual(kr_monomial(spec), Monomial.from_mapping({('1', -1): 1, ('1', 1): 1}))
        self.assertEqual(kr_dimvec('1', 0, 2).to_json(), {'1,-1': 1, '1,1': 1})
        with self.assertRaises(PreconditionError):
            KRSpec('1', 0, 0)

    def test_json_round_trip(self):
        monomial = Monomial.from_mapping({('2', 3): -1, ('1', 0): 2})
        self.assertEqual(Monomial.from_json(monomial.to_json()), monomial)
        self.assertTrue(monomial.is_right_negative())
        self.assertFalse(monomial.is_dominant())

    def test_q_strings(self):
        self.assertEqual(q_strings({0: 1, 2: 1}), [(0, 2)])
        self.assertEqual(q_strings({0: 1, 4: 1}), [(0, 1), (4, 1)])
        self.assertEqual(q_strings({0: 2, 2: 1}), [(0, 2), (0, 1)])
        with self.assertRaises(PreconditionError):
            q_strings({0: -1})

    def test_sl2_expansion(self):
        monomial = Monomial.from_mapping({('1', 0): 1, ('1', 2): 1})
        expansion = sl2_expansion(dynkin_quiver('A1'), monomial, '1')
        self.assertEqual(expansion, [
            ({}, 1),
            ({('1', 3): 1}, 1),
            ({('1', 1): 1, ('1', 3): 1}, 1),
        ])

    def test_solve_a_exponents(self):
        quiver = dynkin_quiver('A1')
        ratio = Monomial.A(quiver, '1', 1).inverse()
        self.assertEqual(solve_a_exponents(quiver, ratio), {('1', 1): 1})
        self.assertEqual(solve_a_exponents(quiver, Monomial.one()), {})
        self.assertIsNone(solve_a_exponents(quiver, Monomial.Y('1', 0)))


class FrenkelMukhinTests(SimpleTestCase):

    def test_a1_dimensions(self):
        quiver = dynkin_quiver('A1')
        for l in range(1, 6):
            character = fm_qcharacter(quiver, KRSpec('1', 0, l))
            self.assertEqual(character.dim(), l + 1)
            self.assertTrue(unique_dominant(character))
            self.assertFalse(character.incomplete)

    def test_a1_level_three(self):
        character = fm_qcharacter(dynkin_quiver('A1'), KRSpec('1', 0, 3))
        data = character.to_dict()
        self.assertEqual((data['dim'], data['dominant_count']), (4, 1))
        self.assertEqual(data['highest'], {'1,-2': 1, '1,0': 1, '1,2': 1})

    def test_higher_rank_dimensions(self):
        cases = [('A2', '1', 1, 3), ('A2', '2', 1, 3), ('A2', '1', 2, 6), ('A3', '1', 1, 4), ('A3', '2', 1, 6)]
        for type_name, i, l, expected in cases:
            character = fm_qcharacter(dynkin_quiver(type_name), KRSpec(i, 0, l))
            self.assertEqual(character.dim(), expected, (type_name, i, l))
            self.assertEqual(character.dominant_count(), 1)

    def test_normalized_terms_start_at_highest(self):
        quiver = dynkin_quiver('A2')
        normalized = fm_qcharacter(quiver, KRSpec('1', 0, 1)).normalized(quiver)
        self.assertEqual(normalized[0], ({}, 1))
        self.assertEqual(normalized[1], ({('1', 1): 1}, 1))
        self.assertEqual(normalized[2], ({('1', 1): 1, ('2', 2): 1}, 1))

    def test_step_cap(self):
        character = fm_qcharacter(dynkin_quiver('A1'), KRSpec('1', 0, 4), step_cap=2)
        self.assertTrue(character.incomplete)

    def test_rejects_non_dynkin(self):
        with self.assertRaises(PreconditionError):
            fm_qcharacter(jordan_quiver(), KRSpec('1', 0, 1))
        with self.assertRaises(PreconditionError):
            fm_qcharacter(dynkin_quiver('A2'), KRSpec('3', 0, 1))

    def test_parallel_expansion_matches(self):
        quiver = dynkin_quiver('A3')
        serial = fm_qcharacter(quiver, KRSpec('2', 0, 1))
        parallel = fm_qcharacter(quiver, KRSpec('2', 0, 1), threads=4)
        self.assertEqual(serial.to_dict(), parallel.to_dict())

    def test_terms_lie_in_the_lowering_cone(self):
        cases = [('A1', KRSpec('1', 0, 4)), ('A2', KRSpec('1', 0, 2)), ('A2', KRSpec('2', 1, 3)), ('A3', KRSpec('2', 0, 2))]
        for type_name, spec in cases:
            quiver = dynkin_quiver(type_name)
            character = fm_qcharacter(quiver, spec)
            for monomial in character.terms:
                avec = solve_a_exponents(quiver, monomial / character.highest)
                self.assertIsNotNone(avec, (type_name, spec, monomial))
                self.assertTrue(all(n > 0 for n in avec.values()))
                self.assertEqual(avec, character.a_vectors[monomial])


class TensorProductTests(SimpleTestCase):

    def test_variant_b(self):
        self.assertTrue(tpkr_criterion([('1', 2, 2)], 4, VARIANT_B))
        self.assertFalse(tpkr_criterion([('1', 2, 2)], 6, VARIANT_B))
        self.assertTrue(tpkr_criterion([('1', 0, 2), ('1', 0, 2)], 2, VARIANT_B))
        self.assertFalse(tpkr_criterion([('1', 0, 2)], 5, VARIANT_B))
        self.assertTrue(socle_bound_check(dynkin_quiver('A1'), [('1', 0, 2), ('1', 0, 2)], 2, VARIANT_B).holds)

    def test_variant_a(self):
        self.assertTrue(tpkr_criterion([('1', 4, 2)], 2, VARIANT_A))
        self.assertFalse(tpkr_criterion([('1', 4, 2)], 3, VARIANT_A))
        with self.assertRaises(PreconditionError):
            tpkr_criterion([('1', 4, 2)], 2, 'c')

    def test_socle_certificate(self):
        quiver = dynkin_quiver('A2')
        certificate = socle_bound_check(quiver, [('1', 2, 2)], 4, VARIANT_B)
        self.assertTrue(certificate.holds)
        self.assertEqual(certificate.socle.to_json(), {'1,5': 1})
        self.assertEqual(certificate.lowered[0], Monomial.from_mapping({('1', 2): 1, ('2', 5): 1, ('1', 6): -1}))
        self.assertFalse(socle_bound_check(quiver, [('1', 2, 2)], 6, VARIANT_B).holds)

    def test_socle_certificate_through_duality(self):
        quiver = dynkin_quiver('A1')
        self.assertTrue(socle_bound_check(quiver, [('1', 4, 2)], 2, VARIANT_A).holds)
        self.assertFalse(socle_bound_check(quiver, [('1', 4, 2)], 3, VARIANT_A).to_dict()['holds'])

    def test_certificate_reports_each_check(self):
        quiver = dynkin_quiver('A1')
        certificate = socle_bound_check(quiver, [('1', 0, 2)], 5, VARIANT_B)
        self.assertFalse(certificate.socle_identity)
        self.assertEqual(certificate.socle.to_json(), {'1,3': 1})
        self.assertEqual(certificate.parity_socle.to_json(), {'1,5': 1})
        self.assertTrue(certificate.cone_ok and certificate.right_negative_ok and certificate.closure_ok)
        self.assertIsNone(certificate.witness)
        self.assertFalse(certificate.holds)
        self.assertTrue(socle_bound_check(quiver, [('1', 0, 2)], 3, VARIANT_B).holds)

    def test_reducible_product_breaks_right_negativity(self):
        # Y_{1,0} Y_{1,2}: the product character contains the trivial monomial
        quiver = dynkin_quiver('A1')
        certificate = socle_bound_check(quiver, [('1', 0, 1), ('1', 2, 1)], 2, VARIANT_B)
        self.assertEqual(certificate.socle.to_json(), {'1,1': 1, '1,3': 1})
        self.assertTrue(certificate.cone_ok)
        self.assertFalse(certificate.right_negative_ok)
        self.assertFalse(certificate.closure_ok)
        self.assertEqual(certificate.witness, Monomial.one())
        self.assertEqual(certificate.to_dict()['witness'], {})
        self.assertFalse(certificate.holds)
        for l in range(0, 6):
            self.assertFalse(tpkr_criterion([('1', 0, 1), ('1', 2, 1)], l, VARIANT_B))

    def test_generic_product_of_fundamentals(self):
        quiver = dynkin_quiver('A2')
        tuples = [('1', 0, 1), ('2', 1, 1)]
        certificate = socle_bound_check(quiver, tuples, 1, VARIANT_B)
        self.assertTrue(certificate.holds)
        self.assertEqual(certificate.socle.to_json(), {'1,1': 1, '2,2': 1})
        self.assertTrue(tpkr_criterion(tuples, 1, VARIANT_B))

    def test_criterion_ignores_tuple_order(self):
        rng = random.Random(settings.QLG_SEED)
        quiver = dynkin_quiver('A2')
        for trial in range(200):
            variant = rng.choice([VARIANT_A, VARIANT_B])
            l = rng.randint(0, 8)
            tuples = [(rng.choice(['1', '2']), rng.randint(0, 6), rng.randint(1, 3)) for _ in range(rng.randint(2, 4))]
            shuffled = list(tuples)
            rng.shuffle(shuffled)
            self.assertEqual(tpkr_criterion(tuples, l, variant), tpkr_criterion(shuffled, l, variant))
            if trial < 12 and len(tuples) <= 3:
                first = socle_bound_check(quiver, tuples, l, variant)
                second = socle_bound_check(quiver, shuffled, l, variant)
                self.assertEqual(first.holds, second.holds)
                self.assertEqual(first.socle, second.socle)

    def test_random_sweep_agrees(self):
        result = random_tpkr_sweep(40, settings.QLG_SEED)
        self.assertEqual(result['seed'], settings.QLG_SEED)
        self.assertTrue(result['all_agree'])
        self.assertEqual(result, random_tpkr_sweep(40, settings.QLG_SEED))

    def test_right_negative_closure(self):
        quiver = dynkin_quiver('A2')
        monomial = Monomial.from_mapping({('1', 2): 1, ('2', 5): 1, ('1', 6): -1})
        self.assertTrue(right_negative_closure_check(quiver, monomial, 2))
        with self.assertRaises(PreconditionError):
            right_negative_closure_check(quiver, Monomial.Y('1', 0), 1)


class HernandezJimboLimitTests(SimpleTestCase):

    def test_a1_stabilizes(self):
        result = hj_limit(dynkin_quiver('A1'), '1', 0, 5, 3)
        self.assertEqual([level['agreement_with_next'] for level in result['levels'][:-1]], [1, 2, 3, 3])
        self.assertNotIn('agreement_with_next', result['levels'][-1])
        self.assertEqual(result['stable_degree'], 3)
        self.assertEqual([term['degree'] for term in result['stabilized']], [0, 1, 2, 3])
        self.assertEqual(result['stabilized'][1]['a_vector'], {'1,1': 1})

    def test_preconditions(self):
        with self.assertRaises(PreconditionError):
            hj_limit(dynkin_quiver('A3'), '1', 0, 3, 2)
        with self.assertRaises(PreconditionError):
            hj_limit(dynkin_quiver('A1'), '1', 0, 1, 2)


class LWeightTests(SimpleTestCase):

    def test_kr_lweight(self):
        weight = kr_lweight(KRSpec('1', 0, 1))
        self.assertEqual(weight, {'1': RatFunc(zeta(1) * (U - zeta(-1)), U - zeta(1))})

    def test_prefundamental(self):
        self.assertEqual(prefundamental_lweight('1', 2, '+'), {'1': RatFunc(U - zeta(2), U)})
        self.assertEqual(prefundamental_lweight('1', 2, '-'), {'1': RatFunc(U, U - zeta(2))})
        with self.assertRaises(PreconditionError):
            prefundamental_lweight('1', 2, '0')

    def test_polynomial_lweight(self):
        weight = polynomial_lweight('1', [1, 2])
        self.assertEqual(weight, {'1': RatFunc((U - zeta(1)) * (U - zeta(2)), U * U)})
        self.assertEqual(polynomial_lweight('1', []), {'1': RatFunc(1)})

    def test_drinfeld_lweight_is_multiplicative(self):
        rng = random.Random(settings.QLG_SEED)
        for _ in range(10):
            first = [rng.randint(-4, 4) for _ in range(rng.randint(0, 2))]
            second = [rng.randint(-4, 4) for _ in range(rng.randint(1, 2))]
            joint = drinfeld_lweight({'1': first + second})['1']
            product = drinfeld_lweight({'1': first})['1'] * drinfeld_lweight({'1': second})['1']
            self.assertEqual(joint, product, (first, second))
