from itertools import product
from math import comb

from django.test import SimpleTestCase

from shifted.exact_algebra import POWERS_OF_U, POWERS_OF_U_INV, Q, U, RatFunc, chi, expand, q_power, residue_sum
from shifted.exceptions import PreconditionError
from shifted.lattice_rep import (
    A1_VERTEX, MINUS, PLUS, Lambda, a1_lweight_data, basis_up_to, build_operator_table, central_element,
    coeff_A_minus, coeff_A_plus, commutator_check, compositions, cover_position,
    expected_central_value, format_ascending, lweight_series_general, matrix_coefficients,
    phi_lambda, psi_series_a1, quot_cells, quot_poincare, taut_class,
)
from shifted.qloop import PSI_MINUS, PSI_PLUS, X_MINUS, X_PLUS
from shifted.quiver_core import dynkin_quiver


class FixedPointTests(SimpleTestCase):

    def test_compositions(self):
        self.assertEqual(compositions(2, 2), [(0, 2), (1, 1), (2, 0)])
        self.assertEqual(len(compositions(4, 3)), comb(6, 2))
        self.assertEqual(compositions(0, 0), [()])

    def test_covers(self):
        lam = Lambda((1, 0))
        self.assertEqual(lam.covers(), [Lambda((2, 0)), Lambda((1, 1))])
        self.assertEqual(lam.co_covers(), [Lambda((0, 0))])
        self.assertEqual(cover_position(lam, Lambda((1, 1))), 1)
        self.assertIsNone(cover_position(lam, Lambda((0, 1))))

    def test_basis_order(self):
        self.assertEqual([lam.parts for lam in basis_up_to(2, 1)], [(0, 0), (0, 1), (1, 0)])

    def test_taut_class(self):
        self.assertEqual(taut_class(Lambda((2,))).to_poly(), chi(1) * Q + chi(1) * q_power(-1))

    def test_negative_parts_rejected(self):
        with self.assertRaises(PreconditionError):
            Lambda((-1,))


class MatrixCoefficientTests(SimpleTestCase):

    def test_vacuum_coefficients(self):
        vacuum, one_box = Lambda((0,)), Lambda((1,))
        self.assertEqual(coeff_A_minus(vacuum, one_box, 0), RatFunc(1))
        self.assertEqual(coeff_A_plus(vacuum, one_box, 0), RatFunc(q_power(2), q_power(2) - 1))

    def test_non_covers_vanish(self):
        self.assertTrue(coeff_A_minus(Lambda((0,)), Lambda((2,)), 1).is_zero())
        self.assertTrue(coeff_A_plus(Lambda((1, 0)), Lambda((0, 1)), 0).is_zero())

    def test_matrix_coefficients_record(self):
        record = matrix_coefficients(Lambda((1,)), Lambda((0,)), 0, 'x-')
        self.assertEqual(record, {'source': [1], 'target': [0], 'n': 0, 'value': '1'})
        with self.assertRaises(PreconditionError):
            matrix_coefficients(Lambda((0,)), Lambda((1,)), 0, 'psi+')

    def test_operator_table_shape(self):
        table = build_operator_table(1, 2, 1)
        self.assertEqual(len(table), 3)
        self.assertEqual(len(table.generators), 14)
        self.assertEqual(len(build_operator_table(2, 2, 1)), 6)
        with self.assertRaises(PreconditionError):
            build_operator_table(1, -1, 1)


class PhiTests(SimpleTestCase):

    def test_vacuum_phi(self):
        self.assertEqual(phi_lambda(Lambda((0,))), RatFunc(U, U - chi(1) * Q))

    def test_psi_series_are_phi_expansions(self):
        trunc = 3
        for lam in (Lambda((0,)), Lambda((2,)), Lambda((1, 0)), Lambda((1, 1))):
            phi = phi_lambda(lam)
            plus = psi_series_a1(lam, PLUS, trunc)
            expected_plus = expand(phi, POWERS_OF_U_INV, -trunc, 0)
            for k in range(trunc + 1):
                self.assertEqual(plus.coefficient(-k), expected_plus.coefficient(-k), (lam, k))
            minus = psi_series_a1(lam, MINUS, trunc)
            expected_minus = expand(phi, POWERS_OF_U, lam.w, lam.w + trunc)
            for k in range(trunc + 1):
                self.assertEqual(minus.coefficient(lam.w + k), expected_minus.coefficient(lam.w + k), (lam, k))

    def test_general_formula_matches_a1(self):
        quiver = dynkin_quiver('A1')
        trunc = 3
        for lam in (Lambda((0,)), Lambda((1,))):
            vchars, wchar = a1_lweight_data(lam)
            plus = lweight_series_general(quiver, '1', vchars, wchar, lam.w, trunc, PLUS)
            minus = lweight_series_general(quiver, '1', vchars, wchar, lam.w, trunc, MINUS)
            expected_plus = psi_series_a1(lam, PLUS, trunc)
            expected_minus = psi_series_a1(lam, MINUS, trunc)
            for k in range(trunc + 1):
                self.assertEqual(plus.coefficient(-k), expected_plus.coefficient(-k), (lam, k))
                self.assertEqual(minus.coefficient(lam.w + k), expected_minus.coefficient(lam.w + k), (lam, k))

    def test_framing_rank_mismatch(self):
        vchars, wchar = a1_lweight_data(Lambda((0,)))
        with self.assertRaises(PreconditionError):
            lweight_series_general(dynkin_quiver('A1'), '1', vchars, wchar, 2, 1, PLUS)

    def test_central_element(self):
        for w in (1, 2):
            for lam in basis_up_to(w, 2):
                self.assertEqual(central_element(lam), expected_central_value(w), lam)

    def test_phi_residues_sum_to_zero(self):
        for w in (1, 2, 3):
            for lam in basis_up_to(w, 2):
                weighted = phi_lambda(lam) * RatFunc(1, U * U)
                self.assertTrue(residue_sum(weighted).is_zero(), lam)

    def test_central_element_up_to_weight_four(self):
        for w in (1, 2, 3):
            expected = expected_central_value(w)
            for lam in basis_up_to(w, 4):
                self.assertEqual(central_element(lam), expected, lam)

    def test_central_element_commutes_on_the_module(self):
        for w in (1, 2):
            table = build_operator_table(w, 3, 1)
            plus = table.generators[(PSI_PLUS, A1_VERTEX, 0)]
            minus = table.generators[(PSI_MINUS, A1_VERTEX, -w)]
            expected = expected_central_value(w)

            def central(vector):
                return plus.apply(minus.apply(vector))

            for col in range(len(table)):
                self.assertEqual(central({col: RatFunc(1)}), {col: expected})
            for n in (-1, 0, 1):
                for kind in (X_PLUS, X_MINUS):
                    x = table.generators[(kind, A1_VERTEX, n)]
                    for col in range(len(table)):
                        vector = {col: RatFunc(1)}
                        self.assertEqual(central(x.apply(vector)), x.apply(central(vector)), (w, kind, n, col))


class CommutatorTests(SimpleTestCase):

    def test_rank_one(self):
        for lam in (Lambda((0,)), Lambda((1,)), Lambda((2,))):
            for m in (-1, 0, 1):
                for n in (-1, 0, 1):
                    certificate = commutator_check(1, lam, m, n)
                    self.assertTrue(certificate.passed, (lam, m, n))

    def test_rank_two(self):
        for lam in (Lambda((0, 0)), Lambda((1, 0)), Lambda((1, 1))):
            for m in (0, 1):
                for n in (0, 1):
                    certificate = commutator_check(2, lam, m, n)
                    self.assertTrue(certificate.passed, (lam, m, n))
                    self.assertTrue(all(value.is_zero() for _, value in certificate.off_diagonal))

    def test_commutators_for_small_modes(self):
        for w in (1, 2, 3):
            for lam in basis_up_to(w, 3):
                for m in range(-2, 3):
                    for n in range(-2, 3):
                        self.assertTrue(commutator_check(w, lam, m, n).passed, (lam, m, n))

    def test_certificate_serialization(self):
        data = commutator_check(2, Lambda((1, 0)), 0, 0).to_dict()
        self.assertTrue(data['passed'])
        self.assertEqual(data['off_diagonal'][0]['target'], [0, 1])

    def test_wrong_rank(self):
        with self.assertRaises(PreconditionError):
            commutator_check(2, Lambda((0,)), 0, 0)


class QuotSchemeTests(SimpleTestCase):

    def test_punctual_poincare(self):
        poly, euler = quot_poincare(2, 1, punctual=True)
        self.assertEqual(format_ascending(poly, 't'), '1+t^2')
        self.assertEqual(euler, 2)

    def test_full_poincare(self):
        poly, euler = quot_poincare(2, 1, punctual=False)
        self.assertEqual(format_ascending(poly, 't'), 't^2+t^4')
        self.assertEqual(euler, 2)

    def test_cells_against_brute_force(self):
        for w in range(1, 5):
            for v in range(0, 7):
                cells = quot_cells(w, v)
                brute = sorted(p for p in product(range(v + 1), repeat=w) if sum(p) == v)
                self.assertEqual(sorted(tuple(cell['composition']) for cell in cells), brute)
                for cell in cells:
                    parts = cell['composition']
                    self.assertEqual(cell['punctual_dim'], sum(r * part for r, part in enumerate(parts)))
                    self.assertEqual(cell['dim'], v + cell['punctual_dim'])
                poly, euler = quot_poincare(w, v, punctual=False)
                self.assertEqual(euler, comb(v + w - 1, w - 1))
                self.assertEqual(poly.evaluate({'t': 1}), euler)

    def test_invalid_arguments(self):
        with self.assertRaises(PreconditionError):
            quot_cells(0, 1)
        with self.assertRaises(PreconditionError):
            psi_series_a1(Lambda((0,)), '*', 1)
