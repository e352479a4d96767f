from django.test import SimpleTestCase

from shifted.exceptions import GrassmannianError
from shifted.grassmannian import (
    EPS, GradedModule, all_graded_submodules, build_injective, enumerate_graded_submodules,
    euler_vs_kr, preprojective_basis,
)
from shifted.quiver_core import SUPPORT_IXZ, DimVec, dynkin_quiver


class PreprojectiveBasisTests(SimpleTestCase):

    def test_dimensions(self):
        self.assertEqual(len(preprojective_basis(dynkin_quiver('A1'), '1').paths), 1)
        self.assertEqual(len(preprojective_basis(dynkin_quiver('A2'), '1').paths), 2)
        self.assertEqual(len(preprojective_basis(dynkin_quiver('A3'), '1').paths), 3)
        self.assertEqual(len(preprojective_basis(dynkin_quiver('A3'), '2').paths), 4)

    def test_middle_vertex_paths(self):
        basis = preprojective_basis(dynkin_quiver('A3'), '2')
        ends = sorted((length, end) for _, end, length in basis.paths)
        self.assertEqual(ends, [(0, '2'), (1, '1'), (1, '3'), (2, '2')])
        self.assertEqual(basis.text(0), 'e2')

    def test_unsupported_types(self):
        with self.assertRaises(GrassmannianError):
            preprojective_basis(dynkin_quiver('A4'), '1')
        with self.assertRaises(GrassmannianError):
            build_injective(dynkin_quiver('D4'), '2', 0, 1)
        with self.assertRaises(GrassmannianError):
            build_injective(dynkin_quiver('A2'), '1', 0, 0)


class InjectiveModuleTests(SimpleTestCase):

    def test_a1_chain(self):
        module = build_injective(dynkin_quiver('A1'), '1', 0, 3)
        self.assertEqual(len(module), 3)
        self.assertEqual(module.degrees, [3, 1, -1])
        self.assertEqual(module.metadata['shift'], -3)

    def test_relations_hold(self):
        for type_name, i, l in (('A1', '1', 2), ('A2', '1', 2), ('A3', '2', 1), ('A3', '1', 2)):
            quiver = dynkin_quiver(type_name)
            flags = build_injective(quiver, i, 0, l).relation_flags(quiver)
            self.assertTrue(all(flags.values()), (type_name, i, l, flags))
            self.assertIn('preprojective', flags)

    def test_socle_is_simple(self):
        for type_name, i, k, l in (('A1', '1', 0, 2), ('A2', '1', 0, 1), ('A3', '2', 1, 1), ('A3', '1', 0, 2)):
            module = build_injective(dynkin_quiver(type_name), i, k, l)
            self.assertEqual(module.socle(), DimVec.delta(i, k + l), (type_name, i, k, l))

    def test_dict_round_trip(self):
        module = build_injective(dynkin_quiver('A3'), '2', 0, 1)
        loaded = GradedModule.from_dict(module.to_dict())
        self.assertEqual(loaded.degrees, module.degrees)
        self.assertEqual(loaded.generator_degrees[EPS], 2)
        self.assertEqual(len(all_graded_submodules(loaded)), 6)

    def test_malformed_description(self):
        with self.assertRaises(GrassmannianError):
            GradedModule.from_dict({'basis': []})
        with self.assertRaises(GrassmannianError):
            GradedModule.from_dict({
                'basis': [{'label': 'a', 'vertex': '1', 'degree': 0}],
                'arrows': {EPS: [['0', '0']]},
            })


class SubmoduleEnumerationTests(SimpleTestCase):

    def test_a1_counts(self):
        for l in range(1, 5):
            module = build_injective(dynkin_quiver('A1'), '1', 0, l)
            certificates = all_graded_submodules(module)
            self.assertEqual(len(certificates), l + 1)
            self.assertEqual([cert.dimvec.total() for cert in certificates], list(range(l + 1)))

    def test_fundamental_counts(self):
        for type_name, i, expected in (('A2', '1', 3), ('A2', '2', 3), ('A3', '1', 4), ('A3', '2', 6)):
            module = build_injective(dynkin_quiver(type_name), i, 0, 1)
            self.assertEqual(len(all_graded_submodules(module)), expected, (type_name, i))

    def test_nonzero_submodules_contain_socle(self):
        module = build_injective(dynkin_quiver('A3'), '2', 0, 1)
        for cert in all_graded_submodules(module):
            self.assertTrue(all(cert.flags.values()))
            if not cert.dimvec.is_zero():
                self.assertEqual(cert.dimvec.get(('2', 1)), 1)

    def test_enumerate_by_dimension_vector(self):
        module = build_injective(dynkin_quiver('A2'), '1', 0, 1)
        socle_only = enumerate_graded_submodules(module, DimVec.delta('1', 1))
        self.assertEqual(len(socle_only), 1)
        self.assertEqual(socle_only[0].basis, ('(e1,0)*',))
        empty = enumerate_graded_submodules(module, DimVec.zero(SUPPORT_IXZ))
        self.assertEqual(len(empty), 1)
        self.assertEqual(enumerate_graded_submodules(module, DimVec.delta('2', 0)), [])

    def test_threads_do_not_change_result(self):
        module = build_injective(dynkin_quiver('A3'), '2', 0, 1)
        serial = [cert.to_dict() for cert in all_graded_submodules(module)]
        parallel = [cert.to_dict() for cert in all_graded_submodules(module, threads=3)]
        self.assertEqual(serial, parallel)

    def test_rejects_repeated_weights(self):
        module = GradedModule.from_dict({
            'basis': [{'label': 'a', 'vertex': '1', 'degree': 0}, {'label': 'b', 'vertex': '1', 'degree': 0}],
            'arrows': {EPS: [['0', '0'], ['0', '0']]},
        })
        with self.assertRaises(GrassmannianError):
            all_graded_submodules(module)

    def test_rejects_non_monomial_action(self):
        module = GradedModule.from_dict({
            'basis': [{'label': 'a', 'vertex': '1', 'degree': 0},
                      {'label': 'b', 'vertex': '1', 'degree': 2},
                      {'label': 'c', 'vertex': '1', 'degree': 4}],
            'arrows': {EPS: [['0', '0', '0'], ['1', '0', '0'], ['1', '0', '0']]},
        })
        with self.assertRaises(GrassmannianError):
            all_graded_submodules(module)


class EulerCharacteristicTests(SimpleTestCase):

    def test_matches_kr_dimension(self):
        cases = [('A1', '1', 1), ('A1', '1', 2), ('A1', '1', 3), ('A2', '1', 1), ('A3', '1', 1), ('A3', '2', 1)]
        for type_name, i, l in cases:
            result = euler_vs_kr(dynkin_quiver(type_name), i, 0, l)
            self.assertTrue(result['passed'], (type_name, i, l, result))
            self.assertEqual(result['grassmannian_count'], result['kr_dim'])
            self.assertTrue(all(row['submodules'] == 1 and row['fm_mult'] == 1 for row in result['per_v']))

    def test_per_v_for_a1(self):
        result = euler_vs_kr(dynkin_quiver('A1'), '1', 0, 2)
        self.assertEqual([row['v'] for row in result['per_v']], [{}, {'1,2': 1}, {'1,0': 1, '1,2': 1}])
