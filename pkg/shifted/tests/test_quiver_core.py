import json
import os
import random
import tempfile

from django.test import SimpleTestCase

from shifted.exceptions import QuiverError
from shifted.quiver_core import (
    SUPPORT_I, SUPPORT_IXZ, DimVec, cartan_apply, cartan_minors, derive_quiver, dynkin_quiver,
    hall_pairing, hall_sign, is_l_dominant, is_positive_definite, jordan_quiver, load_quiver,
    quiver_from_dict, quiver_from_type, quiver_to_dict,
)


class DynkinDataTests(SimpleTestCase):

    def test_a3_cartan_matrix(self):
        quiver = dynkin_quiver('A3')
        self.assertEqual(quiver.cartan, ((2, -1, 0), (-1, 2, -1), (0, -1, 2)))
        self.assertEqual(quiver.neighbors('2'), ['1', '3'])
        self.assertEqual(quiver.orientation()[('2', '1')], 1)
        self.assertEqual(quiver.orientation()[('1', '2')], -1)

    def test_jordan_quiver(self):
        quiver = quiver_from_type('Jordan')
        self.assertEqual(quiver, jordan_quiver())
        self.assertEqual(quiver.c('1', '1'), 0)
        self.assertFalse(quiver.is_dynkin())

    def test_d4_has_central_vertex(self):
        quiver = dynkin_quiver('D4')
        self.assertEqual(sorted(quiver.neighbors('2')), ['1', '3', '4'])
        self.assertEqual(quiver.neighbors('1'), ['2'])

    def test_unsupported_type(self):
        with self.assertRaises(QuiverError):
            dynkin_quiver('E9')

    def test_positive_definiteness(self):
        self.assertEqual(cartan_minors(dynkin_quiver('A3')), [2, 3, 4])
        self.assertTrue(is_positive_definite(dynkin_quiver('D4')))
        self.assertFalse(is_positive_definite(jordan_quiver()))


class DerivedQuiverTests(SimpleTestCase):

    def test_arrow_counts(self):
        base = dynkin_quiver('A2')
        expected = {
            'double': (2, 2),
            'triple': (2, 4),
            'framed': (4, 3),
            'framed_double': (4, 6),
            'framed_triple': (4, 8),
            'simply_framed_triple': (4, 6),
        }
        for kind, (vertices, arrows) in expected.items():
            derived = derive_quiver(base, kind)
            self.assertEqual((len(derived.vertices), len(derived.arrows)), (vertices, arrows), kind)
            self.assertEqual(derived.cartan, base.cartan)

    def test_double_has_starred_arrows(self):
        labels = [a.label for a in derive_quiver(dynkin_quiver('A2'), 'double').arrows]
        self.assertEqual(labels, ['alpha1', 'alpha1*'])

    def test_graded_quiver(self):
        triple = derive_quiver(dynkin_quiver('A1'), 'triple')
        graded = derive_quiver(triple, 'graded', window=(0, 2))
        self.assertEqual(graded.kind, 'graded_triple')
        self.assertEqual(len(graded.vertices), 3)
        self.assertEqual([a.label for a in graded.arrows], ['eps1@0'])

        doubled = derive_quiver(derive_quiver(dynkin_quiver('A2'), 'double'), 'graded', window=(0, 1))
        self.assertEqual({(a.source, a.target) for a in doubled.arrows},
                         {(('2', 1), ('1', 0)), (('1', 1), ('2', 0))})

    def test_construction_errors(self):
        double = derive_quiver(dynkin_quiver('A2'), 'double')
        with self.assertRaises(QuiverError):
            derive_quiver(double, 'triple')
        with self.assertRaises(QuiverError):
            derive_quiver(dynkin_quiver('A2'), 'graded')
        with self.assertRaises(QuiverError):
            derive_quiver(dynkin_quiver('A2'), 'quadruple')


class DimVecTests(SimpleTestCase):

    def test_from_mapping(self):
        v = DimVec.from_mapping({'1': 1, '2': 0})
        self.assertEqual(v.support, SUPPORT_I)
        self.assertEqual(v.to_json(), {'1': 1})
        graded = DimVec.from_mapping({('1', 0): 2})
        self.assertEqual(graded.support, SUPPORT_IXZ)
        self.assertEqual(DimVec.from_json(graded.to_json()), graded)
        with self.assertRaises(QuiverError):
            DimVec.from_mapping({'1': 1, ('1', 0): 1})

    def test_arithmetic(self):
        a = DimVec.from_mapping({'1': 2, '2': 1})
        b = DimVec.delta('1')
        self.assertEqual((a - b).to_json(), {'1': 1, '2': 1})
        self.assertTrue(b <= a)
        self.assertTrue((b - b).is_zero())
        with self.assertRaises(QuiverError):
            a + DimVec.delta('1', 0)

    def test_cartan_apply_ungraded(self):
        quiver = dynkin_quiver('A2')
        result = cartan_apply(quiver, DimVec.delta('1'), DimVec.delta('1'))
        self.assertEqual(result.to_json(), {'1': -1, '2': 1})
        self.assertFalse(is_l_dominant(result))

    def test_cartan_apply_graded(self):
        quiver = dynkin_quiver('A2')
        result = cartan_apply(quiver, DimVec.delta('1', 0), DimVec.zero(SUPPORT_IXZ))
        self.assertEqual(result.to_json(), {'1,-1': -1, '1,1': -1, '2,0': 1})

    def test_hall_pairing(self):
        quiver = dynkin_quiver('A2')
        self.assertEqual(hall_pairing(quiver, DimVec.delta('2'), DimVec.delta('1')), 1)
        self.assertEqual(hall_pairing(quiver, DimVec.delta('1'), DimVec.delta('2')), 0)
        self.assertEqual(hall_sign(quiver, DimVec.delta('2'), DimVec.delta('1')), -1)

    def test_cartan_apply_is_linear(self):
        rng = random.Random(7)
        for quiver in (dynkin_quiver('A3'), dynkin_quiver('D4'), jordan_quiver()):
            labels = quiver.cartan_vertices
            for support in (SUPPORT_I, SUPPORT_IXZ):
                def random_vec():
                    if support == SUPPORT_I:
                        return DimVec.from_mapping({i: rng.randint(-3, 3) for i in labels}, support)
                    return DimVec.from_mapping(
                        {(rng.choice(labels), rng.randint(-2, 2)): rng.randint(-3, 3) for _ in range(4)}, support)

                for _ in range(25):
                    v1, v2, w1, w2 = random_vec(), random_vec(), random_vec(), random_vec()
                    a, b = rng.randint(-3, 3), rng.randint(-3, 3)
                    combined = cartan_apply(quiver, a * v1 + b * v2, a * w1 + b * w2)
                    self.assertEqual(combined, a * cartan_apply(quiver, v1, w1) + b * cartan_apply(quiver, v2, w2))

    def test_hall_pairing_is_bilinear(self):
        rng = random.Random(11)
        for quiver in (dynkin_quiver('A3'), dynkin_quiver('D4'), jordan_quiver()):
            def random_vec():
                return DimVec.from_mapping({i: rng.randint(-3, 3) for i in quiver.cartan_vertices}, SUPPORT_I)

            for _ in range(50):
                u, v, w = random_vec(), random_vec(), random_vec()
                a, b = rng.randint(-3, 3), rng.randint(-3, 3)
                self.assertEqual(hall_pairing(quiver, a * u + b * v, w),
                                 a * hall_pairing(quiver, u, w) + b * hall_pairing(quiver, v, w))
                self.assertEqual(hall_pairing(quiver, w, a * u + b * v),
                                 a * hall_pairing(quiver, w, u) + b * hall_pairing(quiver, w, v))


class QuiverFileTests(SimpleTestCase):

    def test_dict_round_trip(self):
        quiver = dynkin_quiver('A3')
        self.assertEqual(quiver_from_dict(quiver_to_dict(quiver)), quiver)

    def test_rejects_bad_descriptions(self):
        with self.assertRaises(QuiverError):
            quiver_from_dict({'type': 'custom', 'vertices': ['1'], 'arrows': [['1', '2', 'a']]})
        with self.assertRaises(QuiverError):
            quiver_from_dict({
                'type': 'custom', 'vertices': ['1', '2'], 'arrows': [['2', '1', 'a']],
                'cartan': [[2, -1], [0, 2]],
            })

    def test_load_quiver(self):
        with tempfile.TemporaryDirectory() as tmp:
            good = os.path.join(tmp, 'a2.json')
            with open(good, 'w', encoding='utf-8') as handle:
                json.dump(quiver_to_dict(dynkin_quiver('A2')), handle)
            self.assertEqual(load_quiver(good).rank(), 2)

            bad = os.path.join(tmp, 'broken.json')
            with open(bad, 'w', encoding='utf-8') as handle:
                handle.write('{"type": ')
            with self.assertRaises(QuiverError):
                load_quiver(bad)
