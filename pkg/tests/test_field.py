from structcode.field import (
    DimensionMismatch,
    EntryOutOfRange,
    FieldMatrix,
    ModulusMismatch,
    NoInverse,
    NotPrimeModulus,
    PrimeModulus,
    ResidueScalar,
    UnsupportedModulus,
    all_matrices,
    all_pairs,
    mat_add,
    mat_mul,
    rank,
    residue_add,
    scalar_inverse,
    symmetrize,
)

import itertools
import unittest

import numpy as np


class PrimeModulusTests(unittest.TestCase):
    def test_accepts_primes(self):
        for q in [2, 3, 5, 7, 11, 65521]:
            self.assertEqual(q, int(PrimeModulus(q)))

    def test_rejects_non_primes(self):
        for q in [0, 1, 4, 9, 15, 65535]:
            self.assertRaises(NotPrimeModulus, lambda: PrimeModulus(q))

    def test_is_odd(self):
        self.assertFalse(PrimeModulus(2).is_odd())
        self.assertTrue(PrimeModulus(3).is_odd())


class ScalarInverseTests(unittest.TestCase):
    def test_every_nonzero_element_of_small_fields(self):
        for q in [2, 3, 5, 7, 13]:
            for x in range(1, q):
                self.assertEqual(1, (x * scalar_inverse(x, q)) % q)

    def test_inverse_of_two(self):
        self.assertEqual(2, scalar_inverse(2, 3))
        self.assertEqual(3, scalar_inverse(2, 5))

    def test_zero_has_no_inverse(self):
        self.assertRaises(NoInverse, lambda: scalar_inverse(0, 5))
        self.assertRaises(NoInverse, lambda: scalar_inverse(10, 5))


class FieldMatrixTests(unittest.TestCase):
    def test_entries_must_be_canonical(self):
        self.assertRaises(EntryOutOfRange, lambda: FieldMatrix([[0, 3]], 3))
        self.assertRaises(EntryOutOfRange, lambda: FieldMatrix([[-1]], 5))

    def test_reduce(self):
        self.assertEqual(FieldMatrix([[2, 0], [1, 2]], 3), FieldMatrix.reduce([[-1, 3], [7, 5]], 3))

    def test_entries_are_read_only(self):
        x = FieldMatrix([[1, 2]], 3)

        with self.assertRaises(ValueError):
            x.entries[0, 0] = 0

    def test_add_and_sub(self):
        x = FieldMatrix([[1, 2], [0, 1]], 3)
        y = FieldMatrix([[2, 2], [1, 0]], 3)

        self.assertEqual(FieldMatrix([[0, 1], [1, 1]], 3), x + y)
        self.assertEqual(FieldMatrix([[2, 0], [2, 1]], 3), x - y)
        self.assertEqual(FieldMatrix.zeros(2, 2, 3), x - x)
        self.assertEqual(x + y, mat_add(x, y))

    def test_matmul(self):
        a = FieldMatrix([[1, 2], [3, 4]], 5)
        b = FieldMatrix([[4, 0], [1, 1]], 5)

        self.assertEqual(FieldMatrix([[1, 2], [1, 4]], 5), a @ b)
        self.assertEqual(a, mat_mul(a, FieldMatrix.identity(2, 5)))

    def test_transpose_and_item(self):
        x = FieldMatrix.column([1, 0, 2], 3)

        self.assertEqual((3, 1), x.shape)
        self.assertEqual((1, 3), x.T.shape)
        self.assertEqual(2, (x.T @ x).item())

    def test_mismatches(self):
        self.assertRaises(ModulusMismatch, lambda: FieldMatrix([[1]], 3) + FieldMatrix([[1]], 5))
        self.assertRaises(
            DimensionMismatch, lambda: FieldMatrix([[1, 1]], 3) @ FieldMatrix([[1, 1]], 3)
        )
        self.assertRaises(DimensionMismatch, lambda: FieldMatrix([[1, 1]], 3) + FieldMatrix([[1]], 3))

    def test_vstack(self):
        x = FieldMatrix.vstack(FieldMatrix([[1]], 2), FieldMatrix([[0], [1]], 2))
        self.assertEqual(FieldMatrix([[1], [0], [1]], 2), x)

    def test_equality_and_hash(self):
        self.assertEqual(FieldMatrix([[1, 2]], 3), FieldMatrix([[1, 2]], 3))
        self.assertNotEqual(FieldMatrix([[1, 1]], 3), FieldMatrix([[1, 1]], 5))
        self.assertEqual(1, len({FieldMatrix([[1, 2]], 3), FieldMatrix([[1, 2]], 3)}))


class SymmetrizeTests(unittest.TestCase):
    def test_symmetric_input_is_unchanged(self):
        d = FieldMatrix([[1, 2], [2, 0]], 5)
        self.assertEqual(d, symmetrize(d))

    def test_result_is_symmetric(self):
        for d in all_matrices(2, 2, 3):
            self.assertTrue(symmetrize(FieldMatrix(d, 3)).is_symmetric())

    def test_averages_off_diagonal(self):
        # (1 + 3) / 2 = 2 over F_5.
        self.assertEqual(FieldMatrix([[0, 2], [2, 0]], 5), symmetrize(FieldMatrix([[0, 1], [3, 0]], 5)))

    def test_binary_field_is_rejected(self):
        self.assertRaises(UnsupportedModulus, lambda: symmetrize(FieldMatrix([[1]], 2)))


class ResidueScalarTests(unittest.TestCase):
    def test_wraps(self):
        self.assertEqual(ResidueScalar(1, 4), ResidueScalar(3, 4) + ResidueScalar(2, 4))
        self.assertEqual(ResidueScalar(0, 7), residue_add(ResidueScalar(6, 7), ResidueScalar(1, 7)))

    def test_modulus_mismatch(self):
        self.assertRaises(ModulusMismatch, lambda: ResidueScalar(1, 4) + ResidueScalar(1, 5))

    def test_range(self):
        self.assertRaises(EntryOutOfRange, lambda: ResidueScalar(4, 4))


class FieldAxiomTests(unittest.TestCase):
    MODULI = [2, 3, 5, 7]

    def test_axioms_over_every_triple(self):
        for q in self.MODULI:
            elements = [FieldMatrix([[x]], q) for x in range(q)]
            zero, one = elements[0], elements[1]

            for x, y, z in itertools.product(elements, repeat=3):
                self.assertEqual(mat_add(mat_add(x, y), z), mat_add(x, mat_add(y, z)))
                self.assertEqual(mat_mul(mat_mul(x, y), z), mat_mul(x, mat_mul(y, z)))
                self.assertEqual(mat_mul(x, mat_add(y, z)), mat_add(mat_mul(x, y), mat_mul(x, z)))

            for x, y in itertools.product(elements, repeat=2):
                self.assertEqual(mat_add(x, y), mat_add(y, x))
                self.assertEqual(mat_mul(x, y), mat_mul(y, x))

            for x in elements:
                self.assertEqual(zero, mat_add(x, -x))
                self.assertEqual(x, mat_add(x, zero))
                self.assertEqual(x, mat_mul(x, one))

                if x != zero:
                    inverse = FieldMatrix([[scalar_inverse(x.item(), q)]], q)
                    self.assertEqual(one, mat_mul(x, inverse))

    def test_transpose_identity(self):
        rng = np.random.default_rng(2024)

        for _ in range(200):
            q = int(rng.choice(self.MODULI))
            rows, left, right = (int(d) for d in rng.integers(1, 6, size=3))
            x = FieldMatrix(rng.integers(0, q, size=(rows, left)), q)
            y = FieldMatrix(rng.integers(0, q, size=(rows, right)), q)

            self.assertEqual(mat_mul(x.T, y), mat_mul(y.T, x).T)


class RankTests(unittest.TestCase):
    def test_identity_and_zero(self):
        self.assertEqual(3, rank(FieldMatrix.identity(3, 5)))
        self.assertEqual(0, rank(FieldMatrix.zeros(2, 3, 5)))

    def test_dependent_rows(self):
        self.assertEqual(1, rank(FieldMatrix([[1, 2], [2, 1]], 3)))
        self.assertEqual(2, rank(FieldMatrix([[1, 2], [2, 1]], 5)))

    def test_binary(self):
        self.assertEqual(2, rank(FieldMatrix([[1, 1, 0], [0, 1, 1], [1, 0, 1]], 2)))


class EnumerationTests(unittest.TestCase):
    def test_all_matrices(self):
        singles = all_matrices(2, 1, 3)

        self.assertEqual((9, 2, 1), singles.shape)
        self.assertEqual(9, len({tuple(m.ravel()) for m in singles}))
        self.assertSequenceEqual([0, 0], singles[0].ravel().tolist())
        self.assertSequenceEqual([0, 1], singles[1].ravel().tolist())

    def test_all_pairs_index_order(self):
        a, b = all_pairs(1, 1, 2)

        self.assertSequenceEqual([0, 0, 1, 1], a.ravel().tolist())
        self.assertSequenceEqual([0, 1, 0, 1], b.ravel().tolist())

    def test_batched_product_matches_field_matrix(self):
        a, b = all_pairs(2, 1, 3)
        products = np.swapaxes(a, -1, -2) @ b % 3

        for i in range(0, len(a), 7):
            expected = FieldMatrix(a[i], 3).T @ FieldMatrix(b[i], 3)
            self.assertEqual(expected.item(), int(products[i, 0, 0]))
