"""Reference factor table test suite"""

import unittest
import sys
import os
import csv
import tempfile
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from dyncred.errors import UnknownTable
from dyncred.tables import TABLES, build_table, resolve_table_ids, write_table

# half a unit in the last printed digit
HALF_3 = 5e-4 + 1e-9
HALF_2 = 5e-3 + 1e-9

POISSON_STD = {
    "1.a": [0.167, 0.809, 3.999, 19.785, 97.894],
    "1.b": [0.000, 0.004, 0.147, 5.114, 248.710],
    "1.c": [1.314, 2.430, 1.238, 0.444, 0.150],
    "2.a": [6.172, 13.578, 31.847, 75.594, 179.815],
    "2.b": [0.005, 0.076, 1.279, 22.016, 488.594],
    "2.c": [45.860, 32.102, 8.530, 1.658, 0.291],
}

POISSON_RAW = {
    "1.a": [0.167, 0.809, 3.999, 19.785, 97.894],
    "1.b": [0.131, 0.438, 1.467, 5.114, 24.871],
    "1.c": [0.131, 2.430, 12.384, 44.442, 149.765],
    "2.a": [6.172, 13.578, 31.847, 75.594, 179.815],
    "2.b": [4.586, 7.646, 12.785, 22.016, 48.859],
    "2.c": [4.586, 32.102, 85.300, 165.793, 291.383],
}

GAMMA = {
    "1.a": ("alpha", [0.134, 0.716, 3.916, 21.429, 117.279]),
    "1.b": ("alpha", [0.134, 0.072, 0.039, 0.021, 0.012]),
    "2.a": ("alpha_star", [0.134, 0.716, 3.916, 21.429, 117.279]),
    "2.b": ("alpha_star", [0.000, 0.001, 0.004, 0.021, 0.117]),
}

TWO_COMPONENT = {
    "I": ([0.046, 0.011, 0.011, 0.042, 0.805], "no"),
    "II": ([0.049, 0.030, 0.050, 0.158, 0.600], "no"),
    "III": ([0.086, 0.093, 0.118, 0.169, 0.260], "yes"),
    "IV": ([0.003, 0.009, 0.034, 0.137, 0.554], "yes"),
}

SEMIPARAMETRIC = {
    3: [0.14, 0.10, 0.29],
    4: [0.11, 0.11, 0.09, 0.28],
    5: [0.05, 0.09, 0.10, 0.09, 0.27],
}


def _row_values(row, prefix):
    return [row[f"{prefix}_{t}"] for t in range(1, 6)]


class TestGoldenTables(unittest.TestCase):
    """Test reproduced factor tables"""

    def test_poisson_standardized(self):
        table = build_table("poisson-std")
        self.assertEqual(table.decimals, 3)
        rows = {r["case"]: r for r in table.rows}
        self.assertEqual(list(rows), list(POISSON_STD))
        for case, expected in POISSON_STD.items():
            np.testing.assert_allclose(_row_values(rows[case], "alpha_star"), expected,
                                       rtol=0, atol=HALF_3, err_msg=case)

    def test_poisson_raw(self):
        rows = {r["case"]: r for r in build_table("poisson-nonstd").rows}
        self.assertEqual(list(rows), list(POISSON_RAW))
        for case, expected in POISSON_RAW.items():
            np.testing.assert_allclose(_row_values(rows[case], "alpha"), expected,
                                       rtol=0, atol=HALF_3, err_msg=case)

    def test_gamma(self):
        table = build_table("gamma-both")
        rows = {r["case"]: r for r in table.rows}
        self.assertEqual(list(rows), list(GAMMA))
        for case, (quantity, expected) in GAMMA.items():
            self.assertEqual(rows[case]["quantity"], quantity)
            self.assertEqual(rows[case]["rho"], 0.3)
            np.testing.assert_allclose(_row_values(rows[case], "f"), expected,
                                       rtol=0, atol=HALF_3, err_msg=case)

    def test_gamma_b_cases_scale_with_lambda(self):
        rows = {r["case"]: r for r in build_table("gamma-both").rows}
        lambdas_b = np.array([0.001, 0.01, 0.1, 1.0, 10.0])
        # same rho and lambdas, so alpha* of 2.b is alpha of 1.b times lambda_t
        np.testing.assert_allclose(_row_values(rows["2.b"], "f"),
                                   np.array(_row_values(rows["1.b"], "f")) * lambdas_b,
                                   rtol=1e-10)

    def test_two_component(self):
        rows = {r["scenario"]: r for r in build_table("two-component").rows}
        self.assertEqual(list(rows), list(TWO_COMPONENT))
        for scenario, (expected, monotone) in TWO_COMPONENT.items():
            np.testing.assert_allclose(_row_values(rows[scenario], "alpha"), expected,
                                       rtol=0, atol=HALF_3, err_msg=scenario)
            self.assertEqual(rows[scenario]["monotone"], monotone)

    def test_semiparametric(self):
        table = build_table("semiparametric")
        self.assertEqual(table.decimals, 2)
        self.assertEqual([row["T"] for row in table.rows], [3, 4, 5])
        for row in table.rows:
            T = row["T"]
            values = [row[f"alpha_{t}"] for t in range(1, T + 1)]
            np.testing.assert_allclose(values, SEMIPARAMETRIC[T], rtol=0, atol=HALF_2)
            self.assertTrue(all(row[f"alpha_{t}"] == "" for t in range(T + 1, 6)))
            self.assertEqual(row["monotone"], "no")

    def test_arma_remark(self):
        row = build_table("arma-remark").rows[0]
        np.testing.assert_allclose(_row_values(row, "alpha"), [0.001, -0.006, 0.028, -0.140, 0.700],
                                   rtol=0, atol=HALF_3)
        self.assertEqual(row["regular"], "no")


class TestTableRegistry(unittest.TestCase):
    """Test table selection and CSV output"""

    def test_resolve(self):
        self.assertEqual(resolve_table_ids(["all"]), list(TABLES))
        self.assertEqual(resolve_table_ids(["gamma-both", "all"])[0], "gamma-both")
        self.assertEqual(len(resolve_table_ids(["all", "gamma-both"])), len(TABLES))
        with self.assertRaises(UnknownTable):
            resolve_table_ids(["table-9"])
        with self.assertRaises(UnknownTable):
            build_table("table-9")

    def test_write_table(self):
        with tempfile.TemporaryDirectory() as directory:
            path = write_table(build_table("poisson-std"), directory)
            self.assertEqual(os.path.basename(path), "poisson-std.csv")
            with open(path, newline='') as f:
                rows = list(csv.reader(f))
        self.assertEqual(rows[0], ["case", "rho", "alpha_star_1", "alpha_star_2",
                                   "alpha_star_3", "alpha_star_4", "alpha_star_5"])
        self.assertEqual(rows[1][:2], ["1.a", "0.300"])
        self.assertEqual(len(rows), 7)
        self.assertTrue(all(len(cell.split(".")[1]) == 3 for cell in rows[1][1:]))

    def test_write_semiparametric(self):
        with tempfile.TemporaryDirectory() as directory:
            with open(write_table(build_table("semiparametric"), directory)) as f:
                lines = f.read().splitlines()
        self.assertEqual(lines[0], "T,alpha_1,alpha_2,alpha_3,alpha_4,alpha_5,monotone")
        self.assertTrue(lines[1].startswith("3,"))
        self.assertTrue(lines[1].endswith(",,,no") or lines[1].endswith(",,,yes"))


if __name__ == '__main__':
    unittest.main()
