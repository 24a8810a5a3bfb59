#  Copyright 2024 Amazon.com, Inc. or its affiliates.

import os
import tempfile
import unittest
from unittest.mock import patch


class TestRunConfig(unittest.TestCase):
    def test_defaults(self):
        from aws.osml.auction_quantile.utils import RunConfig

        config = RunConfig.from_sources({"subcommand": "estimate"})

        self.assertEqual(config.subcommand, "estimate")
        self.assertEqual(config.B, 10000)
        self.assertEqual(config.epsilon, 0.1)
        self.assertEqual(config.min_cell, 30)
        self.assertEqual(config.rw_min_cell, 100)
        self.assertEqual(config.revenue_grid_size, 981)
        self.assertFalse(config.bootstrap)

    @patch.dict(os.environ, {"AUCTION_THREADS": "3", "AUCTION_BOOTSTRAP_MAX_FAILURE": "0.2"})
    def test_environment_layer(self):
        from aws.osml.auction_quantile.utils import RunConfig, ServiceConfig

        self.assertEqual(ServiceConfig().threads, 3)
        config = RunConfig.from_sources({"subcommand": "test-rw"})
        self.assertEqual(config.threads, 3)
        self.assertEqual(config.max_failure_rate, 0.2)

    def test_file_then_flags(self):
        from aws.osml.auction_quantile.utils import RunConfig

        with tempfile.TemporaryDirectory() as config_dir:
            path = os.path.join(config_dir, "run.cfg")
            with open(path, "w", encoding="utf-8") as config_file:
                config_file.write("# misspecification run\n\nrows = table2\nseed = 11\nmatch-type-counts = true\n")
            config = RunConfig.from_sources({"subcommand": "misspec", "seed": 5, "rows": None}, path)

        self.assertEqual(config.rows, "table2")
        self.assertEqual(config.seed, 5)
        self.assertTrue(config.match_type_counts)
        self.assertEqual(config.config_path, path)

    def test_unknown_key(self):
        from aws.osml.auction_quantile.errors import ConfigError
        from aws.osml.auction_quantile.utils import RunConfig

        with self.assertRaises(ConfigError) as context:
            RunConfig.from_sources({"subcommand": "mc", "replicas": 3})
        self.assertIn("replicas", str(context.exception))

    def test_range_checks(self):
        from aws.osml.auction_quantile.errors import ConfigError
        from aws.osml.auction_quantile.utils import RunConfig

        for overrides in (
            {"epsilon": 0.5},
            {"n_bidders": 1},
            {"B": 0},
            {"variant": "quadratic"},
            {"max_failure_rate": 1.0},
            {"tau_grid": "0.5,0.2"},
            {"seed": "abc"},
        ):
            with self.subTest(overrides=overrides):
                with self.assertRaises(ConfigError):
                    RunConfig.from_sources({"subcommand": "estimate", **overrides})

    def test_malformed_config_file(self):
        from aws.osml.auction_quantile.errors import ConfigError
        from aws.osml.auction_quantile.utils import read_config_file

        with tempfile.TemporaryDirectory() as config_dir:
            path = os.path.join(config_dir, "bad.cfg")
            with open(path, "w", encoding="utf-8") as config_file:
                config_file.write("seed 4\n")
            with self.assertRaises(ConfigError) as context:
                read_config_file(path)
        self.assertIn(":1:", str(context.exception))

        with self.assertRaises(ConfigError):
            read_config_file(os.path.join(config_dir, "missing.cfg"))

    def test_as_metadata(self):
        from aws.osml.auction_quantile.utils import RunConfig

        metadata = RunConfig.from_sources({"subcommand": "simulate", "seed": 2}).as_metadata()

        self.assertEqual(metadata["seed"], 2)
        self.assertEqual(metadata["subcommand"], "simulate")


class TestParsers(unittest.TestCase):
    def test_parse_tau_grid_range(self):
        from aws.osml.auction_quantile.utils import parse_tau_grid

        grid = parse_tau_grid("1..99/100")

        self.assertEqual(grid.size, 99)
        self.assertAlmostEqual(grid[0], 0.01)
        self.assertAlmostEqual(grid[-1], 0.99)

    def test_parse_tau_grid_list(self):
        from aws.osml.auction_quantile.utils import parse_tau_grid

        self.assertEqual(parse_tau_grid("0.1, 0.5,0.9").tolist(), [0.1, 0.5, 0.9])

    def test_parse_tau_grid_rejects_edges(self):
        from aws.osml.auction_quantile.errors import ConfigError
        from aws.osml.auction_quantile.utils import parse_tau_grid

        for text in ("0..10/10", "0.5,1.0", "", "a,b"):
            with self.subTest(text=text):
                with self.assertRaises(ConfigError):
                    parse_tau_grid(text)

    def test_parse_counts(self):
        from aws.osml.auction_quantile.errors import ConfigError
        from aws.osml.auction_quantile.utils import parse_counts

        self.assertEqual(list(parse_counts("mill=2, logger=1").items()), [("mill", 2), ("logger", 1)])
        with self.assertRaises(ConfigError):
            parse_counts("mill:2")
        with self.assertRaises(ConfigError):
            parse_counts("mill=-1")

    def test_parse_float_list(self):
        from aws.osml.auction_quantile.errors import ConfigError
        from aws.osml.auction_quantile.utils import parse_float_list

        self.assertEqual(parse_float_list("2.0,1.5"), [2.0, 1.5])
        with self.assertRaises(ConfigError):
            parse_float_list("2.0,x")


if __name__ == "__main__":
    unittest.main()
