from harness.config import (
    ExpectedConfigKeyMissing,
    InvalidConfigValue,
    RunConfig,
    config_keys,
)
from pathlib import Path
import os
import tempfile
import unittest


class RunConfigParsingTests(unittest.TestCase):
    def test_parse_typical_file(self):
        config = RunConfig.load_from_str(
            "# sweep settings\nq = 3\r\n  m\t= 4\n\nmodel=ternary\np_grid = 0.1:0.3:3\nk = 12 14 17\n"
        )

        self.assertEqual(3, config.q)
        self.assertEqual(4, config.m)
        self.assertEqual("ternary", config.model)
        self.assertEqual("0.1:0.3:3", config.p_grid)
        self.assertSequenceEqual([12, 14, 17], config.k)
        self.assertIsNone(config.config_path)

    def test_defaults(self):
        config = RunConfig.load_from_str("")

        self.assertEqual(RunConfig(), config)
        self.assertEqual((2, 2, 1), (config.q, config.m, config.l))
        self.assertSequenceEqual([17], config.k)

    def test_unknown_keys_are_ignored(self):
        self.assertEqual(RunConfig(q=5), RunConfig.load_from_str("q = 5\nsession_id = 1234\n"))

    def test_missing_value(self):
        with self.assertRaises(ExpectedConfigKeyMissing) as context:
            RunConfig.load_from_str("q =\n", config_path="/tmp/run.cfg")

        self.assertEqual("q", context.exception.key)
        self.assertEqual("/tmp/run.cfg", context.exception.config_path)

    def test_invalid_values(self):
        for text in ["q = three", "model = gaussian", "p_grid = 0.0:0.5:3", "k = none", "sweep"]:
            self.assertRaises(InvalidConfigValue, lambda: RunConfig.load_from_str(text))

    def test_load_from_file(self):
        with tempfile.TemporaryDirectory() as tempdir:
            path = Path(tempdir) / "run.cfg"
            path.write_text("scheme = square\nl = 2\n")
            config = RunConfig.load_from_file(str(path))

            self.assertEqual("square", config.scheme)
            self.assertEqual(2, config.l)
            self.assertEqual(os.path.abspath(path), config.config_path)

    def test_config_keys(self):
        keys = config_keys()

        self.assertIn("p_grid", keys)
        self.assertNotIn("subcommand", keys)
        self.assertNotIn("config_path", keys)


class RunConfigTests(unittest.TestCase):
    def test_sweep_prefers_grid(self):
        self.assertSequenceEqual([0.5], RunConfig().sweep([0.5]))
        self.assertSequenceEqual([0.2], RunConfig(p=0.2).sweep([0.5]))
        self.assertEqual(3, len(RunConfig(p=0.2, p_grid="0.1:0.3:3").sweep([0.5])))

    def test_overrides_skip_unset_flags(self):
        config = RunConfig(q=3, m=4).with_overrides(q=5, m=None, scheme="inner")

        self.assertEqual(5, config.q)
        self.assertEqual(4, config.m)
        self.assertEqual("inner", config.scheme)

    def test_require(self):
        self.assertEqual("sym", RunConfig(scheme="sym").require("scheme"))
        self.assertRaises(ExpectedConfigKeyMissing, lambda: RunConfig().require("scheme"))
