#  Copyright 2023-2024 Amazon.com, Inc. or its affiliates.

import json
import unittest


class TestProcessorBase(unittest.TestCase):
    def test_success_message(self):
        import numpy as np

        from aws.osml.auction_quantile.processor_base import ProcessorBase

        body = {"message": "Estimated 3 parameters", "alpha": np.array([1.0, 0.5])}

        result = ProcessorBase.success_message(body)

        self.assertEqual(result["exitCode"], 0)
        self.assertEqual(json.loads(result["body"]), {"message": "Estimated 3 parameters", "alpha": [1.0, 0.5]})

    def test_failure_message(self):
        from aws.osml.auction_quantile.errors import MultipleWinners
        from aws.osml.auction_quantile.processor_base import ProcessorBase

        try:
            raise MultipleWinners("data.csv row 4: auction 7 has 2 winners")
        except MultipleWinners as err:
            result = ProcessorBase.failure_message(err)

        result_body = json.loads(result["body"])
        self.assertEqual(result["exitCode"], 2)
        self.assertEqual(result_body["message"], "data.csv row 4: auction 7 has 2 winners")
        self.assertEqual(result_body["error"], "MultipleWinners")
        self.assertIsInstance(result_body["stack_trace"], list)
        self.assertGreater(len(result_body["stack_trace"]), 0)

    def test_failure_message_outside_the_hierarchy(self):
        from aws.osml.auction_quantile.processor_base import ProcessorBase

        result = ProcessorBase.failure_message(Exception("An error occurred during processing."))

        self.assertEqual(result["exitCode"], 1)

    def test_require(self):
        from aws.osml.auction_quantile.errors import ConfigError
        from aws.osml.auction_quantile.processors import PROCESSORS
        from aws.osml.auction_quantile.utils import RunConfig

        processor = PROCESSORS["estimate"](RunConfig.from_sources({"subcommand": "estimate"}))

        with self.assertRaises(ConfigError) as context:
            processor.require("input_path", "--input")
        self.assertEqual(str(context.exception), "estimate needs --input")


if __name__ == "__main__":
    unittest.main()
