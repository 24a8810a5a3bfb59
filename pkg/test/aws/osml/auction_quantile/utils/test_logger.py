#  Copyright 2024 Amazon.com, Inc. or its affiliates.

import logging
import unittest
from unittest.mock import patch


class TestAuctionLogger(unittest.TestCase):
    @patch("logging.Logger.hasHandlers", return_value=False)
    @patch("logging.basicConfig")
    def test_logger_no_handlers(self, mock_basic_config, mock_has_handlers):
        """
        Test that basicConfig is called if no handlers are present on the root logger.
        """
        from aws.osml.auction_quantile.utils.logger import get_logger

        logger = get_logger("test_logger", logging.DEBUG)

        mock_basic_config.assert_called_once_with(level=logging.DEBUG)
        self.assertEqual(logger.name, "test_logger")

    @patch("logging.Logger.hasHandlers", return_value=True)
    @patch("logging.basicConfig")
    def test_logger_with_handlers(self, mock_basic_config, mock_has_handlers):
        from aws.osml.auction_quantile.utils.logger import get_logger

        logger = get_logger("test_logger", logging.DEBUG)

        mock_basic_config.assert_not_called()
        self.assertEqual(logger.name, "test_logger")

    def test_configure_logger(self):
        """
        Test the configure_logger function with the run context fields.
        """
        from pythonjsonlogger.jsonlogger import JsonFormatter

        from aws.osml.auction_quantile.utils.logger import AsyncContextFilter, configure_logger

        logger = logging.getLogger("test_configure_logger")
        formatter = JsonFormatter(fmt="%(asctime)s %(levelname)s %(run_id)s %(message)s")
        filter = AsyncContextFilter(attribute_names=["run_id"])

        configured_logger = configure_logger(logger, logging.INFO, log_formatter=formatter, log_filter=filter)

        stream_handlers = [h for h in configured_logger.handlers if isinstance(h, logging.StreamHandler)]
        self.assertTrue(stream_handlers)
        for handler in stream_handlers:
            self.assertEqual(handler.formatter, formatter)
        self.assertIn(filter, configured_logger.filters)
        self.assertFalse(configured_logger.propagate)

    def test_async_context_filter(self):
        from aws.osml.auction_quantile.utils.logger import _LOG_CONTEXT, AsyncContextFilter

        filter = AsyncContextFilter(attribute_names=["run_id", "subcommand"])
        record = logging.LogRecord(
            name="test", level=logging.INFO, pathname=__file__, lineno=0, msg="Test message", args=(), exc_info=None
        )
        _LOG_CONTEXT.set({"run_id": "estimate-7", "subcommand": "estimate"})

        self.assertTrue(filter.filter(record))
        self.assertEqual(record.run_id, "estimate-7")
        self.assertEqual(record.subcommand, "estimate")

        _LOG_CONTEXT.set({})
        self.assertTrue(filter.filter(record))
        self.assertIsNone(record.run_id)

    def test_set_context(self):
        from aws.osml.auction_quantile.utils.logger import _LOG_CONTEXT, AsyncContextFilter

        AsyncContextFilter.set_context({"run_id": "mc-1"})
        self.assertEqual(_LOG_CONTEXT.get(), {"run_id": "mc-1"})

        AsyncContextFilter.set_context(None)
        self.assertEqual(_LOG_CONTEXT.get(), {})

    def test_set_log_level(self):
        from aws.osml.auction_quantile.utils.logger import logger, set_log_level

        original = logger.level
        try:
            set_log_level("debug")
            self.assertEqual(logger.level, logging.DEBUG)
        finally:
            logger.setLevel(original)

    def test_json_output_carries_run_context(self):
        import io
        import json

        from aws.osml.auction_quantile.utils.logger import AsyncContextFilter, filter, formatter

        stream = io.StringIO()
        handler = logging.StreamHandler(stream)
        handler.setFormatter(formatter)
        logger = logging.getLogger("test_json_output")
        logger.addHandler(handler)
        logger.addFilter(filter)
        logger.propagate = False
        logger.setLevel(logging.INFO)

        AsyncContextFilter.set_context({"run_id": "simulate-3", "subcommand": "simulate"})
        try:
            logger.info("Wrote data.csv")
        finally:
            AsyncContextFilter.set_context(None)
            logger.removeHandler(handler)

        entry = json.loads(stream.getvalue())
        self.assertEqual(entry["run_id"], "simulate-3")
        self.assertEqual(entry["subcommand"], "simulate")
        self.assertEqual(entry["message"], "Wrote data.csv")


if __name__ == "__main__":
    unittest.main()
