#  Copyright 2024 Amazon.com, Inc. or its affiliates.

import unittest


def _square_or_fail(item: int) -> int:
    if item == 3:
        raise ValueError("three")
    return item * item


class TestMapOrdered(unittest.TestCase):
    def test_results_keep_input_order(self):
        from aws.osml.auction_quantile.utils import map_ordered

        for workers in (1, 4):
            results = map_ordered(_square_or_fail, [0, 1, 2, 4, 5], max_workers=workers)
            self.assertEqual(results, [0, 1, 4, 16, 25])

    def test_failures_come_back_as_exceptions(self):
        from aws.osml.auction_quantile.utils import map_ordered

        results = map_ordered(_square_or_fail, range(5), max_workers=3)

        self.assertEqual(results[:3], [0, 1, 4])
        self.assertIsInstance(results[3], ValueError)
        self.assertEqual(results[4], 16)

    def test_workers_see_the_logging_context(self):
        from aws.osml.auction_quantile.utils import AsyncContextFilter, map_ordered
        from aws.osml.auction_quantile.utils.logger import _LOG_CONTEXT

        AsyncContextFilter.set_context({"run_id": "test-rw-9"})
        try:
            results = map_ordered(lambda _: _LOG_CONTEXT.get().get("run_id"), range(6), max_workers=3)
        finally:
            AsyncContextFilter.set_context(None)

        self.assertEqual(results, ["test-rw-9"] * 6)

    def test_empty_input(self):
        from aws.osml.auction_quantile.utils import map_ordered

        self.assertEqual(map_ordered(_square_or_fail, [], max_workers=4), [])


if __name__ == "__main__":
    unittest.main()
