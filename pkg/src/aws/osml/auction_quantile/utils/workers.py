#  Copyright 2024 Amazon.com, Inc. or its affiliates.

import contextvars
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar, Union

T = TypeVar("T")
R = TypeVar("R")


def _guarded(fn: Callable[[T], R]) -> Callable[[T], Union[R, Exception]]:
    def call(item: T) -> Union[R, Exception]:
        try:
            return fn(item)
        except Exception as error:
            return error

    return call


def map_ordered(fn: Callable[[T], R], items: Iterable[T], max_workers: int = 1) -> List[Union[R, Exception]]:
    """
    Apply a function to independent work items on a pool of worker threads. Results come back in input order and
    a failing item yields its exception object instead of stopping the batch, so the caller decides how many
    failures it tolerates.

    :param fn: The task to run for each item.
    :param items: The work items.
    :param max_workers: The maximum number of concurrent workers.

    :return: One result or exception per item, in input order.
    """
    task = _guarded(fn)
    items = list(items)
    if max_workers <= 1 or len(items) <= 1:
        return [task(item) for item in items]
    # each task runs in a copy of the caller's logging context
    context = contextvars.copy_context()
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        return list(executor.map(lambda item: context.copy().run(task, item), items))
