from collections.abc import Callable, Iterable, Sequence
from multiprocessing import Pool
from typing import TypeVar

from tqdm import tqdm

from formalia.utils.settings import get_runtime_settings

Item = TypeVar("Item")
Result = TypeVar("Result")


def resolve_workers(workers: int | None) -> int:
    """
    Worker count to use: the explicit value, or `Runtime.Threads` of the settings.

    Parameters:
        workers (int | None): Requested worker count.

    Returns:
        int: A worker count of at least 1.
    """

    if workers is None:
        workers = get_runtime_settings().Threads

    return max(1, int(workers))


def ordered_map(
    function: Callable[[Item], Result],
    items: Sequence[Item] | Iterable[Item],
    workers: int | None = None,
    chunk_size: int | None = None,
    description: str | None = None,
) -> list[Result]:
    """
    Apply a pure function to every item, optionally across worker processes. The
    result list is always in input order, whatever the worker count.

    Parameters:
        function (Callable): A picklable function of one argument.
        items (Sequence | Iterable): The inputs.
        workers (int | None, optional): Worker processes; `Runtime.Threads` when None.
        chunk_size (int | None, optional): Inputs sent to a worker at a time;
            `Runtime.ChunkSize` when None.
        description (str | None, optional): Label of the progress bar.

    Returns:
        list: `[function(item) for item in items]`.
    """

    runtime = get_runtime_settings()
    workers = resolve_workers(workers)
    chunk_size = max(1, chunk_size or runtime.ChunkSize)
    items = list(items)

    progress = dict(
        total=len(items),
        desc=description,
        disable=not runtime.Progress,
    )

    if workers == 1 or len(items) <= chunk_size:
        return [function(item) for item in tqdm(items, **progress)]

    with Pool(processes=workers) as pool:
        return list(
            tqdm(
                pool.imap(function, items, chunksize=chunk_size),
                **progress,
            )
        )
