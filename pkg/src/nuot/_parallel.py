"""Order-preserving thread map; the CLI's --threads sets the default budget."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

_THREADS = 1


def set_threads(n: int) -> None:
    global _THREADS
    _THREADS = max(1, int(n))


def get_threads() -> int:
    return _THREADS


def pmap(fn, items, threads: int | None = None) -> list:
    items = list(items)
    t = threads or _THREADS
    if t <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=t) as ex:
        return list(ex.map(fn, items))
