import asyncio
import json
import math
from collections.abc import Callable, Mapping
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any

import numpy as np

_thread_count = 1


def set_thread_count(threads: int):
	global _thread_count  # noqa: PLW0603
	_thread_count = max(1, threads)


def map_node_chunks(
	func: Callable[..., tuple[np.ndarray, ...]], *arrays: np.ndarray, threads: int | None = None
) -> tuple[np.ndarray, ...]:
	"""Splits node-stacked arrays along the first axis, calls func on each chunk in a thread pool, and concatenates the results in order.
	numpy's LAPACK calls release the GIL, so this actually does something for batched eigh."""
	threads = threads or _thread_count
	count = arrays[0].shape[0]
	if threads <= 1 or count < 2 * threads:
		return func(*arrays)
	bounds = np.linspace(0, count, threads + 1, dtype=int)
	chunks = [tuple(a[start:stop] for a in arrays) for start, stop in zip(bounds[:-1], bounds[1:], strict=True)]
	with ThreadPoolExecutor(threads) as executor:
		results = list(executor.map(lambda chunk: func(*chunk), chunks))
	return tuple(np.concatenate(parts, axis=0) for parts in zip(*results, strict=True))


def extended_real_to_json(value: float) -> float | str:
	"""JSON has no infinities, so ±∞ are written as strings"""
	if math.isinf(value):
		return 'inf' if value > 0 else '-inf'
	if math.isnan(value):
		return 'nan'
	return value


def to_jsonable(value: Any) -> Any:
	"""Turns numpy scalars/arrays, tuples and infinities into something json.dumps will write the same way every time"""
	if isinstance(value, Mapping):
		return {str(k): to_jsonable(v) for k, v in value.items()}
	if isinstance(value, np.ndarray):
		return to_jsonable(value.tolist())
	if isinstance(value, (np.floating, float)):
		return extended_real_to_json(float(value))
	if isinstance(value, (np.integer,)):
		return int(value)
	if isinstance(value, (np.bool_,)):
		return bool(value)
	if isinstance(value, Path):
		return str(value)
	if isinstance(value, (list, tuple)):
		return [to_jsonable(v) for v in value]
	return value


def dump_json(value: Any) -> str:
	return json.dumps(to_jsonable(value), indent='\t', ensure_ascii=False) + '\n'


def _write_text_sync(path: Path, text: str):
	path.parent.mkdir(parents=True, exist_ok=True)
	path.write_text(text, encoding='utf-8', newline='')


async def write_text_async(path: Path, text: str):
	await asyncio.to_thread(_write_text_sync, path, text)