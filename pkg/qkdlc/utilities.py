import json
import logging
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, List, Sequence, Union

import numpy as np
import pandas as pd
from django.conf import settings

from .exceptions import DomainError

logger = logging.getLogger(__name__)

# 17 significant digits reproduce every double exactly
FLOAT_FORMAT = '%.17g'


def get_tunable(group: str, key: str, default: Any) -> Any:
    """Read settings.<group>[<key>], falling back to `default` outside Django."""
    if not settings.configured:
        return default
    return getattr(settings, group, {}).get(key, default)


def worker_count() -> int:
    """Worker cap for parallel sweeps (QKDLC_THREADS)."""
    if not settings.configured:
        return 1
    return max(1, int(getattr(settings, 'QKDLC_THREADS', 1)))


def parallel_map(func: Callable, items: Sequence) -> List:
    """Map `func` over `items` on up to worker_count() threads, preserving order."""
    workers = min(worker_count(), max(len(items), 1))
    if workers == 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))


def parse_range(text: Union[str, float, int]) -> List[float]:
    """
    Parse `lo:hi:step` (inclusive of hi) or a single value into a list of floats.

    Examples:
    - '50:250:50' -> [50.0, 100.0, 150.0, 200.0, 250.0]
    - '200' -> [200.0]
    """
    if isinstance(text, (int, float)):
        return [float(text)]
    parts = str(text).strip().split(':')
    try:
        values = [float(part) for part in parts]
    except ValueError:
        raise DomainError(f'Invalid range "{text}": expected lo:hi:step or a number')

    if len(values) == 1:
        return values
    if len(values) != 3:
        raise DomainError(f'Invalid range "{text}": expected lo:hi:step')

    lo, hi, step = values
    if step <= 0 or hi < lo:
        raise DomainError(f'Invalid range "{text}": need lo <= hi and step > 0')
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [float(v) for v in np.round(lo + step * np.arange(count), 12)]


def atomic_write(path: Union[str, Path], text: str):
    """Write text to a temporary sibling file, then rename it over `path`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, temp_name = tempfile.mkstemp(prefix=f'.{path.name}.', dir=path.parent)
    try:
        with os.fdopen(fd, 'w', newline='') as handle:
            handle.write(text)
        os.replace(temp_name, path)
    except Exception:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
    logger.info(f'Wrote {path}')


def frame_to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator='\n')


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, float_precision='round_trip')


def to_json(document: Any) -> str:
    return json.dumps(document, indent=2, allow_nan=False) + '\n'
