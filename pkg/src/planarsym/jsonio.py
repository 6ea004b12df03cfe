"""Canonical JSON output: floats at 17 significant digits, stable key order."""

from __future__ import annotations

import json
import math
import os
import tempfile
from enum import Enum

import numpy as np


def _float(v: float) -> str:
    if not math.isfinite(v):
        return "null"
    s = "%.17g" % v
    if s.lstrip("-").isdigit():
        s += ".0"
    return s


def dumps(obj, indent: int = 2) -> str:
    """Serialise ``obj``; non-finite floats become ``null``."""

    def enc(o, level):
        pad = "\n" + " " * (indent * (level + 1)) if indent else ""
        end = "\n" + " " * (indent * level) if indent else ""
        sep = "," + pad if indent else ", "
        if isinstance(o, Enum):
            o = o.value
        if isinstance(o, np.generic):
            o = o.item()
        if o is None or isinstance(o, bool):
            return json.dumps(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return _float(o)
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, dict):
            if not o:
                return "{}"
            body = sep.join(f"{json.dumps(str(k))}: {enc(v, level + 1)}" for k, v in o.items())
            return "{" + pad + body + end + "}"
        if isinstance(o, (list, tuple, np.ndarray)):
            items = list(o)
            if not items:
                return "[]"
            if all(isinstance(i, (int, float, np.generic)) and not isinstance(i, bool) for i in items):
                return "[" + ", ".join(enc(i, level + 1) for i in items) + "]"
            return "[" + pad + sep.join(enc(i, level + 1) for i in items) + end + "]"
        raise TypeError(f"cannot serialise {type(o).__name__}")

    return enc(obj, 0)


def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
