"""Engine selection: compiled extension if importable, NumPy otherwise.

Set ``BRIDGESTOP_FORCE_PYTHON=1`` to force the NumPy engine (used by the
parity tests and the backend benchmark).  Both engines produce
bit-identical results for identical seeds.
"""

from __future__ import annotations

import os

from . import _engine_py

if os.environ.get("BRIDGESTOP_FORCE_PYTHON"):
    engine = _engine_py
else:
    try:
        from . import _engine_cy as engine  # type: ignore[no-redef]
    except ImportError:
        engine = _engine_py


def backend_name() -> str:
    return engine.name
