"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy kernels in ``_pykernels`` are used. Set ``GDPKIT_BACKEND=python`` to
force the fallback.
"""

import os

from . import _pykernels

python = _pykernels
compiled = None

if os.environ.get("GDPKIT_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels as compiled
    except ImportError:
        compiled = None

kernels = compiled if compiled is not None else python

NAME = kernels.NAME
