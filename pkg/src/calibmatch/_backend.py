"""Pick the matching kernel implementation at import time.

The compiled extension is used when it was built; set
``CALIBMATCH_PURE_PYTHON=1`` to force the fallback.
"""

import os

from calibmatch import _pykernels

if os.environ.get("CALIBMATCH_PURE_PYTHON", "") not in ("", "0"):
    kernels = _pykernels
else:
    try:
        from calibmatch import _ckernels as kernels
    except ImportError:
        kernels = _pykernels

BACKEND = kernels.NAME


def available():
    """Return every importable kernel module, fallback first."""
    mods = [_pykernels]
    try:
        from calibmatch import _ckernels

        mods.append(_ckernels)
    except ImportError:
        pass
    return mods
