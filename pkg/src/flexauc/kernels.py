"""Backend selection for the clearing kernels.

The compiled Cython module is used when it was built; otherwise, or when
``FLEXAUC_PURE_PYTHON=1`` is set, the pure-Python twin is loaded.
"""

import os

from . import _kernels_py

if os.environ.get("FLEXAUC_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
top_bids = _impl.top_bids
allocate = _impl.allocate
vcg_payments = _impl.vcg_payments
uniform_price = _impl.uniform_price
uniform_payments = _impl.uniform_payments
max_loser_bids = _impl.max_loser_bids
partial_uniform_payments = _impl.partial_uniform_payments
brute_force_welfare = _impl.brute_force_welfare


def available_backends():
    """Modules implementing the kernel API, pure Python first."""
    mods = [_kernels_py]
    try:
        from . import _kernels
        mods.append(_kernels)
    except ImportError:
        pass
    return mods
