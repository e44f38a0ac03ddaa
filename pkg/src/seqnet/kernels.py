"""Backend selection for the distance kernels.

The compiled extension is preferred; the pure-Python module is used when the
extension is missing or when the environment variable ``SEQNET_PURE`` is set
to a non-empty value other than ``0``.
"""

import os

from . import _pykernels

if os.environ.get("SEQNET_PURE", "") not in ("", "0"):
    _backend = _pykernels
else:
    try:
        from . import _kernels as _backend
    except ImportError:  # extension not built
        _backend = _pykernels

BACKEND = _backend.BACKEND
distance = _backend.distance
one_to_many = _backend.one_to_many
prefix_matrix = _backend.prefix_matrix

KIND_CODES = {
    "euclidean": _pykernels.EUCLIDEAN,
    "hamming": _pykernels.HAMMING,
    "levenshtein": _pykernels.LEVENSHTEIN,
    "erp": _pykernels.ERP,
    "dfd": _pykernels.DFD,
    "dtw": _pykernels.DTW,
}


def backends():
    """Return every importable backend module, pure Python first."""
    found = [_pykernels]
    try:
        from . import _kernels
    except ImportError:
        return found
    found.append(_kernels)
    return found
