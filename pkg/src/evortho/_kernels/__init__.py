"""Log-likelihood kernels with a compiled core and a numpy fallback.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
numpy implementation in ``_pykernels`` is selected. Setting the environment
variable ``EVT_ORTHO_BACKEND=python`` forces the fallback.
"""

import importlib
import os

import numpy as np

from evortho._kernels import _pykernels
from evortho._kernels._pykernels import (  # noqa: F401
    LOG_ZERO,
    XI_ZERO_TOL,
    logpdf_gev2,
    logpdf_gev3,
    logpdf_gp,
    logpdf_gumbel,
)

_ckernels = None
if os.environ.get("EVT_ORTHO_BACKEND", "").lower() != "python":
    try:
        _ckernels = importlib.import_module("evortho._kernels._ckernels")
    except ImportError:
        _ckernels = None

BACKEND = "cython" if _ckernels is not None else "python"
_impl = _ckernels if _ckernels is not None else _pykernels


def available_backends():
    return ["python"] + (["cython"] if _ckernels is not None else [])


def get_backend(name=None):
    """Return the kernel module called ``name`` (default: the active one)."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def as_data(x):
    """Coerce data to the contiguous float64 layout the kernels expect."""
    return np.ascontiguousarray(x, dtype=np.float64)


loglik_gumbel = _impl.loglik_gumbel
loglik_gev3 = _impl.loglik_gev3
loglik_gev2 = _impl.loglik_gev2
loglik_gp = _impl.loglik_gp
