"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the NumPy versions.
Set ``MRA_BACKEND=python`` to force the fallback.
"""

import os

from . import _pykernels as python_backend

try:
    from . import _kernels as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and os.environ.get("MRA_BACKEND", "").lower() != "python":
    _active = compiled_backend
    BACKEND = "compiled"
else:
    _active = python_backend
    BACKEND = "python"

accumulate_spectra = _active.accumulate_spectra
jacobi_eigh = _active.jacobi_eigh
frequency_marching = _active.frequency_marching


def available_backends():
    out = {"python": python_backend}
    if compiled_backend is not None:
        out["compiled"] = compiled_backend
    return out
