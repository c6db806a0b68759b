"""Kernel backend selection.

Prefers the compiled extension; falls back to the pure numpy/scipy
implementation. Set DRIVENDICKE_BACKEND=python (or =compiled) to force one.
"""

import os

_choice = os.environ.get("DRIVENDICKE_BACKEND", "").strip().lower()

if _choice == "python":
    from . import _kernels_py as kernels
elif _choice == "compiled":
    from . import _kernels as kernels  # ImportError here is intentional: forced
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        from . import _kernels_py as kernels

BACKEND_NAME = kernels.BACKEND_NAME
csr_matvec = kernels.csr_matvec
lcsr_matvec = kernels.lcsr_matvec
error_norm = kernels.error_norm
rk45_span = kernels.rk45_span
