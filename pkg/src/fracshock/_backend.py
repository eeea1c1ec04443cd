"""Backend selection for the hot-loop kernels.

At import time the compiled extension is preferred; the NumPy fallback is
used when the extension is unavailable.  ``FRACSHOCK_BACKEND`` forces a
choice: ``compiled`` (error if missing), ``python``, or ``auto`` (default).
"""

import os

_requested = os.environ.get("FRACSHOCK_BACKEND", "auto").lower()

if _requested not in ("auto", "compiled", "python"):
    raise RuntimeError(f"FRACSHOCK_BACKEND must be auto|compiled|python, got {_requested!r}")

if _requested == "python":
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise RuntimeError(
                "FRACSHOCK_BACKEND=compiled but the extension is not built; "
                "run `pip install -e .` or `python setup.py build_ext --inplace`"
            )
        from . import _kernels_py as _impl

        BACKEND = "python"

nonlocal_apply = _impl.nonlocal_apply
pair_sum = _impl.pair_sum
