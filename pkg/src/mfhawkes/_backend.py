"""Backend selection for the stepping kernel.

The compiled extension is preferred when it imported cleanly; set
``MFHAWKES_BACKEND=python`` to force the numpy fallback, or
``MFHAWKES_BACKEND=compiled`` to fail loudly when the extension is absent.
Results agree across backends to ~1e-12 relative; bit-for-bit determinism
is guaranteed within a backend, not across them.
"""

import os

_choice = os.environ.get("MFHAWKES_BACKEND", "auto")
if _choice not in ("auto", "compiled", "python"):
    raise RuntimeError(
        f"MFHAWKES_BACKEND={_choice!r}: expected auto, compiled or python"
    )

if _choice == "python":
    from . import _kernels_py as _impl

    USING_COMPILED = False
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        USING_COMPILED = True
    except ImportError:
        if _choice == "compiled":
            raise
        from . import _kernels_py as _impl  # type: ignore[no-redef]

        USING_COMPILED = False

step_network_batch = _impl.step_network_batch
