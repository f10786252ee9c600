"""Kernel backend selection.

The per-step planner kernels exist twice: a Cython extension
(``gaitplan._kernel``) for speed and a pure-Python fallback
(``gaitplan._kernel_py``).  The compiled one is preferred when importable;
set ``GAITPLAN_BACKEND=python`` or ``GAITPLAN_BACKEND=compiled`` to force a
choice (forcing ``compiled`` raises if the extension was not built).

Both implementations compute identical IEEE-754 operation sequences, so a
given simulation is deterministic and backend-independent.
"""

import os

_requested = os.environ.get("GAITPLAN_BACKEND", "auto").strip().lower()

if _requested in ("auto", ""):
    try:
        from . import _kernel as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import _kernel_py as _impl

        BACKEND = "python"
elif _requested in ("compiled", "c", "cython"):
    from . import _kernel as _impl

    BACKEND = "compiled"
elif _requested in ("python", "pure", "py"):
    from . import _kernel_py as _impl

    BACKEND = "python"
else:
    raise ValueError(
        f"GAITPLAN_BACKEND={_requested!r} not recognized "
        "(use 'auto', 'compiled' or 'python')"
    )

ux_feedback = _impl.ux_feedback
uy_feedback = _impl.uy_feedback
propagate = _impl.propagate
step_x = _impl.step_x
step_y = _impl.step_y
run_x = _impl.run_x
run_y = _impl.run_y


def load_backend(name):
    """Import a specific kernel module ('compiled' or 'python') directly.

    Used by the benchmark and the parity tests; does not change the
    module-level selection.
    """
    if name == "compiled":
        from . import _kernel

        return _kernel
    if name == "python":
        from . import _kernel_py

        return _kernel_py
    raise ValueError(f"unknown backend {name!r}")
