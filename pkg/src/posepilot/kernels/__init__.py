"""Flight-loop kernel selection.

The compiled extension (fastloop, Cython) is preferred when it imported
cleanly; otherwise the pure-Python twin (pyloop) takes over. Force a
backend with POSEPILOT_KERNEL=fast|py (``fast`` raises if the extension is
missing). Both backends expose the same functions over the buffer layout
in layout.py and produce bit-identical trajectories.
"""

import os

from . import layout, pyloop

_requested = os.environ.get("POSEPILOT_KERNEL", "auto")

if _requested == "py":
    kernel = pyloop
elif _requested in ("auto", "fast"):
    try:
        from . import fastloop as kernel  # type: ignore[no-redef]
    except ImportError:
        if _requested == "fast":
            raise
        kernel = pyloop
else:
    raise ValueError(f"POSEPILOT_KERNEL must be auto, fast or py, not {_requested!r}")

BACKEND = kernel.BACKEND

if kernel.layout_tag() != layout.LAYOUT_TAG:
    raise ImportError(
        f"kernel backend {BACKEND!r} was built against layout "
        f"{kernel.layout_tag()!r}, expected {layout.LAYOUT_TAG!r}; rebuild the extension"
    )


def available_backends():
    """Names of importable kernel backends, compiled first."""
    names = []
    try:
        from . import fastloop  # noqa: F401

        names.append("fast")
    except ImportError:
        pass
    names.append("py")
    return names


def get_kernel(name=None):
    """Return a kernel module by backend name (default: the selected one)."""
    if name in (None, BACKEND, "auto"):
        return kernel
    if name == "py":
        return pyloop
    if name == "fast":
        from . import fastloop

        return fastloop
    raise ValueError(f"unknown kernel backend {name!r}")
