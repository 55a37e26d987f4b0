"""Hot-loop kernels, compiled when available.

``BACKEND`` is ``"cython"`` when the ``_kernels`` extension imported and
``"python"`` otherwise. Both implementations are importable directly for
comparison (see ``benchmarks/``).
"""

from . import _kernels_py as python_kernels

try:
    from . import _kernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if compiled_kernels is not None:
    soft_nms_kernel = compiled_kernels.soft_nms_kernel
    ahc_kernel = compiled_kernels.ahc_kernel
    BACKEND = "cython"
else:
    soft_nms_kernel = python_kernels.soft_nms_kernel
    ahc_kernel = python_kernels.ahc_kernel
    BACKEND = "python"

HARD, LINEAR, GAUSSIAN = python_kernels.HARD, python_kernels.LINEAR, python_kernels.GAUSSIAN

__all__ = ["BACKEND", "soft_nms_kernel", "ahc_kernel", "python_kernels", "compiled_kernels"]
