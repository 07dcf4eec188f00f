"""aerosplat: surface-patch wind simulation with a CPU splat renderer.

Gaussian surface patches double as simulation primitives (area and normal
feed a dynamic-pressure wind force coupled into an MPM solver) and as
render primitives (shaded and alpha-blended by a software rasterizer).
Hot loops run in a compiled extension when available, with a pure numpy
fallback selected at import; see aerosplat._kernels.
"""

from ._kernels import active_name as kernel_backend

__version__ = "0.1.0"

__all__ = ["kernel_backend", "__version__"]
