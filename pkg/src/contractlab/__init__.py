"""contractlab: numerical contraction of the special linear group onto its
rigid-motion limit, with operator families on waves, circle functions, and
disk sections, plus a CLI experiment harness (``contractctl``)."""

__version__ = "0.1.0"

from . import (  # noqa: E402  (version must precede submodules)
    compact_picture,
    deformation,
    discrete_series,
    fields,
    iwasawa_limits,
    matgroup,
    quasisplit_fine,
    reporting,
    waves,
)

__all__ = [
    "__version__",
    "compact_picture",
    "deformation",
    "discrete_series",
    "fields",
    "iwasawa_limits",
    "matgroup",
    "quasisplit_fine",
    "reporting",
    "waves",
]
