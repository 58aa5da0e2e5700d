"""Numerical toolkit for the Schwarzian tensor of locally biholomorphic maps of the polydisk."""

__version__ = "0.1.0"

from .errors import PolySchwarzError  # noqa: E402
from .maps import (  # noqa: E402
    Automorphism,
    Compose,
    Dilation,
    Identity,
    Moebius,
    Normalizer,
    Polynomial,
    catalog,
    eval_map,
    map_jet,
    normalize,
)
from .schwarzian import schwarzian_tensor  # noqa: E402
from .bergman import operator_norm, sup_norm  # noqa: E402
