"""Convergence acceleration for scalar, vector, and matrix sequences.

The package builds epsilon-algorithm tables over arbitrary element spaces:
the classical scalar recursion with singular-block repairs
(:class:`ScalarEpsTable`), the full topological algorithms that alternate
between a space and its dual (:class:`TeaTable`), and the simplified
topological algorithms that drive a three-term element recursion with
coefficients read off the scalar shadow (:class:`TopoEpsTable`).  Around the
tables sit an independent linear-solve oracle for the underlying sequence
transformation (:mod:`epsaccel.oracle`), generators for test and application
sequences (:mod:`epsaccel.sequences`), an experiment harness
(:mod:`epsaccel.harness`), plain-text sequence I/O (:mod:`epsaccel.seqio`),
and a command line (``epsaccel``).
"""

from .scalar_eps import ScalarEpsTable, SingularEvent
from .topo_eps import TeaTable, TopoEpsTable, ratio_series, stability_margin
from .vectorspace import (
    DimensionMismatchError,
    DualElement,
    Element,
    Functional,
    as_element,
)

__version__ = "0.1.0"

__all__ = [
    "ScalarEpsTable",
    "SingularEvent",
    "TopoEpsTable",
    "TeaTable",
    "ratio_series",
    "stability_margin",
    "Element",
    "Functional",
    "DualElement",
    "DimensionMismatchError",
    "as_element",
    "__version__",
]
