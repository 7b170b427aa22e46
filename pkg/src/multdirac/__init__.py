"""Exact symbolic checks for multiplicative Dirac structures on Lie groupoids.

Modules, from the bottom up: ``exprcore`` (rational functions), ``geometry``
(charts, maps, forms), ``dirac`` (Pontryagin bundle and Dirac frames),
``groupoid`` (groupoid structure maps and multiplicativity), ``infinitesimal``
(𝔄, the cores, star sections), ``bcourant`` (the quotient Courant algebroid
and the bisection action), ``homogeneous`` (homogeneous spaces) and ``cli``.
"""

from .errors import MultDiracError
from .exprcore import RationalFunction, parse_expression
from .geometry import Chart, KForm, PointP, SmoothMap, VectorField
from .dirac import Bivector, DiracFrame, PSection, from_bivector, from_two_form
from .groupoid import GroupoidDef, Bisection, abelian_group, cotangent_groupoid, group_over_point, pair_dirac, pair_groupoid
from .report import Report

__version__ = "0.1.0"

__all__ = [
    "Bisection",
    "Bivector",
    "Chart",
    "DiracFrame",
    "GroupoidDef",
    "KForm",
    "MultDiracError",
    "PSection",
    "PointP",
    "RationalFunction",
    "Report",
    "SmoothMap",
    "VectorField",
    "abelian_group",
    "cotangent_groupoid",
    "from_bivector",
    "from_two_form",
    "group_over_point",
    "pair_dirac",
    "pair_groupoid",
    "parse_expression",
]
