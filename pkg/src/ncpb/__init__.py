"""Computations with noncommutative principal torus bundles.

Quantum-torus arithmetic, finite-dimensional algebras, simplicial bases,
cocycle bundles and their section algebras, spectra as coverings,
localization, and trivial-NCP / NCP verdicts with checkable certificates.
"""

from .bundle import (
    ChernPrincipalBundle,
    FindimFiber,
    FlatAlgebraBundle,
    LinearAuto,
    NcTorusFiber,
    PhaseLattice,
    SectionFamily,
)
from .exactnum import GaussRational, PhaseQ, smith_normal_form, tolerance
from .findim import StructureAlgebra, characters, radical, semisimple_quotient
from .gallery import example_gallery
from .nctorus import (
    NcTorusElement,
    ThetaMatrix,
    act,
    certify_invertible,
    multiply,
    star,
)
from .simbase import SimplicialBase, WeightFunction, abelianization, homology
from .speclocal import (
    ChernSystem,
    localization_spectrum,
    localize_bundle_system,
    spectrum_covering,
    system_from_json,
)
from .verdicts import check_ncp, check_trivial_ncp, reconstruct_principal_data

__version__ = "0.1.0"

__all__ = [
    "ChernPrincipalBundle",
    "ChernSystem",
    "FindimFiber",
    "FlatAlgebraBundle",
    "GaussRational",
    "LinearAuto",
    "NcTorusElement",
    "NcTorusFiber",
    "PhaseLattice",
    "PhaseQ",
    "SectionFamily",
    "SimplicialBase",
    "StructureAlgebra",
    "ThetaMatrix",
    "WeightFunction",
    "abelianization",
    "act",
    "certify_invertible",
    "characters",
    "check_ncp",
    "check_trivial_ncp",
    "example_gallery",
    "homology",
    "localization_spectrum",
    "localize_bundle_system",
    "multiply",
    "radical",
    "reconstruct_principal_data",
    "semisimple_quotient",
    "smith_normal_form",
    "spectrum_covering",
    "star",
    "system_from_json",
    "tolerance",
]
