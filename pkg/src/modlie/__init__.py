"""Exact computations in modular enveloping algebras of Lie algebras.

Structure constants in, PBW normal forms, centers, the deformation Poisson
bracket and cotangent Lie algebras out.  All arithmetic is exact.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .exact_linalg import QQ, ZZ, EchelonBasis, Ring, charpoly, echelonize, nullspace
from .lie_core import (
    Character,
    LieAlgebraPresentation,
    RestrictedStructure,
    killing_rank,
    derived_series_dims,
    make_character,
    pmap_extend,
    pmap_from_matrices,
    restricted_structure,
    validate,
    verify_restricted,
)
from .pbw import Homomorphism, MonomialIndex, PBWContext, UEAElement, pbw_context, verify_hom
from .sym_poisson import SymElement, invariant_basis, kk_bracket, regular_sequence_probe, symmetrize
from .poisson_center import (
    CenterChunk,
    center_basis,
    center_freeness_report,
    deformation_bracket,
    kac_radul_check,
    p_center_embed,
    p_center_image,
)
from .cotangent import (
    CotangentAlgebra,
    augmentation_ideal,
    character_twist,
    charpoly_sweep,
    compare_invariants,
    cotangent_algebra,
    induced_automorphism,
    quotient_normal_form,
)
from .parsing import load_bundled, parse_algebra, parse_images
