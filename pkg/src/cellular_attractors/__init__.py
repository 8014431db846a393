"""Realizing cellular sets as global attractors of homeomorphisms, with a
sampled, verifiable pipeline from an abstract attractor to R^(4k+4)."""

from .cells import CellSequence, NestingError, neighbourhood_cells, round_cells
from .dynamics import (SampledSystem, certify_attractor, cells_from_homeomorphism,
                       contraction_witness, omega_limit, orbit)
from .embedding import Embedding, conjugate_system, embed, pad_dimension
from .extension import ExtensionOperator, extend
from .garay import CollapseMap, GarayMap, brown_collapse, estimate_bk, garay_map
from .geometry import FilledEllipsoid, RadialProfile, hausdorff_semidist
from .klee import KleeExtension, build_compress, klee_extend, klee_inverse_eval
from .maps import AffineMap, BlockProduct, Composition, InvertibleMap, RadialMap
from .pipeline import PipelineConfig, build_hhat, emit_report, run_pipeline, select_m, verify_rate

__version__ = "0.1.0"
