"""Balanced supersaturation for K_{s,t} and its 3-uniform expansion, at desk scale."""

from .copies import CopyCollection, PatternSpec, check_balanced, check_phi_bounded, enumerate_expansion_copies, enumerate_kst
from .dense import dense_collection
from .errors import (
    DigestMismatchError,
    DuplicateCopyError,
    FormatError,
    InconsistencyError,
    KstError,
    ParameterError,
    PreconditionError,
    ResourceError,
    StructuralError,
)
from .hypergraph import Hypergraph, Tripartition, pair_support, read_hg1, restrict_tripartite, shadow, write_hg1
from .patterns import complete_bipartite, expand, kst_r_density, r_density
from .pipeline import PipelineParams, count_check, run_pipeline
from .regularize import degree_bounds, regularize
from .sparse import PhiParams, sparse_collection
from .translate import extend_copies, proj, translation_degree_bound

__version__ = "0.1.0"
