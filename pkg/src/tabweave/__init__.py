"""Deterministic core of curved-separator table structure recognition.

Separator geometry (:mod:`.bezier`), selection and ordering
(:mod:`.selection`), ground-truth matching (:mod:`.assignment`), relation
masks (:mod:`.relations`), cell composition (:mod:`.composition`), metrics
(:mod:`.evaluation`, :mod:`.teds`) and a synthetic warped-table oracle
(:mod:`.synthetic`).
"""

from .assignment import Assignment, GroupAssignment, expand_one_to_many, match_one_to_one
from .bezier import (
    SepClass,
    Separator,
    evaluate_bezier,
    fit_least_squares,
    sample_uniform,
    separator_distance,
)
from .composition import (
    TableCell,
    TableStructure,
    compose_cell,
    compose_structure,
    parse_sequence,
    remap_quadruples,
    serialize_sequence,
    to_html,
    to_logical_text,
)
from .errors import *  # noqa: F401,F403
from .evaluation import EvalReport, adjacency_f1, bleu, kl_profile
from .relations import (
    RelationInstances,
    RelationSet,
    build_mask_pyramid,
    build_relation_instances,
    rasterize_relation_mask,
)
from .selection import OrderedSeparatorSet, order_regularize, separator_nms
from .synthetic import GroundTruth, WarpField, apply_warp, generate_grid, perturb, random_warp, stream
from .teds import MarkupTree, parse_html, teds, tree_edit_distance

__version__ = "0.1.0"
