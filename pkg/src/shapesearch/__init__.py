"""Composite-shape retrieval engine.

Describe arrangements of posed basic shapes, recognize them exactly or
approximately in segmented images, organize descriptions in a subsumption
hierarchy, and rank retrieval results.
"""

from .approx import (
    MatchResult,
    candidate_mappings,
    delta_rotation,
    delta_scale,
    delta_spatial,
    group_feature_sims,
    recognize_approx,
    retrieve,
    score_mapping,
)
from .config import SensitivityConfig, Weights, load_config, parse_config_text
from .errors import (
    EvaluationError,
    FeatureError,
    GeometryError,
    HierarchyError,
    ParseError,
    SegmentationError,
    ShapeSearchError,
    UnsatisfiableDescriptionError,
)
from .evaluation import (
    Ranking,
    build_synthetic_suite,
    merge_user_rankings,
    rnorm,
    run_experiment,
    system_ranking,
)
from .exact import (
    ExactMatch,
    contour_match,
    recognize_exact,
    recognize_exact_oracle,
    solve_two_point_transform,
    subsumes,
)
from .features import (
    FourierDescriptor,
    OrientationInfo,
    distance_to_similarity,
    fourier_descriptor,
    gabor_texture,
    mean_color,
    orientation_info,
    resample_uniform,
    shape_similarity,
)
from .geometry import (
    BasicShape,
    ColorRGB,
    CompositeDescription,
    Contour,
    Region,
    SegmentedImage,
    ShapeComponent,
    TextureVec,
    Transform,
    Vec2,
    apply_transform,
    centroid,
    compose,
    is_satisfiable,
    prototypical_image,
    size,
)
from .hierarchy import Hierarchy, HierarchyNode
from .ingest import (
    RasterImage,
    parse_segmented_image,
    render_scene,
    segment_synthetic,
    serialize_segmented_image,
)
from .interchange import canonical_json, parse_description, serialize_description
from .store import Store

__version__ = "0.1.0"
