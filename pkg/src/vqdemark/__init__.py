"""Texture-based tumor demarcation: codebook segmentation with edge
superimposition, plus co-occurrence and watershed baselines."""

from .edges import CannyParams, EdgeMap, canny, edge_image, sobel_gradients, superimpose
from .errors import (
    ConfigError,
    DimensionMismatchError,
    EmptyImageError,
    EmptyTrainingSetError,
    GeometryMismatchError,
    ImageSmallerThanKernelError,
    ImageSmallerThanWindowError,
    InvalidGeometryError,
    InvalidTargetSizeError,
    MalformedFileError,
    NoPairsError,
    UnsupportedDepthError,
)
from .glcm import (
    FEATURES,
    FeatureMap,
    GlcmMatrix,
    GlcmParams,
    compute_glcm,
    feature_map,
    glcm_stats,
    quantize_levels,
    render_feature,
)
from .imaging import (
    GrayImage,
    Histogram,
    histogram,
    histogram_equalize,
    load_image,
    rescale_to_gray,
    save_image,
)
from .pipeline import (
    ComparisonReport,
    DiscTruth,
    PipelineArtifacts,
    PipelineConfig,
    analyze,
    compare_methods,
    disc_mask,
    generate_phantom,
    run_pipeline,
    segment_count,
    write_outputs,
)
from .vq import (
    BlockGeometry,
    ClusterAssignment,
    Codebook,
    GroupMap,
    SplitParams,
    TrainingSet,
    assign,
    block_group_map,
    cluster_images,
    extract_training_vectors,
    lbg_generate,
    requantize,
)
from .watershed import LabelMap, gradient_magnitude, watershed_edges, watershed_segment

__version__ = "0.1.0"
