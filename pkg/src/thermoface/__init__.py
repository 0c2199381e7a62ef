"""Minutiae-based thermal face recognition: segmentation, perfusion ridges, MLP."""
from .ellipse import EllipseSpec, crop_ellipse, estimate_axes, rasterize_ellipse
from .errors import (BadDims, BlockSizeInvalid, DegenerateAxis, DimMismatch, EmptyDataset,
                     EmptyMask, FormatError, ImageTooSmall, MixedSizes, NonFinite, NoSubjects,
                     StageError, ThermofaceError, TrainingDiverged, UnreadableImage)
from .minutiae import (FeatureVector, Kind, Minutia, block_features, classify_pixel,
                       extract_minutiae)
from .mlp import (MlpModel, TrainConfig, forward, load_model, loss, new_network, predict,
                  save_model, train)
from .perfusion import GradientField, binarize_gradient, sobel, thin
from .pipeline import DatasetManifest, EvalReport, PipelineConfig, evaluate, ingest, run_pipeline
from .raster import binarize_mean, read_pnm, to_grayscale, write_pgm, write_ppm
from .segmentation import Centroid, LabelMap, centroid, label_components, largest_component
from .synth import synth_faces

__version__ = "0.1.0"
