"""Classical acne-lesion recognition: guided-filter preprocessing, k-means
segmentation in L*a*b*, GLCM and statistical texture features, five
classifiers and confusion-matrix / ROC evaluation."""

__version__ = "0.1.0"

from .imaging import GrayImage, Image, load_image, save_image, to_gray  # noqa: E402
from .preprocess import LabImage, PreprocessConfig, preprocess_pipeline, rgb_to_lab  # noqa: E402
from .segment import KMeansConfig, SegmentationResult, kmeans, segment_image  # noqa: E402
from .features import FeatureVector, GlcmConfig, extract  # noqa: E402
from .classify import LabeledSet, TrainConfig, TrainedModel, load_model, predict, save_model, train  # noqa: E402
from .evaluate import EvaluationReport, cross_validate  # noqa: E402
from .config import PipelineConfig  # noqa: E402
from .pipeline import analyze  # noqa: E402
