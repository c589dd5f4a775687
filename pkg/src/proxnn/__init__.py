"""Proximal neural networks with orthogonality-constrained layers.

Building blocks: stable activation functions that are proximity operators
(``activations``), frame shrinkage and equivalent-norm machinery
(``linops``), Stiefel manifold geometry and retractions (``stiefel``),
the network itself with manifold SGD (``network``), Haar wavelet denoisers
(``wavelets``), scikit-learn style wrappers (``estimators``), and a
benchmark harness with a CLI (``bench``).
"""

__version__ = "1.0.0"

from .activations import Activation, soft_shrink
from .errors import ProxnnError
from .estimators import PPNNClassifier, PPNNDenoiser
from .network import PpnnParams, TrainConfig, forward, random_ppnn, sgd_train
from .wavelets import haar_basis_shrink, haar_frame_denoise

__all__ = [
    "__version__", "Activation", "soft_shrink", "ProxnnError",
    "PPNNClassifier", "PPNNDenoiser", "PpnnParams", "TrainConfig",
    "forward", "random_ppnn", "sgd_train", "haar_basis_shrink",
    "haar_frame_denoise",
]
