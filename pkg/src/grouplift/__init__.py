"""Multi-label attribute learning with group-balanced loss weights, and
unsupervised domain adaptation by multi-kernel MMD, on a from-scratch dense
network."""

from .config import TrainConfig
from .data import LabeledDomain, SyntheticSpec, UnlabeledDomain, generate, load_csv, save_csv, split
from .errors import (
    ArgumentError,
    DataError,
    DegenerateDataError,
    GenerationError,
    GroupliftError,
    NumericError,
    ParseError,
    ShapeError,
    TrainingError,
)
from .grouping import (
    AttributeGrouping,
    assign_group_weights,
    cluster_attributes,
    emphasized_weights,
    equal_weights,
    estimate_correlation,
)
from .mmd import KernelFamily, MmdValue, gaussian_kernel, median_heuristic_bandwidths, mkmmd_grad, mkmmd_sq
from .multilabel import MultiLabelModel, build_model, multilabel_loss, predict, train_mnet
from .nncore import DenseLayer, DenseNetwork, backward, forward, freeze_prefix, init_network, sgd_step
from .transfer import TransferModel, TransferTask, alpha_policy, direct_transfer, train_tnet, transfer_loss

__version__ = "0.1.0"
