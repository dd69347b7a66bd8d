"""Dataset condensation into labeled representation centers (CRCs).

Per-class k-means places the initial centers; purity-guided refinement then
moves them so that each center's Voronoi cell is dominated by one class.
"""
from .condenser import (CondenseConfig, PurityReport, activity_mask, advancement_vectors,
                        condense, correctness, initialize, label_centers, overall_purity,
                        popcount, purities, refine_step, select_advance, soft_assign)
from .data import CondensedModel, Dataset, RefinementHistory, SoftAssignment, class_partition
from .evaluate import (MLPModel, TrainConfig, accuracy, mlp_predict, mlp_train,
                       nearest_crc_predict)
from .kmeans import KMeansConfig, assign_nearest, kmeans_fit
from .synth import NoiseSpec, make_circles, make_moons

__version__ = "0.1.0"
