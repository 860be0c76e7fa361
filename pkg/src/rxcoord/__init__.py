"""Kernel-PCA reaction-coordinate analysis for MD trajectories.

Workflow: ingest structures and trajectories, align them to an
origin-centered reference, scan the angular-kernel weight simplex,
pick the 2D representation whose PC1 best tracks a per-frame protein
property (correlation ratio), then rank per-residue theta angles as
reaction coordinates and inspect their pairwise correlation network.
"""

from . import align, corrratio, errors, ingest, kernel, pca, pipeline
from .align import (AlignmentResult, align_trajectory, ca_contact_distance,
                    centroid, gyration_tensor, kabsch, principal_axes_rotation,
                    rmsd_series, translate_to_origin)
from .corrratio import (CorrRatioConfig, CorrRatioResult, correlation_ratio,
                        normalize_grid)
from .ingest import (AtomRecord, PropertySeries, Selection, Structure,
                     Trajectory, parse_pdb, parse_property_csv,
                     parse_trajectory, select_atoms, write_pdb,
                     write_svg_scatter)
from .kernel import (FeatureMatrix, LambdaTriple, kernel_features,
                     kernel_value, lambda_grid, radial_norm, theta_angle,
                     theta_series)
from .pca import Representation, pca2, project
from .pipeline import (GridScanResult, NetworkEdge, RankedCoordinate,
                       RankingResult, cb_total_ratio, grid_scan,
                       pairwise_network, rank_reaction_coordinates,
                       single_axis_baseline, subsample_frames, synth_planted)

__version__ = "0.1.0"
