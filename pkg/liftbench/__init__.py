## TITLE: liftbench
## CC: okzyrox
## LICENSE: MIT

from .certificates import CertificateResult, Direction, Quantity, certify, quantity_from_name
from .config import ExperimentConfig
from .ensembles import LiftedGraph, NoiseSpec, apply_noise, detect_experiment, random_lift, sample_bipartite_regular, sample_regular
from .errors import LiftbenchError
from .exact import ExactResult, lift_assignment, solve
from .graph_core import BipartiteLayout, Multigraph, SimpleGraph, find_bipartition, load_graph, save_graph
from .harness import BuiltinRegistry, repro_figures, repro_table1, run
from .local_stats import PartiallyLabelledGraph, PseudoMoment, lost2_check, lost2_lower_witness, lost2_reduce
from .sdp import PathStatsInstance, infeasibility_certificate, null_witness, path_stats_check, planted_witness
from .spectral import graph_spectrum, is_ramanujan

__version__ = "0.1.0"
