"""Self-stabilizing maximal-independent-set random processes on graphs.

Library, simulator, and CLI for the two-state, three-state, and three-color
synchronous MIS processes, the randomized on/off switch the three-color
process relies on, a structural-property verifier for random-graph-like
inputs, and an experiment harness with exact small-instance oracles.
"""

from .backend import BACKEND, available_backends
from .coins import CoinStream
from .dynamics import (BLACK, BLACK0, BLACK1, GRAY, WHITE, ProcessKind,
                       StateVector, TrialResult, VertexSet, active_set,
                       init_states, is_stabilized, k_active_set, run_trial,
                       stable_sets, step)
from .exact import (absorption_cdf, four_vertex_graphs,
                    mean_stabilization_times, star_center_stable_probability)
from .goodness import GoodnessReport, is_good, theta, witness_violates
from .graph import (Graph, common_neighbors, diameter, dump_edge_list,
                    from_descriptor, gen_complete, gen_disjoint_cliques,
                    gen_gnp, gen_random_tree, induced_avg_degree,
                    load_edge_list)
from .harness import (ExperimentConfig, ExperimentResult, SoundnessError,
                      lemma6_check, lemma7_check, run_experiment, tail_decay,
                      verify_mis)
from .switch import (LevelVector, OnOffVector, SwitchAudit, run_length_audit,
                     sigma, switch_init, switch_step)

__version__ = "0.1.0"
