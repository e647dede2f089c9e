"""Prize-collecting Steiner trees by zero-temperature max-sum message passing."""

from .bench import BenchRow, rows_from_csv, rows_to_csv, run_bench
from .formats import (InstanceFormatError, parse_instance, read_instance, save_instance,
                      write_instance)
from .generators import (CDESpec, HypercubeSpec, I640Spec, RSpec, generate, spec_from_dict,
                         spec_to_dict)
from .instance import Instance, InvalidInstanceError, check, validate
from .maxsum import (MessageState, NodeFields, Solution, SolverConfig, SolveStats,
                     extract_decisions, init_state, node_fields, solution_cost, solve_rooted,
                     sweep)
from .oracle import InstanceTooLargeError, OptResult, exact_pcst, gap_percent
from .postprocess import Tree, apply_post, kruskal, mst_respan, strong_prune
from .rooting import augment_virtual_root, root_scores, solve_pcst
from .verify import (check_lifted_fixed_point, check_fixed_point_optimality,
                     check_subtree_optimality, computation_tree, lift_messages)

__version__ = "0.1.0"
