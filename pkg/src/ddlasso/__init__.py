"""Exact l1-penalized least-squares paths and diagonal-dominance certificates."""

from .conditions import (ConditionReport, check_coherence_bound, check_donoho_kstep,
                         check_positive_cone_exhaustive, check_inverse_gram_dd, donoho_bound,
                         cone_matches_sdd)
from .ensemble import EnsembleSpec, FrequencyReport, run_frequency_study, sample_matrix
from .errors import (ArgumentError, CostGuardError, CycleGuardError, DDLassoError, DimensionError,
                     HypothesisError, OracleError, OutOfRangeError, ParseError, SingularMatrixError)
from .homotopy import (AuditReport, Breakpoint, Event, LassoProblem, SolutionPath, eval_path,
                       monotonicity_audit, oracle_solve, solve_path, subgradient_check)
from .matrix import (DominanceClass, classify_dominance, gram, inverse_of_submatrix_inverse,
                     invert_spd, mutual_coherence, principal_submatrix, schur_reduce_last)
from .tv import (TVPath, TVProblem, check_analysis_gram_dd, first_difference_matrix, recover_x,
                 reformulate, solve_tv_path)

__version__ = "0.1.0"
