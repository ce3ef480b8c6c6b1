"""eg-matchlab: largest subgraphs with a given matching number.

Library + CLI for maximum matchings and Tutte-Berge witnesses, exact
extremal subgraph search with canonical-form verdicts, decomposition
improvement moves, binomial tail bounds and union-bound budgets, and a
seeded Monte Carlo harness over sparse / dense random-graph regimes.
"""

from .errors import CapabilityError, InputError, MoveError
from .graph_core import (Graph, GnpParams, gen_gnp, dense_regime_p,
                         edges_between, edges_within, components,
                         vset, vset_members)
from .matching import (Matching, TBWitness, is_bipartite, is_forest,
                       matching_number, max_matching, tutte_berge_witness,
                       vertex_cover_number)
from .decomposition import (Decomposition, ExtremalResult, best_form1,
                            best_form2, decomposition_size, edge_set,
                            eg_check, eg_check_all, extremal,
                            nu_of_decomposition)
from .moves import (CaseThresholds, ImproveResult, MoveReport, apply_case,
                    apply_case1, apply_case2, apply_case3, apply_case4,
                    apply_case5, apply_case6, apply_case7, classify_case,
                    improve, is_canonical)
from .bounds import (BoundPair, BudgetQuery, BudgetResult, TailQuery,
                     binom_tail_exact, chernoff_lower, chernoff_upper,
                     eg_size_formula, large_deviation, p3_moments, phi,
                     union_budget)
from .harness import (DensityAuditReport, FailureCertificate, RegimeSpec,
                      TrialRecord, between_event_holds,
                      build_failure_certificate, cap300_event_holds,
                      count_isolated_p3, density_audit, eg_fails_at_nu,
                      has_empty_half, independence_at_least,
                      interior_event_holds, run_trials, records_to_csv,
                      sample_p3_counts, sparse_event_holds)

__version__ = "0.1.0"
