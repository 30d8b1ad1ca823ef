"""Manipulation-proof auditing of binary classifiers on finite input spaces.

Simulation engine and CLI for studying how much a platform can move a
demographic-parity measure after answering an auditor's queries:
version-space diameters, exact adaptive query costs, empirical
Rademacher capacity, manipulability under random audits, and the
accuracy cost of choosing an audit-evading model family.
"""

from .audit import (AuditReport, AuditSet, CostCapError, audit_report,
                    check_consistency, exact_cost, random_audit, record_answers)
from .capacity import CapacityEstimate, RademacherDraw, capacity, rademacher_draw
from .dataspace import (DataError, Dataset, DemographicParity, EventPredicate,
                        GroupCounts, SamplePoint, gen_synthetic, load_csv,
                        measure_mu, measure_parity_general)
from .diameter import (DiameterResult, ReductionConfig,
                       benign_overfitting_lower_bound, diam_bruteforce,
                       diam_dictionary_closed_form, diam_empirical,
                       diam_exhaustive_closed_form, optimal_dictionary_audit)
from .harness import (ConfigError, ExperimentConfig, ResultsSink, build_dataset,
                      load_config, proportional_dictionary, run_budget_sweep,
                      run_capacity, run_coe, run_fig2, run_manipulability,
                      run_scatter)
from .hypotheses import (EnumerationCapError, HypothesisClass, ModelFamily,
                         TrainSpec, dictionary, enumerate_consistent, exhaustive,
                         is_member, pack_labeling, default_grid, train, trained,
                         unpack_labeling)
from .metrics import (FamilyReport, ManipulabilityEstimate, cost_of_exhaustion,
                      cv_accuracies, fit_star, manipulability, select_h_opt,
                      stratified_folds)

__version__ = "0.1.0"
