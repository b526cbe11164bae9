"""Finite-precision stability analysis for classifiers over partitioned metric spaces."""
__version__ = "0.1.0"

from .classifier import AxiomReport, Classifier, SubprocessClassifier, check_classifier_axioms, classify
from .errors import *  # noqa: F401,F403
from .metric import L1, L2, LINF, Metric, RngStream, Space, derive_rng_stream, distance, sample_ball
from .oracle import (FiniteScenario, enumerate_ball, oracle_accumulation_points, oracle_dense,
                     oracle_stability_table, oracle_stable_points)
from .precision import EpsilonCalibration, estimate_machine_epsilon, representability_floor
from .report import Report, content_hash, emit_report, load_report, run_scenario
from .scenario import Scenario, parse_scenario, scenario_from_dict
from .series import (SequenceGenerator, SubseriesInfo, default_generators, extract_subseries_in_set,
                     generate_sequence, test_stability_via_series)
from .sets import (Ball, Box, BoxUnion, Complement, DensityVerdict, DomainSet, FiniteSet, Lattice, Predicate,
                   complement_of, contains, is_dense_at_resolution, nearest_member)
from .stability import (AccumulationResult, AgreementReport, BlockerReport, ProbeConfig, Verdict,
                        cross_check_accumulation, dense_blocker_scan, reverify_witness, test_accumulation_point,
                        test_stable_point)
