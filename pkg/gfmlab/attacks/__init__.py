from .scenario import ScenarioConfig, ScenarioKinds, epochs_for_budget
from .synthesis import PartialGraphView, SyntheticGraph, \
    synthesize_attributes, build_synthetic_query_graphs
from .query_sets import QuerySet, allocate_budget, build_query_set, \
    resolve_sources
from .runner import ScenarioRunner, run_scenario
