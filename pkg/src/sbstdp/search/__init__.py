"""Search-based test generation guided by defect predictions."""
from sbstdp.search.archive import Archive
from sbstdp.search.engine import (
    COMPLETED,
    SKIPPED,
    SearchResult,
    filter_targets,
    initial_targets,
    run_search,
    select_population,
    switch_off_targets,
    update_archive,
    update_targets,
)
from sbstdp.search.operators import SearchParams, crossover, generate_offspring, mutate, random_test

__all__ = [
    "COMPLETED", "SKIPPED", "Archive", "SearchParams", "SearchResult", "crossover",
    "filter_targets", "generate_offspring", "initial_targets", "mutate", "random_test",
    "run_search", "select_population", "switch_off_targets", "update_archive", "update_targets",
]
