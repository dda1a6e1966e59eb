"""Multi-objective multi-fidelity Bayesian optimization via expected
hypervolume improvement, with a reproducible benchmark harness."""

__version__ = "0.1.0"

from .acquisition import (
    CostModel,
    FidelityObjective,
    McSampleSet,
    ehvi_exact_2d,
    ehvi_mc,
    expected_improvement,
    mes,
    mf_mes,
    momf_score,
    sample_max_values,
    ucb,
)
from .bench import BenchReport, HvTrace, aggregate, fidelity_stats, hv_trace
from .engine import (
    Dataset,
    LoopConfig,
    Observation,
    TrialRecord,
    initialize,
    maximize_acquisition,
    run,
    run_momf1,
    run_momf2,
    run_sf_ehvi,
)
from .gp import FitConfig, GpModel, KernelParams, Posterior, fit, log_marginal_likelihood, matern52, posterior
from .pareto import ParetoFront, dominates, hvi, hypervolume, nondominated
from .problems import Problem, branin_currin_mf, forrester_mf, get_problem, oracle_front, park_mf

__all__ = [name for name in dir() if not name.startswith("_")]
