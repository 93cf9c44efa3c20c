"""Fixed decision thresholds used by the probes.

Each probe takes an optional ``thresholds`` argument; pass
``dataclasses.replace(DEFAULTS.<group>, ...)`` to override a value.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class RefinementThresholds:
    growth_factor: float = 10.0
    plateau_rtol: float = 1e-3
    # squared-norm increments per refinement step may shrink by at most this
    # factor for the sequence to count as (logarithmically) divergent
    increment_floor: float = 0.5


@dataclass(frozen=True)
class SeriesThresholds:
    analytic_peak_factor: float = 10.0
    rough_peak_factor: float = 1e3
    # spectral coefficients below this fraction of ||psi0|| count as rounding noise
    noise_floor: float = 1e-12


@dataclass(frozen=True)
class FormThresholds:
    cauchy_tol: float = 1e-8
    coherence_tol: float = 1e-6
    semicontinuity_slack: float = 1e-6
    lower_bound_rtol: float = 1e-6
    # log-log slope below which a distance sequence counts as decaying to 0
    decay_slope: float = -0.1


@dataclass(frozen=True)
class Defaults:
    refinement: RefinementThresholds = RefinementThresholds()
    series: SeriesThresholds = SeriesThresholds()
    forms: FormThresholds = FormThresholds()
    line_half_length: float = 12.0
    generator_step: float = 1e-5
    coefficient_floor: float = 1e-12
    coefficient_run: int = 10
    degeneracy_rtol: float = 1e-8


DEFAULTS = Defaults()
