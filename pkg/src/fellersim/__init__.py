"""fellersim: state-dependent jump-diffusion symbols, their structural and
growth-condition audits, pseudo-differential generator application, interlaced
path simulation, and Monte Carlo verification of semigroup properties."""

from .errors import (ConfigurationError, HypothesisViolationError,
                     IntensityUnderestimateError, NumericalConsistencyError,
                     NumericalInstabilityError, QuadratureError)
from .exponents import (ExponentFamily, brownian, compound_poisson, eval_exponent,
                        isotropic_stable, lamperti_stable, levy_triplet,
                        normal_tempered_stable, relativistic_stable, truncated_levy)
from .symbols import (CharacteristicsView, SymbolField, levy_process_symbol,
                      make_relativistic_symbol, make_sde_symbol,
                      make_stable_like_symbol, scale_symbol,
                      symbol_from_characteristics, validate_cndf)
from .checks import (ProbeSchedule, check_characteristics_growth,
                     check_growth_condition, check_growth_equivalence,
                     check_local_boundedness, check_mapping_property,
                     check_relativistic_conditions, kernel_identity_residual)
from .generator import (TestFunction, apply_characteristics, apply_fourier,
                        gaussian_bump, lyapunov_constant,
                        polynomial_times_gaussian, smooth_cutoff)
from .simulate import (PathSample, SimulationConfig, large_jump_intensity,
                       path_generator, run_euler_batch, run_interlaced_batch,
                       sample_levy_increment, simulate_interlaced,
                       simulate_sde_euler, split_levy_measure, thinning_step)
from .verify import (SemigroupEstimate, empirical_cf_test, estimate_semigroup,
                     estimate_two_stage, verify_conservative,
                     verify_feller_vanishing, verify_generator_consistency,
                     verify_gronwall_bound, verify_strong_continuity)
from .bundle import CORE_BUNDLE, bundled_names, bundled_symbol
from .quadrature import QuadSpec

__version__ = "0.1.0"
