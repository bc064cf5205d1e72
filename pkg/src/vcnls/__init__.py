"""Explicit solutions of variable-coefficient coupled NLS systems built by a
Riccati similarity transform, with numerical verification."""

from .coefficients import (CoefficientSet, blowup_free_case, builtin_case, case_ids, catalog,
                           characteristic_residual, eta_sigma, evaluate, synthesize_h)
from .errors import *  # noqa: F401,F403
from .manakov import (DBParams, RWParams, SeedPair, db_soliton, make_seed, plane_wave,
                      rogue_wave_I, rogue_wave_II)
from .numsolver import EvolutionConfig, crosscheck, evolve
from .riccati import (ClosedForm, FundamentalPair, NDRiccatiInit, RiccatiInit, RiccatiState,
                      blowup_time, closed_form, fundamental_solutions, modified_ode,
                      nd_closed_form, nd_ode, ode_oracle)
from .transform import (BlowupParams, FieldPair, LiftedSolution, NDLiftedSolution,
                        blowup_solution, check_integrability, lift, lift_nd, sample_field)
from .verify import (ConvergenceReport, Grid, ResidualReport, blowup_scan, convergence_study,
                     ladder, residual_manakov, residual_nd, residual_vcnls, seed_window,
                     window_grids)

__version__ = "0.1.0"
