"""flatphase: oscillatory integrals with exponentially flat phase terms.

Stable evaluation of the integral family built on the phase
sign*x2^q + e^{-1/|x1|^p}, extrapolation of the slowly convergent scaled
values in 1/log t, and a 2D Newton-polyhedron rate predictor.
"""

from .asymptotics import (GridSpec, LimitEstimate, ScalingLaw,
                          VerificationReport, check_bound, extrapolate,
                          scaled_value, verify_lemma21, verify_theorem11)
from .newton import newton_distance, polyhedron, predicted_law
from .phases import (FlatPhaseParams, ProductAmplitude, RadialBumpAmplitude,
                     cutoff_pair, default_support_radius, flat_inverse,
                     flat_term, standard_bump)
from .pieces import (EvalRequest, PieceId, PieceValue, eval_I2d,
                     eval_K1_factor, eval_L, eval_L1, eval_L2, eval_M1,
                     eval_M2, eval_piece, eval_S_power)
from .quadrature import (Interval, QuadratureResult, ToleranceConfig,
                         integrate_adaptive, integrate_filon,
                         integrate_oscillatory, oscillatory_tail)
from .specfun import (TheoremConstant, c_constant, e1_tail, gamma_real,
                      principal_power, sin_cos_integrals)

__version__ = "0.1.0"
