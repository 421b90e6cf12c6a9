from .kernel import ProblemConfig, exactness_basis, green_value, f_value
from .dense_solver import QuadratureRule
from .discrete_operator import DiscreteOperator, build, for_grid
from .analysis import error_norm_squared, optimal_rule
from .closed_form import weights_m1, weights_m3
