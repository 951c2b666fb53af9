"""
Special functions and quadrature serving as numerical ground truth
"""

from src.specfun.quadrature import QuadratureConfig, integrate_adaptive
from src.specfun.special_functions import ci, si_shifted, si_standard
