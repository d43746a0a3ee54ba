"""Independent brute-force checks for the formula modules."""
from .continuum import (DECAYING, ContinuumBasisFunction, continuum_space_dim,
                        negative_divisor_equality_experiment, riemann_roch_experiment,
                        rrl_gap_experiment)
from .dedekind import DedekindCertificate, dedekind_shifts
from .floquet_poly import (FloquetPolynomialBasis, SampledFunction, materialize, residual_on_window,
                           twisted_difference, vinf_dim_oracle)
from .green import green_function, truncated_L_dim_estimate

__all__ = [
    "DECAYING", "ContinuumBasisFunction", "continuum_space_dim", "negative_divisor_equality_experiment",
    "riemann_roch_experiment", "rrl_gap_experiment", "DedekindCertificate", "dedekind_shifts",
    "FloquetPolynomialBasis", "SampledFunction", "materialize", "residual_on_window",
    "twisted_difference", "vinf_dim_oracle", "green_function", "truncated_L_dim_estimate",
]
