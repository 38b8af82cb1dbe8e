"""Perturbed Arnold cat map toolkit.

Library + CLI for the perturbed hyperbolic torus map S_eps = S0 + eps f:
perturbative conjugation and SRB expansion rates, exact eps-order cumulants
of the phase-space contraction rate, the perturbative large-deviation
functional and order-by-order fluctuation-relation checks, deterministic
Monte Carlo experiments, and Markov-partition symbolic coding for the
unperturbed map.
"""

from .torus import (CatSystem, HarmonicForce, Harmonic, IntMatrix2,
                    SpectralData, TorusPoint, matrix_power, sigma, spectral,
                    step, time_reversal)
from .trig import TrigPoly, Truncation, geometric_sum, quadrature_average
from .conjugation import (ConjugationSeries, ExpansionRateSeries, OrderSeries,
                          RadiusEstimate, RateSeries, conjugacy_residual,
                          conjugation_order1, conjugation_order_k,
                          expansion_rate_series, radius_estimate, rates_order1,
                          rates_order_k)
from .cumulants import (CorrelationEngine, CumulantTable, ObservableSeries,
                        TransportMatrix, build_table, sigma_series,
                        transport_matrix)
from .fluctuation import (FTReport, LambdaSeries, ZetaSeries,
                          asymmetry_coefficients, beta_star, check_rel1,
                          check_rel3, ft_report, lambda_from_cumulants,
                          legendre_oracle, observable_mean_expansion, zeta,
                          zeta_closed_form, zeta_ft_imposed)
from .simulate import (FitResult, RatioCurve, RunStats, SimConfig,
                       SlopeResult, build_curve, fit_models,
                       measure_asymmetry, ratio_curve, simulate, slope_and_A)
from .partition import (CatCoder, MarkovPartition, MarkovReport, Rectangle,
                        SymbolWindow, TransitionMatrix, birkhoff_frequencies,
                        build_cat_partition, partition_from_json,
                        partition_to_json, transition_matrix, verify_markov)

__version__ = "0.1.0"
