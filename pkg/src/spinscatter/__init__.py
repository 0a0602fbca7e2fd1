"""Resonance fluorescence of a driven charged-emitter spin in a transverse field.

Exact Lindblad numerics and weak-excitation closed forms for the
cross-polarized first-order correlation and emission spectrum.
"""

from .analytic import (BlochSolution, EffectiveRates, Regime, SpectralCoefficients, analytic_g1,
                       analytic_spectrum, bloch_evolve, classify_regime, effective_rates,
                       spectral_coefficients, tls_limit_g1, tls_limit_spectrum)
from .correlation import (CorrelationTrace, Peak, PeakReport, Spectrum, default_grid, numeric_g1,
                          numeric_spectrum, peak_analysis, resolved_grid, spectrum_by_quadrature)
from .errors import (ConsistencyError, CriticalDampingError, GridTooCoarseError, InvalidParameterError,
                     SingularParameterError, SpinScatterError, UnsupportedConfigurationError)
from .liouville import (DensityMatrix, Liouvillian, SteadyState, build_liouvillian, propagate,
                        steady_state)
from .model import (Basis, BlochVector, CavityParams, ModelParams, Operator4, cavity_reduction,
                    empty_cavity_reflection, standard_operators, system_hamiltonian, voigt_transform)
from .validate import ComparisonReport, Tolerances, breakdown_sweep, compare_spectra, dephasing_sweep

__version__ = "0.1.0"
