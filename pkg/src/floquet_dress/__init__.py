"""Floquet-dressed states of RF-dressed magnetic traps beyond the rotating-wave approximation."""

from .constants import GAUSS, KHZ, MA, MICRON, RB87_F2, Atom
from .errors import (ConfigError, DegenerateFitError, DegenerateFrameError, DomainError, DressError,
                     FitNonConvergenceError, IntegrationFailureError, InvalidArgumentError,
                     LabelingAmbiguityError, NumericFailureError, SingularityError, TopologyError,
                     TrackingError)
from .spin import hermitian_eig, spin_matrices
from .magnetostatics import BiasField, FieldConfig, IoffeTrapModel, WireSpec, WireTrap
from .local_frame import LocalFrame, corotating_amplitude, decompose, rwa_params
from .hamiltonian import (BareBasis, DressedHamiltonian, Scenario, build_basis, build_full,
                          build_rwa_restriction, central_kappa, rwa_potential)
from .solver import (AdiabaticPotential, DoubleWellMetrics, LabeledSpectrum, LevelTracker, double_well_metrics,
                     dress, label_levels, labeled_spectrum, potential_curve, trap_minimum)
from .floquet import floquet_oracle, quasi_energies
from .spectroscopy import (TransitionLine, bloch_siegert_shift, resonance_chain, scan_resonances,
                           transition_elements, trap_point)
from .fitting import ResonanceDataset, fit_model, read_dataset, synthesize_dataset, write_dataset

__version__ = "0.1.0"
