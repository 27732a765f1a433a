"""Frequency-domain simulator of quantum measurement chains.

Devices are modeled as scattering networks fed by semi-infinite thermal
lines; amplifiers carry conjugated noise channels enforcing the quantum
consistency of gain.  The package computes scattering maps, checks
commutator preservation, extracts normalized signal estimators and
equivalent-input-noise budgets, chains stages, and ships a cold-damped
accelerometer preset.
"""

from .spectra import (CONSTANTS, HBAR, K_B, FrequencyGrid, NoiseSpectrum,
                      PhysicalConstants, bath_temperature,
                      effective_temperature, johnson_voltage_psd,
                      thermal_occupation)
from .network import (DEFAULT_TOLERANCE, Capacitor, Channel,
                      EstimatorCoefficients, Feedback, Inductor,
                      NoTransductionError, OpAmp, PortSpec, QuantumNetwork,
                      ScatteringMap, SingularNetworkError, assemble_network,
                      check_commutators, commutator_residual,
                      estimator_from_scattering, two_port_estimator)
from .amplifier import (MatchingResult, NoFeedbackError, NoiseBudget,
                        OpAmpStage, added_noise, added_noise_closed_form,
                        gain, matching_scan, stage_added_noise,
                        stage_estimator, stage_scattering,
                        with_gain_magnitude)
from .cascade import (StageChain, chain_added_noise, chain_estimator,
                      classical_gain_threshold, downstream_noise_fraction,
                      merge_chain_estimators)
from .accelerometer import (MICROSCOPE, PRESETS, AcceleroParams,
                            ForceEstimator, Preset, acceleration_sensitivity,
                            accelerometer_budget, cold_damped_temperature,
                            force_estimator_free, force_estimator_servo,
                            get_preset, is_detection_limited,
                            langevin_force_psd, servo_invariance_check)
from .netlist import NetlistDocument, NetlistError, parse, serialize, to_network

__version__ = "0.1.0"
