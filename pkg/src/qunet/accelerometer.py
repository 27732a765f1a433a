"""Cold-damped capacitive accelerometer as a built-in network instance.

A proof mass inside an electrode cage is read out capacitively at a carrier
frequency well above the measurement band, the bridge signal is amplified
by an op-amp stage with capacitive feedback, demodulated, and fed back to
keep the mass centered.  The estimator of the external force normalizes the
correction signal so the force coefficient is one; its added noise combines
the mechanical Langevin force of the residual damping with the detection
noise referred to force units.

The electromechanical coupling between detection fields and force is an
explicit user parameter (``transduction_gain``, newton per normalized field
unit): the bridge electromechanics are instrument-specific and no default
can claim generality.  The built-in ``microscope`` preset uses a
deliberately small placeholder value, matching the regime where the
mechanical Langevin term dominates the budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .amplifier import NoiseBudget, OpAmpStage, added_noise, stage_estimator
from .cascade import StageChain, chain_estimator
from .network import Feedback
from .spectra import HBAR, K_B, bath_temperature

FORCE_UNITS = "(kg m s^-2)^2/Hz"


@dataclass(frozen=True)
class AcceleroParams:
    """Instrument parameters of the accelerometer model.

    ``amp_noise_theta`` and ``mech_theta`` are effective temperatures
    (energy per mode over k_B) of the detection amplifier and of the
    mechanical bath.  ``mech_damping`` may be zero for an idealized
    dissipation-free proof mass.
    """

    mass: float                  # kg
    mech_damping: float          # kg/s
    measurement_omega: float     # rad/s, motion band
    carrier_omega: float         # rad/s, transducer operating frequency
    amp_noise_impedance: float   # Ohm
    amp_noise_theta: float       # K
    mech_theta: float = 300.0    # K

    def __post_init__(self):
        if float(self.mass) <= 0.0:
            raise ValueError("mass must be > 0 kg")
        if float(self.mech_damping) < 0.0:
            raise ValueError("mechanical damping must be >= 0 kg/s")
        for label, w in (("measurement_omega", self.measurement_omega),
                         ("carrier_omega", self.carrier_omega)):
            if float(w) <= 0.0:
                raise ValueError(f"{label} must be > 0 rad/s")
        if not float(self.measurement_omega) < float(self.carrier_omega):
            raise ValueError("the measurement band must sit below the carrier")
        if float(self.amp_noise_impedance) <= 0.0:
            raise ValueError("amplifier noise impedance must be > 0 Ohm")
        if float(self.amp_noise_theta) < 0.0 or float(self.mech_theta) < 0.0:
            raise ValueError("effective temperatures must be >= 0 K")


def langevin_force_psd(params: AcceleroParams) -> float:
    """Mechanical Langevin force PSD 2 H_m k_B Theta_m, force^2/Hz."""
    return 2.0 * float(params.mech_damping) * K_B * float(params.mech_theta)


def acceleration_sensitivity(params: AcceleroParams,
                             force_psd: float | None = None) -> float:
    """Acceleration amplitude spectral density sqrt(Sigma_FF)/M.

    Uses the Langevin force PSD when no total is supplied.
    """
    psd = langevin_force_psd(params) if force_psd is None else float(force_psd)
    if psd < 0.0:
        raise ValueError("force PSD must be >= 0")
    return math.sqrt(psd) / float(params.mass)


LANGEVIN_SOURCE = "langevin"


def accelerometer_budget(params: AcceleroParams,
                         stage: OpAmpStage | None = None,
                         transduction_gain: float | None = None) -> NoiseBudget:
    """Force-referred noise budget at the measurement frequency.

    The detection stage is evaluated at the carrier (the measurement band
    appears as sidebands of an ideal demodulation, which adds nothing
    beyond the stage model) and referred to force through
    ``transduction_gain``.  Passing a stage without a transduction gain is
    an error: the coupling is instrument physics this model refuses to
    invent.
    """
    contributions: dict[str, float] = {LANGEVIN_SOURCE: langevin_force_psd(params)}
    if stage is not None:
        if transduction_gain is None:
            raise ValueError(
                "a detection stage needs an explicit transduction gain "
                "(newton per normalized field unit) to be referred to force")
        g2 = float(transduction_gain) ** 2
        w_t = float(params.carrier_omega)
        est = stage_estimator(stage, w_t)
        detection = added_noise(est, stage.temperatures(), w_t)
        for name, value in detection.contributions.items():
            contributions[name] = g2 * value
    return NoiseBudget.from_contributions(params.measurement_omega, contributions)


def is_detection_limited(budget: NoiseBudget) -> bool:
    """True when the detection rows outweigh the mechanical Langevin row."""
    langevin = budget.contributions.get(LANGEVIN_SOURCE, 0.0)
    detection = sum(v for k, v in budget.contributions.items()
                    if k != LANGEVIN_SOURCE)
    return detection > langevin


@dataclass(frozen=True)
class ForceEstimator:
    """Force readout normalized so the external-force coefficient is one.

    ``weights`` maps each noise source to its force-referred weight; the
    Langevin force enters with weight one since it acts on the proof mass
    exactly like the measured force.
    """

    weights: dict[str, complex]
    signal: str = "F_ext"

    def sources(self) -> tuple[str, ...]:
        return tuple(self.weights)

    def with_sources(self, names) -> "ForceEstimator":
        """Zero-extend the weight table to cover ``names``."""
        weights = {n: self.weights.get(n, 0j) for n in names}
        for k, v in self.weights.items():
            weights.setdefault(k, v)
        return ForceEstimator(weights=weights, signal=self.signal)


def force_estimator_free(params: AcceleroParams, stage: OpAmpStage,
                         transduction_gain: float) -> ForceEstimator:
    """Force estimator with the servo loop open."""
    est = stage_estimator(stage, params.carrier_omega)
    g = float(transduction_gain)
    weights: dict[str, complex] = {LANGEVIN_SOURCE: 1.0}
    for src, mu in est.noise_weights().items():
        weights[src] = g * mu
    return ForceEstimator(weights=weights)


def force_estimator_servo(params: AcceleroParams, stage: OpAmpStage,
                          transduction_gain: float,
                          servo_stage: OpAmpStage | None = None) -> ForceEstimator:
    """Force estimator reconstructed from the servo correction signal.

    The loop reads the detection output with a further amplification stage
    (the feedback amplifier) and, in the infinite-loop-gain limit, the
    correction signal carries the same estimator as the free case.  The
    detection stage sits inside the loop, so its gain at the carrier is the
    loop gain: the feedback amplifier's own sources appear suppressed by
    exactly that factor, and the shared weights match the free estimator
    identically.
    """
    servo = servo_stage if servo_stage is not None else stage
    chain = StageChain((stage, servo))
    est = chain_estimator(chain, params.carrier_omega)
    g = float(transduction_gain)
    weights: dict[str, complex] = {LANGEVIN_SOURCE: 1.0}
    for src, mu in est.noise_weights().items():
        weights[src] = g * mu
    return ForceEstimator(weights=weights)


def servo_invariance_check(estimator_free: ForceEstimator,
                           estimator_servo: ForceEstimator,
                           tol: float = 1e-10) -> bool:
    """Pointwise agreement of two force-estimator weight tables.

    Both estimators must cover the same source set (zero-extend first when
    comparing open-loop and closed-loop tables); a mismatch is an error,
    not a False.
    """
    a, b = estimator_free.weights, estimator_servo.weights
    if set(a) != set(b):
        missing = set(a) ^ set(b)
        raise ValueError(f"mismatched source sets, differing on {sorted(missing)}")
    return all(abs(a[k] - b[k]) <= tol for k in a)


def cold_damped_temperature(params: AcceleroParams,
                            detection_force_psd: float,
                            feedback_damping: float) -> float:
    """Effective temperature of the cold-damped motion.

    Ratio of the total force noise to the total damping, in the
    fluctuation-dissipation sense: (2 H_m k_B Theta_m + Sigma_det) /
    (2 k_B (H_m + H_fb)).  With the synthesized friction dominating
    (H_fb > H_m) and the detection noise below the Langevin term, this
    falls strictly below the physical bath temperature.
    """
    if detection_force_psd < 0.0:
        raise ValueError("detection force PSD must be >= 0")
    if feedback_damping < 0.0:
        raise ValueError("feedback damping must be >= 0 kg/s")
    h_total = float(params.mech_damping) + float(feedback_damping)
    if h_total == 0.0:
        raise ValueError("undamped mass has no stationary effective temperature")
    return (langevin_force_psd(params) + float(detection_force_psd)) / (2.0 * K_B * h_total)


@dataclass(frozen=True)
class Preset:
    name: str
    params: AcceleroParams
    stage: OpAmpStage
    transduction_gain: float
    description: str


def _microscope_preset() -> Preset:
    params = AcceleroParams(
        mass=0.27,
        mech_damping=1.3e-5,
        measurement_omega=2.0 * math.pi * 5e-4,
        carrier_omega=2.0 * math.pi * 1e5,
        amp_noise_impedance=0.15e6,
        amp_noise_theta=1.5,
        mech_theta=300.0,
    )
    w_t = params.carrier_omega
    r_a = params.amp_noise_impedance
    # Bath temperature reproducing the quoted effective amplifier temperature
    # at the carrier (deep classical regime, so numerically ~1.5 K).
    sigma_a = K_B * params.amp_noise_theta / (HBAR * w_t)
    t_a = bath_temperature(w_t, sigma_a)
    # Matched detection stage; feedback capacitance placed for |G| = 1e4 at
    # the carrier.  Both are instrument-model defaults, not published values.
    gain_mag = 1e4
    c_f = 2.0 / (w_t * gain_mag * r_a)
    stage = OpAmpStage(r_left=r_a, r_right=r_a, noise_impedance=r_a,
                       feedback=Feedback.capacitive(c_f),
                       noise_temp=t_a, conj_temp=0.0, readout_temp=0.0)
    return Preset(
        name="microscope",
        params=params,
        stage=stage,
        # Placeholder coupling, small enough that detection noise stays well
        # below the mechanical Langevin floor.
        transduction_gain=1e-14,
        description="cold-damped capacitive space microaccelerometer",
    )


PRESETS: dict[str, Preset] = {"microscope": _microscope_preset()}

MICROSCOPE = PRESETS["microscope"]


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")


def preset_with_overrides(name: str, mech_theta: float | None = None,
                          mech_damping: float | None = None,
                          transduction_gain: float | None = None) -> Preset:
    preset = get_preset(name)
    params = preset.params
    if mech_theta is not None:
        params = replace(params, mech_theta=float(mech_theta))
    if mech_damping is not None:
        params = replace(params, mech_damping=float(mech_damping))
    gain = preset.transduction_gain if transduction_gain is None else float(transduction_gain)
    return replace(preset, params=params, transduction_gain=gain)
