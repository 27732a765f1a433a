"""Ideal operational-amplifier measurement stage.

The stage couples a signal line l (impedance R_l) and a readout line r
(impedance R_r) through an ideal op-amp (infinite gain, infinite input
impedance, null output impedance) closed by a reactive feedback impedance
Z_f.  The amplifier noise is carried by a voltage generator U and a current
generator I built from one normal noise channel a and one conjugated
channel a':

    U = sqrt(hbar |w| R_a / 2)   (a - a')
    I = sqrt(hbar |w| / (2 R_a)) (a + a')

so that [U, I] equals hbar w times the canonical delta normalization, the
Heisenberg pair that enforces the amplifier quantum limit.  R_a (elsewhere
written R_0) is the noise impedance, sqrt(sigma_UU / sigma_II), taken
frequency-constant here.

Solving the stage equations gives the input-output relations

    l_out = -l_in + sqrt(2/(hbar |w| R_l)) U
    r_out = -r_in - (2 Z_f / sqrt(R_r R_l)) l_in
            + sqrt(2/(hbar |w| R_r)) ((R_l + Z_f)/R_l U - Z_f I)

and the normalized-field gain G = -2 Z_f / sqrt(R_r R_l).  Dividing the
readout by G yields the signal estimator

    l_hat = l_in + mu_r r_in + mu_a a_in + mu_a' a'_in
    mu_r  = sqrt(R_l R_r) / (2 Z_f)
    mu_a  = -(sqrt(R_l R_a)/2) (1/Z_f + 1/R_l - 1/R_a)
    mu_a' = +(sqrt(R_l R_a)/2) (1/Z_f + 1/R_l + 1/R_a)

whose weighted thermal spectra form the equivalent input noise.  At matched
noise impedance (R_a = R_l), zero temperatures and large gain the added
noise tends to the vacuum half-quantum: the 3 dB quantum limit of
phase-insensitive amplification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .network import Channel, EstimatorCoefficients, Feedback, ScatteringMap
from .spectra import thermal_occupation


class NoFeedbackError(ValueError):
    """Raised when Z_f = 0: without feedback there is no readout."""


@dataclass(frozen=True)
class OpAmpStage:
    """One amplification stage and the temperatures of its noise inputs.

    ``noise_temp`` and ``conj_temp`` are the bath temperatures of the two
    amplifier noise lines (the conjugated line is the one worth cooling:
    at large gain it is the only surviving noise source).  ``readout_temp``
    is the bath temperature of the readout line.
    """

    r_left: float
    r_right: float
    noise_impedance: float
    feedback: Feedback
    noise_temp: float = 0.0
    conj_temp: float = 0.0
    readout_temp: float = 0.0
    allow_dissipative_feedback: bool = False

    def __post_init__(self):
        for label, r in (("r_left", self.r_left), ("r_right", self.r_right),
                         ("noise_impedance", self.noise_impedance)):
            if not math.isfinite(float(r)) or float(r) <= 0.0:
                raise ValueError(f"{label} must be finite and > 0, got {r!r}")
        for label, t in (("noise_temp", self.noise_temp),
                         ("conj_temp", self.conj_temp),
                         ("readout_temp", self.readout_temp)):
            if float(t) < 0.0:
                raise ValueError(f"{label} must be >= 0 K, got {t!r}")
        if not self.feedback.is_reactive and not self.allow_dissipative_feedback:
            raise ValueError("dissipative feedback breaks the stage's quantum "
                             "consistency; pass allow_dissipative_feedback=True "
                             "to study it anyway")

    def feedback_impedance(self, omega: float) -> complex:
        return self.feedback.impedance(omega)

    def temperatures(self) -> dict[str, float]:
        """Bath temperature of each noise source seen by the estimator."""
        return {"r": float(self.readout_temp), "a": float(self.noise_temp),
                "a'": float(self.conj_temp)}


SIGNAL = "l"
READOUT = "r"


def gain(stage: OpAmpStage, omega: float) -> complex:
    """Normalized-field gain G = -2 Z_f / sqrt(R_r R_l)."""
    zf = stage.feedback_impedance(omega)
    return -2.0 * zf / math.sqrt(stage.r_right * stage.r_left)


def stage_scattering(stage: OpAmpStage, omega: float) -> ScatteringMap:
    """Input-output map of the stage over channels (l, r, a, a').

    Outputs are the two accessible fields l_out (back action) and r_out
    (readout); the map preserves the field commutators whenever the
    feedback is reactive.
    """
    w = abs(float(omega))
    if w == 0.0:
        raise ValueError("omega = 0 is outside the model")
    rl, rr, ra = stage.r_left, stage.r_right, stage.noise_impedance
    zf = stage.feedback_impedance(w)
    kl = math.sqrt(ra / rl)
    kr = math.sqrt(ra / rr)
    row_l = [-1.0, 0.0, kl, -kl]
    amp_u = (1.0 + zf / rl) * kr           # U weight into r_out
    amp_i = zf / math.sqrt(ra * rr)        # I weight into r_out
    row_r = [-2.0 * zf / math.sqrt(rr * rl), -1.0, amp_u - amp_i, -amp_u - amp_i]
    outputs = (Channel("l"), Channel("r"))
    inputs = (Channel("l"), Channel("r"), Channel("a"), Channel("a'", conjugated=True))
    return ScatteringMap(w, [row_l, row_r], outputs, inputs)


def stage_estimator(stage: OpAmpStage, omega: float) -> EstimatorCoefficients:
    """Equivalent-input-noise weights of the stage readout.

    Equals the readout row of :func:`stage_scattering` divided by the gain;
    both paths are kept as independent implementations on purpose.
    """
    w = abs(float(omega))
    if w == 0.0:
        raise ValueError("omega = 0 is outside the model")
    zf = stage.feedback_impedance(w)
    if zf == 0:
        raise NoFeedbackError("Z_f = 0: no feedback, no readout")
    rl, rr, ra = stage.r_left, stage.r_right, stage.noise_impedance
    half_lra = math.sqrt(rl * ra) / 2.0
    weights = {
        SIGNAL: 1.0,
        "r": math.sqrt(rl * rr) / (2.0 * zf),
        "a": -half_lra * (1.0 / zf + 1.0 / rl - 1.0 / ra),
        "a'": half_lra * (1.0 / zf + 1.0 / rl + 1.0 / ra),
    }
    kl = math.sqrt(ra / rl)
    back_action = {"l": -1.0 + 0j, "r": 0j, "a": kl + 0j, "a'": -kl + 0j}
    return EstimatorCoefficients(signal=SIGNAL, weights=weights,
                                 gain=gain(stage, w), back_action=back_action)


@dataclass(frozen=True)
class NoiseBudget:
    """Per-source equivalent input noise at one frequency.

    ``total`` is the plain sum of the contributions (the sources are
    mutually uncorrelated), so additivity is exact by construction.
    """

    omega: float
    contributions: dict[str, float]
    total: float

    @classmethod
    def from_contributions(cls, omega: float, contributions: dict[str, float]):
        contributions = dict(contributions)
        return cls(omega=float(omega), contributions=contributions,
                   total=sum(contributions.values()))

    def sorted_items(self) -> list[tuple[str, float]]:
        return sorted(self.contributions.items(), key=lambda kv: (-kv[1], kv[0]))


def added_noise(estimator: EstimatorCoefficients, temperatures,
                omega: float) -> NoiseBudget:
    """Total added noise Sigma = sum over sources of |mu|^2 sigma(omega, T).

    ``temperatures`` maps every non-signal source of the estimator to the
    bath temperature of its line; a missing entry is an error naming the
    source.
    """
    contributions: dict[str, float] = {}
    for name, mu in estimator.weights.items():
        if name == estimator.signal:
            continue
        if name not in temperatures:
            raise KeyError(f"no temperature given for noise source {name!r}")
        contributions[name] = abs(mu) ** 2 * thermal_occupation(omega, temperatures[name])
    return NoiseBudget.from_contributions(omega, contributions)


def stage_added_noise(stage: OpAmpStage, omega: float) -> NoiseBudget:
    """Added noise of a stage with its own line temperatures."""
    return added_noise(stage_estimator(stage, omega), stage.temperatures(), omega)


def added_noise_closed_form(stage: OpAmpStage, omega: float) -> float:
    """Added noise from the explicit three-term spectral sum.

    Independent of the estimator path: evaluates
    R_l R_r/(4 |Z_f|^2) sigma_rr
    + (R_l R_a/4) |1/Z_f + 1/R_l - 1/R_a|^2 sigma_aa
    + (R_l R_a/4) |1/Z_f + 1/R_l + 1/R_a|^2 sigma_a'a'
    directly, for use as an oracle against :func:`stage_added_noise`.
    """
    w = abs(float(omega))
    zf = stage.feedback_impedance(w)
    if zf == 0:
        raise NoFeedbackError("Z_f = 0: no feedback, no readout")
    rl, rr, ra = stage.r_left, stage.r_right, stage.noise_impedance
    s_r = thermal_occupation(w, stage.readout_temp)
    s_a = thermal_occupation(w, stage.noise_temp)
    s_ap = thermal_occupation(w, stage.conj_temp)
    return (rl * rr / (4.0 * abs(zf) ** 2) * s_r
            + rl * ra / 4.0 * abs(1.0 / zf + 1.0 / rl - 1.0 / ra) ** 2 * s_a
            + rl * ra / 4.0 * abs(1.0 / zf + 1.0 / rl + 1.0 / ra) ** 2 * s_ap)


def with_gain_magnitude(stage: OpAmpStage, omega: float,
                        gain_magnitude: float) -> OpAmpStage:
    """Replace the feedback by a constant reactance giving |G(omega)| as asked.

    The sign of the reactance follows the current feedback when it is
    reactive, defaulting to positive.
    """
    if gain_magnitude <= 0.0:
        raise ValueError("gain magnitude must be > 0")
    x = gain_magnitude * math.sqrt(stage.r_right * stage.r_left) / 2.0
    current = stage.feedback_impedance(omega)
    if current.imag < 0:
        x = -x
    return replace(stage, feedback=Feedback.reactance(x))


@dataclass(frozen=True)
class MatchingResult:
    """Outcome of a noise-impedance scan."""

    noise_impedance: float
    index: int
    grid: tuple[float, ...]
    sigmas: tuple[float, ...]
    at_boundary: bool


def matching_scan(stage: OpAmpStage, noise_impedances, omega: float) -> MatchingResult:
    """Scan R_a and locate the added-noise minimum.

    In the large-gain, equal-temperature regime the optimum sits at
    R_a = R_l (noise matching).  A minimum on the grid edge, including the
    degenerate single-point grid, is reported with ``at_boundary`` set.
    """
    grid = tuple(float(r) for r in noise_impedances)
    if not grid:
        raise ValueError("noise impedance grid is empty")
    sigmas = []
    for ra in grid:
        trial = replace(stage, noise_impedance=ra)
        sigmas.append(stage_added_noise(trial, omega).total)
    idx = min(range(len(grid)), key=lambda i: (sigmas[i], i))
    return MatchingResult(noise_impedance=grid[idx], index=idx, grid=grid,
                          sigmas=tuple(sigmas),
                          at_boundary=(idx == 0 or idx == len(grid) - 1))


def generator_psds(stage: OpAmpStage, omega: float) -> tuple[float, float]:
    """Voltage and current noise generator PSDs (V^2/Hz, A^2/Hz).

    sigma_UU = (hbar |w| R_a / 2)(sigma_aa + sigma_a'a') and its current
    counterpart with R_a below the bar; their ratio is R_a^2 regardless of
    the temperatures, which is what defines the noise impedance.
    """
    from .spectra import HBAR

    w = abs(float(omega))
    occ = (thermal_occupation(w, stage.noise_temp)
           + thermal_occupation(w, stage.conj_temp))
    sigma_uu = HBAR * w * stage.noise_impedance / 2.0 * occ
    sigma_ii = HBAR * w / (2.0 * stage.noise_impedance) * occ
    return sigma_uu, sigma_ii


def heisenberg_product_check(stage: OpAmpStage, omega: float) -> float:
    """Coefficient-level check of the generator pair normalization.

    The bilinear [U, I] form reduces to c_U c_I times twice the channel
    signature sum; with the adopted prefactors that equals hbar |omega|,
    the canonical value.  Returns the relative defect (0 when exact).
    """
    from .spectra import HBAR

    w = abs(float(omega))
    cu = math.sqrt(HBAR * w * stage.noise_impedance / 2.0)
    ci = math.sqrt(HBAR * w / (2.0 * stage.noise_impedance))
    return abs(cu * ci * 2.0 - HBAR * w) / (HBAR * w)
