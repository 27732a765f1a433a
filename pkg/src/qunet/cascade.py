"""Series composition of measurement stages.

Stage coupling is feed-forward: the readout wave of stage k is the signal
of stage k+1, and each stage keeps an independent thermal input on its
readout line.  Composing the per-stage estimators is then exact
substitution: the deeper a stage sits, the more its noise sources are
suppressed, by the product of all upstream gains.  With a large first-stage
gain the downstream electronics contributes a vanishing fraction of the
total noise and may be treated as classical; the crossover gain for any
target excess is exposed by :func:`classical_gain_threshold`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .amplifier import (NoiseBudget, OpAmpStage, added_noise, gain,
                        stage_estimator)
from .network import EstimatorCoefficients

# Per-stage source letters; 'l' and 'r' are reserved for the signal and
# readout lines.
_LETTERS = "abcdefghijkmnopqstuvwxyz"

SIGNAL = "l"


def noise_letter(stage_index: int) -> str:
    if stage_index >= len(_LETTERS):
        raise ValueError("chain too deep for the source naming scheme")
    return _LETTERS[stage_index]


def readout_name(stage_index: int) -> str:
    return "r" + "'" * stage_index


def stage_source_names(stage_index: int) -> tuple[str, str, str]:
    """(readout, noise, conjugated-noise) source names of one stage."""
    letter = noise_letter(stage_index)
    return (readout_name(stage_index), letter, letter + "'")


@dataclass(frozen=True)
class StageChain:
    """Ordered amplification stages, first one the preamplifier.

    The readout line of stage k must have the same impedance as the input
    line of stage k+1: the chained fields are identified literally, with no
    hidden matching network, so a mismatch is rejected.
    """

    stages: tuple[OpAmpStage, ...]

    def __post_init__(self):
        stages = tuple(self.stages)
        if not stages:
            raise ValueError("a chain needs at least one stage")
        if len(stages) > len(_LETTERS):
            raise ValueError("chain too deep for the source naming scheme")
        for k, (up, down) in enumerate(zip(stages, stages[1:])):
            if up.r_right != down.r_left:
                raise ValueError(
                    f"impedance mismatch between stage {k} readout line "
                    f"({up.r_right!r} Ohm) and stage {k + 1} input line "
                    f"({down.r_left!r} Ohm); chained fields must share a line")
        object.__setattr__(self, "stages", stages)

    def __len__(self) -> int:
        return len(self.stages)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return StageChain(self.stages[item])
        return self.stages[item]

    def __add__(self, other: "StageChain") -> "StageChain":
        return StageChain(self.stages + other.stages)

    def source_names(self) -> tuple[str, ...]:
        names: list[str] = []
        for k in range(len(self.stages)):
            names.extend(stage_source_names(k))
        return tuple(names)

    def temperatures(self) -> dict[str, float]:
        temps: dict[str, float] = {}
        for k, stage in enumerate(self.stages):
            r_name, a_name, ap_name = stage_source_names(k)
            temps[r_name] = float(stage.readout_temp)
            temps[a_name] = float(stage.noise_temp)
            temps[ap_name] = float(stage.conj_temp)
        return temps


def _shift_source_name(name: str, offset: int) -> str:
    base = name.rstrip("'")
    primes = len(name) - len(base)
    if base == "r":
        return readout_name(primes + offset)
    idx = _LETTERS.index(base)
    return noise_letter(idx + offset) + "'" * primes


def chain_estimator(chain: StageChain, omega: float) -> EstimatorCoefficients:
    """Signal estimator of the full chain read at the last stage.

    Stage 1 keeps its single-stage weights exactly; every deeper stage's
    sources enter divided by the product of all upstream gains.  The total
    gain of the chain is the product of the stage gains.
    """
    weights: dict[str, complex] = {SIGNAL: 1.0}
    upstream_gain: complex = 1.0
    for k, stage in enumerate(chain.stages):
        est = stage_estimator(stage, omega)
        r_name, a_name, ap_name = stage_source_names(k)
        local = {"r": r_name, "a": a_name, "a'": ap_name}
        for src, mu in est.noise_weights().items():
            weights[local[src]] = mu / upstream_gain
        upstream_gain = upstream_gain * est.gain
    return EstimatorCoefficients(signal=SIGNAL, weights=weights,
                                 gain=upstream_gain)


def merge_chain_estimators(upstream: EstimatorCoefficients,
                           upstream_length: int,
                           downstream: EstimatorCoefficients) -> EstimatorCoefficients:
    """Compose the estimator of a front chain with that of a back chain.

    The downstream estimator is read as measuring the upstream readout
    field: its sources are renamed past the upstream stages and scaled by
    the upstream gain.  Folding a chain in any grouping gives the same
    result as :func:`chain_estimator` on the concatenated chain.
    """
    weights = dict(upstream.weights)
    for src, mu in downstream.noise_weights().items():
        weights[_shift_source_name(src, upstream_length)] = mu / upstream.gain
    return EstimatorCoefficients(signal=upstream.signal, weights=weights,
                                 gain=upstream.gain * downstream.gain)


def chain_added_noise(chain: StageChain, omega: float,
                      temperatures=None) -> NoiseBudget:
    temps = chain.temperatures()
    if temperatures:
        temps.update(temperatures)
    return added_noise(chain_estimator(chain, omega), temps, omega)


def downstream_noise_fraction(chain: StageChain, omega: float,
                              temperatures=None) -> float:
    """Fraction of the total added noise due to stages after the first.

    Zero for a single stage; falls off as 1/|G|^2 in the first-stage gain
    (power suppression by the preamplification).
    """
    budget = chain_added_noise(chain, omega, temperatures)
    if budget.total == 0.0:
        return 0.0
    first = set(stage_source_names(0))
    downstream = sum(v for k, v in budget.contributions.items() if k not in first)
    return downstream / budget.total


def classical_gain_threshold(chain: StageChain, omega: float,
                             eps: float) -> float:
    """First-stage gain above which the chain adds less than eps over stage 1.

    The excess Sigma_chain - Sigma_first is carried entirely by downstream
    sources and scales exactly as 1/|G1|^2, so the threshold follows from
    one evaluation of the chain.
    """
    if eps <= 0.0:
        raise ValueError("eps must be > 0")
    if len(chain) < 2:
        return 0.0
    budget = chain_added_noise(chain, omega)
    first = set(stage_source_names(0))
    excess = sum(v for k, v in budget.contributions.items() if k not in first)
    g1 = abs(gain(chain.stages[0], omega))
    return g1 * math.sqrt(excess / eps)
