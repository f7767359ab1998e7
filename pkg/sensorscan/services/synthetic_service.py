"""Service layer para o gerador sintético de processo."""

import math

import numpy as np
from scipy.signal import lfilter

from sensorscan.schemas.data import (
    NORMAL_STATE,
    FaultDescriptor,
    FaultKind,
    SensorRun,
    SyntheticSpec,
)
from sensorscan.utils.logging import get_logger

logger = get_logger("synth")


class SyntheticService:
    """Service para geração de execuções sintéticas com falhas controladas."""

    @staticmethod
    def synth_generate(spec: SyntheticSpec, n_runs_per_state: int) -> list[SensorRun]:
        """
        Gera execuções AR(1) estacionárias com uma falha por estado a partir do onset.

        Args:
            spec: Especificação do gerador.
            n_runs_per_state: Execuções por estado (inclui o normal).

        Returns:
            list[SensorRun]: Execuções ordenadas por (estado, índice).
        """
        baselines = np.random.default_rng([spec.seed]).normal(
            0.0, spec.baseline_std, size=spec.n_channels
        )
        runs = []
        for state in range(spec.n_states):
            fault = spec.faults[state - 1] if state != NORMAL_STATE else None
            for index in range(n_runs_per_state):
                rng = np.random.default_rng([spec.seed, state, index])
                values = SyntheticService._generate_run(spec, baselines, fault, rng)
                runs.append(
                    SensorRun(
                        run_id=f"s{state}_r{index:03d}",
                        fault_label=state,
                        fault_onset=spec.onset if fault is not None else None,
                        values=values,
                        sampling_period_min=spec.sampling_period_min,
                    )
                )
        logger.info(
            f"{len(runs)} execuções sintéticas geradas "
            f"({spec.n_states} estados × {n_runs_per_state}, "
            f"T={spec.run_length}, D={spec.n_channels})"
        )
        return runs

    @staticmethod
    def _generate_run(
        spec: SyntheticSpec,
        baselines: np.ndarray,
        fault: FaultDescriptor | None,
        rng: np.random.Generator,
    ) -> np.ndarray:
        length, dim, onset = spec.run_length, spec.n_channels, spec.onset
        shocks = rng.standard_normal((length, dim))
        sticking_draws = rng.random((length, dim))

        innovation_std = np.full((length, dim), spec.noise_std)
        if fault is not None and fault.kind == FaultKind.RANDOM_VARIATION:
            innovation_std[onset:, fault.channels] *= fault.magnitude

        # e_t = a·e_{t-1} + σ_t·η_t, com e_0 da distribuição estacionária de σ_0
        drive = innovation_std * shocks
        drive[0] = innovation_std[0] / math.sqrt(1.0 - spec.ar_coef**2) * shocks[0]
        process = lfilter([1.0], [1.0, -spec.ar_coef], drive, axis=0)
        values = baselines[None, :] + process

        if fault is None:
            return values
        channels = fault.channels
        if fault.kind == FaultKind.STEP:
            values[onset:, channels] += fault.magnitude
        elif fault.kind == FaultKind.SLOW_DRIFT:
            ramp = fault.magnitude * np.arange(1, length - onset + 1, dtype=np.float64)
            values[onset:, channels] += ramp[:, None]
        elif fault.kind == FaultKind.STICKING:
            stuck = sticking_draws[onset:, channels] < fault.magnitude
            frozen = np.broadcast_to(values[onset, channels], stuck.shape)
            segment = values[onset:, channels]
            values[onset:, channels] = np.where(stuck, frozen, segment)
        return values
