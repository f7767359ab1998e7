"""Service layer para ingestão, normalização, janelamento e divisão de execuções."""

import math
import re
import warnings
from collections import Counter, defaultdict
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view

from sensorscan.schemas.data import (
    NORMAL_STATE,
    DatasetManifest,
    NormalizationStats,
    SensorRun,
    WindowDataset,
)
from sensorscan.utils.errors import DataParseError, DegenerateChannelWarning, ValidationError
from sensorscan.utils.logging import get_logger

logger = get_logger("data")

BASE_COLUMNS = ["run_id", "t", "fault_label", "fault_onset"]
_SENSOR_COLUMN = re.compile(r"^s(\d+)$")
_PARSER_LINE = re.compile(r"line (\d+)")


def _line_of(row_position: int) -> int:
    # linha 1 é o cabeçalho
    return row_position + 2


class DataService:
    """Service para operações sobre execuções de sensores."""

    @staticmethod
    def ingest_csv(path: str | Path, sampling_period_min: float = 3.0) -> list[SensorRun]:
        """
        Lê um arquivo Run-CSV.

        Args:
            path: Caminho do arquivo (`run_id,t,fault_label,fault_onset,s0,...`).
            sampling_period_min: Período de amostragem atribuído às execuções.

        Returns:
            list[SensorRun]: Uma execução por run_id, na ordem de primeira aparição.

        Raises:
            DataParseError: Linha malformada, D inconsistente ou onset ausente.
        """
        path = Path(path)
        try:
            frame = pd.read_csv(
                path, dtype={"run_id": str}, skip_blank_lines=False, encoding="utf-8"
            )
        except pd.errors.ParserError as exc:
            match = _PARSER_LINE.search(str(exc))
            raise DataParseError(
                f"linha malformada em {path.name}: {exc}",
                line=int(match.group(1)) if match else None,
            ) from exc
        except (pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
            raise DataParseError(f"arquivo ilegível {path.name}: {exc}") from exc
        except OSError as exc:
            raise DataParseError(f"falha ao abrir {path}: {exc}") from exc

        missing = [c for c in BASE_COLUMNS if c not in frame.columns]
        if missing:
            raise DataParseError(f"colunas obrigatórias ausentes: {missing}", line=1)
        sensor_columns = DataService._sensor_columns(list(frame.columns))

        for column in ("run_id", "t", "fault_label"):
            empty = frame[column].isna().to_numpy()
            if empty.any():
                position = int(np.flatnonzero(empty)[0])
                raise DataParseError(f"campo '{column}' vazio", line=_line_of(position))

        numeric = {}
        for column in ["t", "fault_label", "fault_onset", *sensor_columns]:
            coerced = pd.to_numeric(frame[column], errors="coerce")
            bad = (coerced.isna() & frame[column].notna()).to_numpy()
            if bad.any():
                position = int(np.flatnonzero(bad)[0])
                raise DataParseError(
                    f"valor não numérico na coluna '{column}'",
                    line=_line_of(position),
                    run_id=str(frame["run_id"].iloc[position]),
                )
            numeric[column] = coerced.to_numpy(dtype=np.float64)

        sensors = np.column_stack([numeric[c] for c in sensor_columns])
        present = ~np.isnan(sensors)
        row_dims = present.sum(axis=1)
        # sensores presentes devem formar um prefixo s0..s{d-1}
        expected = np.arange(sensors.shape[1])[None, :] < row_dims[:, None]
        prefix_ok = np.all(present == expected, axis=1)

        runs: list[SensorRun] = []
        run_ids = frame["run_id"].to_numpy()
        for run_id, positions in pd.Series(np.arange(len(frame))).groupby(
            run_ids, sort=False
        ):
            rows = positions.to_numpy()
            runs.append(
                DataService._build_run(
                    str(run_id), rows, numeric, sensors, row_dims, prefix_ok, sampling_period_min
                )
            )

        logger.info(f"{len(runs)} execuções lidas de {path.name}")
        return runs

    @staticmethod
    def _sensor_columns(columns: list[str]) -> list[str]:
        indexed = sorted(
            (int(m.group(1)), c) for c in columns if (m := _SENSOR_COLUMN.match(c)) is not None
        )
        if not indexed:
            raise DataParseError("nenhuma coluna de sensor (s0, s1, ...) encontrada", line=1)
        if [i for i, _ in indexed] != list(range(len(indexed))):
            raise DataParseError("colunas de sensor devem ser s0..s{D-1} contíguas", line=1)
        return [c for _, c in indexed]

    @staticmethod
    def _build_run(
        run_id: str,
        rows: np.ndarray,
        numeric: dict[str, np.ndarray],
        sensors: np.ndarray,
        row_dims: np.ndarray,
        prefix_ok: np.ndarray,
        sampling_period_min: float,
    ) -> SensorRun:
        for position in rows:
            if not prefix_ok[position] or row_dims[position] == 0:
                raise DataParseError(
                    "colunas de sensor com lacunas", line=_line_of(position), run_id=run_id
                )
        expected_dim = Counter(row_dims[rows].tolist()).most_common(1)[0][0]
        off = rows[row_dims[rows] != expected_dim]
        if off.size:
            position = int(off[0])
            raise DataParseError(
                f"linha com {row_dims[position]} colunas de sensor, esperado {expected_dim}",
                line=_line_of(position),
                run_id=run_id,
            )

        labels = numeric["fault_label"][rows]
        bad = np.flatnonzero((labels != labels[0]) | (labels < 0) | (labels != np.round(labels)))
        if bad.size:
            raise DataParseError(
                "fault_label inválido ou não constante",
                line=_line_of(int(rows[bad[0]])),
                run_id=run_id,
            )
        fault_label = int(labels[0])

        timestamps = numeric["t"][rows]
        order = np.argsort(timestamps, kind="stable")
        if not np.array_equal(timestamps[order], np.arange(len(rows))):
            raise DataParseError(
                "timestamps t devem ser 0..T-1 sem repetição",
                line=_line_of(int(rows[0])),
                run_id=run_id,
            )

        onset: Optional[int] = None
        if fault_label != NORMAL_STATE:
            onsets = numeric["fault_onset"][rows]
            if np.isnan(onsets).any():
                position = int(rows[np.flatnonzero(np.isnan(onsets))[0]])
                raise DataParseError(
                    "execução com falha sem fault_onset", line=_line_of(position), run_id=run_id
                )
            if np.any(onsets != onsets[0]):
                position = int(rows[np.flatnonzero(onsets != onsets[0])[0]])
                raise DataParseError(
                    "fault_onset não constante", line=_line_of(position), run_id=run_id
                )
            onset = int(onsets[0])
            if not 0 <= onset < len(rows):
                raise DataParseError(
                    f"fault_onset {onset} fora da execução",
                    line=_line_of(int(rows[0])),
                    run_id=run_id,
                )

        values = sensors[rows[order]][:, :expected_dim]
        return SensorRun(
            run_id=run_id,
            fault_label=fault_label,
            fault_onset=onset,
            values=values,
            sampling_period_min=sampling_period_min,
        )

    @staticmethod
    def write_csv(runs: list[SensorRun], path: str | Path) -> Path:
        """Grava execuções no formato Run-CSV (floats com 17 dígitos significativos)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        max_dim = max((run.n_channels for run in runs), default=0)
        frames = []
        for run in runs:
            frame = pd.DataFrame(
                run.values, columns=[f"s{d}" for d in range(run.n_channels)]
            ).reindex(columns=[f"s{d}" for d in range(max_dim)])
            frame.insert(0, "fault_onset", pd.array([run.fault_onset] * run.length, dtype="Int64"))
            frame.insert(0, "fault_label", run.fault_label)
            frame.insert(0, "t", np.arange(run.length))
            frame.insert(0, "run_id", run.run_id)
            frames.append(frame)
        if frames:
            table = pd.concat(frames, ignore_index=True)
        else:
            table = pd.DataFrame(columns=BASE_COLUMNS)
        table.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        return path

    @staticmethod
    def compute_normalization(runs: list[SensorRun]) -> NormalizationStats:
        """
        Média e desvio padrão populacional por canal sobre todos os timestamps de treino.

        Canais com variância nula têm o desvio fixado em 1 (com aviso).
        """
        if not runs:
            raise ValidationError("compute_normalization exige ao menos uma execução")
        stacked = np.concatenate([run.values for run in runs], axis=0)
        mean = stacked.mean(axis=0)
        std = stacked.std(axis=0)
        degenerate = np.flatnonzero(std < 1e-12)
        if degenerate.size:
            message = f"canais com variância nula {degenerate.tolist()}; desvio fixado em 1"
            warnings.warn(message, DegenerateChannelWarning, stacklevel=2)
            logger.warning(message)
            std[degenerate] = 1.0
        return NormalizationStats(mean=mean.tolist(), std=std.tolist())

    @staticmethod
    def normalize(values: np.ndarray, stats: NormalizationStats) -> np.ndarray:
        return (values - stats.mean_array) / stats.std_array

    @staticmethod
    def denormalize(values: np.ndarray, stats: NormalizationStats) -> np.ndarray:
        """Inverso de normalize."""
        return values * stats.std_array + stats.mean_array

    @staticmethod
    def apply_normalization(runs: list[SensorRun], stats: NormalizationStats) -> list[SensorRun]:
        return [run.with_values(DataService.normalize(run.values, stats)) for run in runs]

    @staticmethod
    def make_windows(runs: list[SensorRun], window_size: int, step: int = 1) -> WindowDataset:
        """
        Janelas deslizantes inteiramente dentro de cada execução (sem padding).

        Args:
            runs: Execuções.
            window_size: L.
            step: Passo entre janelas.

        Returns:
            WindowDataset: Janelas rotuladas pelo estado do último timestamp.
        """
        if window_size < 1 or step < 1:
            raise ValidationError("window_size e step devem ser ≥ 1")
        values, labels, run_ids, ends = [], [], [], []
        for run in runs:
            if run.length < window_size:
                continue
            starts = np.arange(0, run.length - window_size + 1, step)
            view = sliding_window_view(run.values, window_size, axis=0)  # [T-L+1, D, L]
            values.append(view[starts].transpose(0, 2, 1))
            end_index = starts + window_size - 1
            if run.is_faulty:
                labels.append(np.where(end_index >= run.fault_onset, run.fault_label, NORMAL_STATE))
            else:
                labels.append(np.full(starts.size, NORMAL_STATE))
            run_ids.append(np.full(starts.size, run.run_id, dtype=object))
            ends.append(end_index)

        if not values:
            n_channels = runs[0].n_channels if runs else 0
            return WindowDataset(
                values=np.zeros((0, window_size, n_channels)),
                labels=np.zeros(0, dtype=np.int64),
                run_ids=np.zeros(0, dtype=object),
                end_indices=np.zeros(0, dtype=np.int64),
            )
        return WindowDataset(
            values=np.ascontiguousarray(np.concatenate(values)),
            labels=np.concatenate(labels).astype(np.int64),
            run_ids=np.concatenate(run_ids),
            end_indices=np.concatenate(ends).astype(np.int64),
        )

    @staticmethod
    def _group_by_state(runs: list[SensorRun]) -> dict[int, list[int]]:
        groups: dict[int, list[int]] = defaultdict(list)
        for index, run in enumerate(runs):
            groups[run.fault_label].append(index)
        return dict(sorted(groups.items()))

    @staticmethod
    def unbalance_train(
        runs: list[SensorRun], normal_count: int, per_fault_count: int, seed: int
    ) -> list[SensorRun]:
        """
        Subamostra uniforme sem reposição: normal_count normais e per_fault_count por falha.

        Raises:
            ValidationError: Se algum estado tiver menos execuções que o pedido.
        """
        keep: list[int] = []
        for state, indices in DataService._group_by_state(runs).items():
            wanted = normal_count if state == NORMAL_STATE else per_fault_count
            if wanted > len(indices):
                raise ValidationError(
                    f"estado {state} tem {len(indices)} execuções, pedido {wanted}",
                    details={"state": state, "available": len(indices), "requested": wanted},
                )
            rng = np.random.default_rng([seed, state])
            chosen = rng.choice(len(indices), size=wanted, replace=False)
            keep.extend(indices[i] for i in chosen)
        return [runs[i] for i in sorted(keep)]

    @staticmethod
    def split_runs(
        runs: list[SensorRun], train_fraction: float, seed: int
    ) -> tuple[list[SensorRun], list[SensorRun]]:
        """Divisão estratificada: round(n · fração) execuções de cada estado vão para o treino."""
        if not 0.0 < train_fraction < 1.0:
            raise ValidationError("train_fraction deve estar em (0, 1)")
        train_indices: set[int] = set()
        for state, indices in DataService._group_by_state(runs).items():
            rng = np.random.default_rng([seed, state])
            order = rng.permutation(len(indices))
            n_train = int(math.floor(len(indices) * train_fraction + 0.5))
            train_indices.update(indices[i] for i in order[:n_train])
        train = [run for i, run in enumerate(runs) if i in train_indices]
        test = [run for i, run in enumerate(runs) if i not in train_indices]
        return train, test

    @staticmethod
    def select_channels(runs: list[SensorRun], channels: list[int] | None) -> list[SensorRun]:
        """Aplica a allowlist de canais (None mantém todos)."""
        if channels is None:
            return runs
        for run in runs:
            if any(c < 0 or c >= run.n_channels for c in channels):
                raise ValidationError(
                    f"canal fora de [0, {run.n_channels}) na execução {run.run_id}",
                    details={"channels": channels},
                )
        return [run.with_values(run.values[:, channels]) for run in runs]

    @staticmethod
    def build_manifest(
        runs: list[SensorRun],
        source: str,
        seed: int | None = None,
        config_fingerprint: str | None = None,
    ) -> DatasetManifest:
        counts = Counter(run.fault_label for run in runs)
        lengths = [run.length for run in runs] or [0]
        return DatasetManifest(
            n_runs=len(runs),
            runs_per_state=dict(sorted(counts.items())),
            n_channels=max((run.n_channels for run in runs), default=0),
            min_length=min(lengths),
            max_length=max(lengths),
            source=source,
            seed=seed,
            config_fingerprint=config_fingerprint,
        )
