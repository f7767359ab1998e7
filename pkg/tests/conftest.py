"""Configuração de fixtures para testes."""

import json
from pathlib import Path

import numpy as np
import pytest

from sensorscan.schemas.data import FaultDescriptor, FaultKind, SensorRun, SyntheticSpec
from sensorscan.schemas.model import ModelConfig
from sensorscan.schemas.pipeline import PipelineConfig
from sensorscan.services.synthetic_service import SyntheticService


@pytest.fixture
def rng() -> np.random.Generator:
    """Gerador aleatório com seed fixa."""
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_model_cfg() -> ModelConfig:
    """Arquitetura mínima para verificações de gradiente e treinos curtos."""
    return ModelConfig(
        n_layers=1,
        hidden_dim=8,
        ff_dim=16,
        heads=2,
        dropout=0.0,
        embedding_dim=4,
        n_clusters=3,
        n_channels=3,
        window_size=8,
    )


@pytest.fixture
def tiny_spec() -> SyntheticSpec:
    """Gerador com três estados bem separados (degrau e variação aleatória)."""
    return SyntheticSpec(
        n_channels=3,
        n_states=3,
        run_length=40,
        onset=15,
        faults=[
            FaultDescriptor(kind=FaultKind.STEP, channels=[0], magnitude=3.0),
            FaultDescriptor(kind=FaultKind.RANDOM_VARIATION, channels=[1], magnitude=4.0),
        ],
        noise_std=0.1,
        ar_coef=0.5,
        seed=0,
    )


@pytest.fixture
def tiny_runs(tiny_spec: SyntheticSpec) -> list[SensorRun]:
    """Quatro execuções por estado do gerador mínimo."""
    return SyntheticService.synth_generate(tiny_spec, n_runs_per_state=4)


@pytest.fixture
def tiny_config_dict(tiny_spec: SyntheticSpec, tiny_model_cfg: ModelConfig) -> dict:
    """Configuração completa do pipeline em escala mínima (segundos de CPU)."""
    return {
        "seed": 0,
        "data": {
            "source": "synthetic",
            "synthetic": tiny_spec.model_dump(mode="json"),
            "runs_per_state": 4,
            "window_size": 8,
            "step": 2,
            "train_fraction": 0.75,
        },
        "model": tiny_model_cfg.model_dump(mode="json"),
        "pretrain": {
            "epochs": 1,
            "batch_size": 8,
            "augment": {"n_permute_chunks": 4},
        },
        "scan": {
            "n_neighbors": 3,
            "n_chunks": 2,
            "epochs": 2,
            "freeze_epochs": 1,
            "batch_size": 16,
            "subsample_normal": False,
        },
        "finetune": {"epochs": 1, "batch_size": 8},
        "eval": {"baseline_dims": 4, "baseline_restarts": 2, "latency_samples": 2},
    }


@pytest.fixture
def tiny_config(tiny_config_dict: dict) -> PipelineConfig:
    return PipelineConfig.model_validate(tiny_config_dict)


@pytest.fixture
def config_file(tmp_path: Path, tiny_config_dict: dict) -> Path:
    """Arquivo JSON com a configuração mínima."""
    path = tmp_path / "config.json"
    path.write_text(json.dumps(tiny_config_dict), encoding="utf-8")
    return path


@pytest.fixture
def artifacts_dir(tmp_path: Path) -> Path:
    """Diretório de artefatos isolado por teste."""
    path = tmp_path / "artifacts"
    path.mkdir()
    return path
