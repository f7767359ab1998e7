"""Testes da CLI: códigos de saída, saídas impressas e artefatos."""

import argparse
import json
from pathlib import Path

import pytest

from sensorscan.config.settings import settings
from sensorscan.core.dependencies import get_artifacts_root
from sensorscan.main import create_application, run
from sensorscan.services.data_service import DataService


def common(config_file: Path, artifacts_dir: Path) -> list[str]:
    return ["--config", str(config_file), "--artifacts-dir", str(artifacts_dir)]


def test_schema_prints_config_schema(capsys):
    """Testa o comando schema."""
    assert run(["schema"]) == 0
    schema = json.loads(capsys.readouterr().out)
    assert {"data", "model", "pretrain", "scan", "finetune", "eval"} <= set(schema["properties"])


def test_unknown_command_is_rejected():
    """Testa que o parser rejeita comandos desconhecidos."""
    with pytest.raises(SystemExit):
        create_application().parse_args(["explode"])


def test_synth_with_default_config(capsys, artifacts_dir: Path):
    """Testa synth com 10 execuções por estado no gerador padrão de 5 estados."""
    code = run(["synth", "--runs-per-state", "10", "--artifacts-dir", str(artifacts_dir)])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["runs"] == 50
    manifest = json.loads((artifacts_dir / "data" / "manifest.json").read_text())
    assert manifest["n_runs"] == 50
    assert manifest["runs_per_state"] == {str(s): 10 for s in range(5)}


def test_synth_is_byte_reproducible(config_file: Path, tmp_path: Path):
    """Testa que synth gera os mesmos bytes em diretórios diferentes."""
    for name in ("a", "b"):
        assert run(["synth", *common(config_file, tmp_path / name)]) == 0
    assert (tmp_path / "a" / "data" / "runs.csv").read_bytes() == (
        tmp_path / "b" / "data" / "runs.csv"
    ).read_bytes()


def test_stage_without_prerequisite_exits_3(config_file: Path, artifacts_dir: Path):
    """Testa o código 3 quando a etapa anterior não existe."""
    assert run(["cluster", *common(config_file, artifacts_dir)]) == 3
    assert run(["evaluate", *common(config_file, artifacts_dir)]) == 3


def test_missing_config_exits_2(artifacts_dir: Path, tmp_path: Path):
    """Testa o código 2 para arquivo de configuração ausente ou inválido."""
    missing = tmp_path / "nope.json"
    assert run(["synth", "--config", str(missing), "--artifacts-dir", str(artifacts_dir)]) == 2
    invalid = tmp_path / "invalid.json"
    invalid.write_text('{"scan": {"epochs": 1, "freeze_epochs": 2}}', encoding="utf-8")
    assert run(["synth", "--config", str(invalid), "--artifacts-dir", str(artifacts_dir)]) == 2


def test_malformed_csv_exits_2(config_file: Path, artifacts_dir: Path, tmp_path: Path):
    """Testa o código 2 para um Run-CSV malformado."""
    bad = tmp_path / "bad.csv"
    bad.write_text("run_id,t,fault_label,fault_onset,s0\nr0,0,0,,x\n", encoding="utf-8")
    assert run(["ingest", "--csv", str(bad), *common(config_file, artifacts_dir)]) == 2


def test_config_change_after_synth_exits_2(
    config_file: Path, artifacts_dir: Path, tmp_path: Path, tiny_config_dict: dict
):
    """Testa que artefatos de outra configuração são recusados."""
    assert run(["synth", *common(config_file, artifacts_dir)]) == 0
    changed = dict(tiny_config_dict, pretrain={**tiny_config_dict["pretrain"], "epochs": 2})
    other = tmp_path / "other.json"
    other.write_text(json.dumps(changed), encoding="utf-8")
    assert run(["pretrain", *common(other, artifacts_dir)]) == 2
    assert run(["pretrain", *common(config_file, artifacts_dir), "--seed", "5"]) == 2


def test_ingest_with_separate_test_csv(
    config_file: Path, artifacts_dir: Path, tmp_path: Path, tiny_runs
):
    """Testa ingest de CSV com conjunto de teste separado."""
    train = DataService.write_csv(tiny_runs[:9], tmp_path / "train.csv")
    test = DataService.write_csv(tiny_runs[9:], tmp_path / "test.csv")
    args = ["--csv", str(train), "--test-csv", str(test)]
    assert run(["ingest", *args, *common(config_file, artifacts_dir)]) == 0
    manifest = json.loads((artifacts_dir / "data" / "manifest.json").read_text())
    assert manifest["n_runs"] == 12
    assert (artifacts_dir / "data" / "test_runs.csv").is_file()


def test_stage_by_stage(config_file: Path, artifacts_dir: Path, capsys):
    """Testa cada comando em sequência, terminando em report."""
    options = common(config_file, artifacts_dir)
    for command in ("synth", "pretrain", "mine", "cluster", "match", "finetune"):
        assert run([command, *options]) == 0, command
    capsys.readouterr()

    assert run(["evaluate", "--baseline", "pca-kmeans", *options]) == 0
    out = capsys.readouterr().out
    assert "[sensorscan] Métricas agregadas" in out
    assert "[finetuned] Taxas por falha" in out
    assert "[pca-kmeans] Clustering" in out
    for variant in ("sensorscan", "finetuned", "pca-kmeans"):
        assert (artifacts_dir / "evaluate" / f"{variant}.json").is_file()

    assert run(["report", "--artifacts-dir", str(artifacts_dir)]) == 0
    assert "Detection FPR" in capsys.readouterr().out


def test_report_without_reports_exits_2(artifacts_dir: Path):
    """Testa report sem relatórios gravados."""
    assert run(["report", "--artifacts-dir", str(artifacts_dir)]) == 2


def test_run_command(config_file: Path, artifacts_dir: Path, capsys):
    """Testa o comando run com o baseline."""
    assert run(["run", "--baseline", "pca-kmeans", *common(config_file, artifacts_dir)]) == 0
    out = capsys.readouterr().out
    assert "[pca-kmeans] Métricas agregadas" in out


@pytest.mark.slow
def test_ablate_ssl_tasks(config_file: Path, artifacts_dir: Path, capsys):
    """Testa a ablação das tarefas auto-supervisionadas pela CLI."""
    assert run(["ablate", "--axis", "ssl-tasks", *common(config_file, artifacts_dir)]) == 0
    out = capsys.readouterr().out
    for name in ("reconstruction-only", "contrastive-only", "both"):
        assert name in out
    assert (artifacts_dir / "ablation" / "ssl-tasks" / "comparison.json").is_file()


def test_default_artifacts_root_is_created(monkeypatch, tmp_path: Path):
    """Testa que o diretório de artefatos das settings é criado quando não há flag."""
    default = tmp_path / "default" / "artifacts"
    monkeypatch.setattr(settings, "artifacts_dir", default)
    assert get_artifacts_root(argparse.Namespace()) == default
    assert default.is_dir()
    explicit = tmp_path / "explicit"
    assert get_artifacts_root(argparse.Namespace(artifacts_dir=str(explicit))) == explicit
    assert not explicit.exists()


def test_resume_flag_on_training_commands(config_file: Path, artifacts_dir: Path):
    """Testa --resume nas etapas treináveis: checkpoint completo é mantido byte a byte."""
    options = common(config_file, artifacts_dir)
    assert run(["run", "--finetune", *options]) == 0
    checkpoints = [
        artifacts_dir / "pretrain" / "extractor.ckpt",
        artifacts_dir / "cluster" / "model.ckpt",
        artifacts_dir / "finetune" / "model.ckpt",
    ]
    before = [path.read_bytes() for path in checkpoints]
    for command in ("pretrain", "cluster", "finetune"):
        assert run([command, "--resume", *options]) == 0, command
    assert [path.read_bytes() for path in checkpoints] == before

    with pytest.raises(SystemExit):
        create_application().parse_args(["mine", "--resume", *options])
