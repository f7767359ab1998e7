"""Contêiner de checkpoint versionado (zip de arrays .npy + meta.json)."""

import io
import json
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from sensorscan.nn.base_module import Module
from sensorscan.nn.optim import Adam
from sensorscan.utils.errors import ShapeError, ValidationError

CHECKPOINT_VERSION = 1
_FIXED_DATE = (1980, 1, 1, 0, 0, 0)


@dataclass
class Checkpoint:
    """Conteúdo carregado de um checkpoint."""

    config: dict[str, Any]
    arrays: dict[str, np.ndarray]
    meta: dict[str, Any] = field(default_factory=dict)

    def section(self, prefix: str) -> dict[str, np.ndarray]:
        """Arrays cujo nome começa com `prefix/`, sem o prefixo."""
        start = f"{prefix}/"
        return {k[len(start) :]: v for k, v in self.arrays.items() if k.startswith(start)}


def _write_entry(archive: zipfile.ZipFile, name: str, payload: bytes) -> None:
    info = zipfile.ZipInfo(name, date_time=_FIXED_DATE)
    info.compress_type = zipfile.ZIP_DEFLATED
    info.external_attr = 0o644 << 16
    archive.writestr(info, payload)


def collect_arrays(
    modules: dict[str, Module], optimizers: dict[str, Adam] | None = None
) -> dict[str, np.ndarray]:
    """Nomeia parâmetros, buffers e estados de otimizador de um conjunto de módulos."""
    arrays: dict[str, np.ndarray] = {}
    for module_name, module in modules.items():
        for name, parameter in module.named_parameters():
            arrays[f"param/{module_name}.{name}"] = parameter.value
        for name, buffer in module.named_buffers():
            arrays[f"buffer/{module_name}.{name}"] = buffer
    for optim_name, optimizer in (optimizers or {}).items():
        for key, value in optimizer.state_dict().items():
            arrays[f"optim/{optim_name}/{key}"] = np.asarray(value)
    return arrays


def save_checkpoint(
    path: str | Path,
    modules: dict[str, Module],
    config: dict[str, Any],
    optimizers: dict[str, Adam] | None = None,
    meta: dict[str, Any] | None = None,
) -> Path:
    """
    Grava módulos, otimizadores e a configuração que os produziu.

    Entradas do zip têm data fixa e ordem ordenada, então o mesmo estado gera
    os mesmos bytes.

    Args:
        path: Arquivo de destino.
        modules: Módulos nomeados (p.ex. {"extractor": ..., "head": ...}).
        config: Configuração serializável em JSON.
        optimizers: Otimizadores nomeados (opcional).
        meta: Metadados adicionais (opcional).

    Returns:
        Path: Caminho gravado.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = collect_arrays(modules, optimizers)
    header = {
        "version": CHECKPOINT_VERSION,
        "config": config,
        "meta": meta or {},
        "shapes": {name: list(array.shape) for name, array in arrays.items()},
    }
    with zipfile.ZipFile(path, "w") as archive:
        _write_entry(archive, "meta.json", json.dumps(header, sort_keys=True).encode("utf-8"))
        for name in sorted(arrays):
            buffer = io.BytesIO()
            array = np.ascontiguousarray(arrays[name])
            np.lib.format.write_array(buffer, array, allow_pickle=False)
            _write_entry(archive, f"{name}.npy", buffer.getvalue())
    return path


def load_checkpoint(path: str | Path) -> Checkpoint:
    """Lê um checkpoint e valida a versão e as formas declaradas."""
    path = Path(path)
    with zipfile.ZipFile(path, "r") as archive:
        header = json.loads(archive.read("meta.json").decode("utf-8"))
        if header.get("version") != CHECKPOINT_VERSION:
            raise ValidationError(
                f"versão de checkpoint {header.get('version')} não suportada",
                details={"path": str(path), "expected": CHECKPOINT_VERSION},
            )
        arrays: dict[str, np.ndarray] = {}
        for name, shape in header["shapes"].items():
            array = np.lib.format.read_array(
                io.BytesIO(archive.read(f"{name}.npy")), allow_pickle=False
            )
            if list(array.shape) != shape:
                raise ShapeError(f"array '{name}' com forma {array.shape}, declarado {shape}")
            arrays[name] = array
    return Checkpoint(config=header["config"], arrays=arrays, meta=header.get("meta", {}))


def restore_module(module: Module, module_name: str, checkpoint: Checkpoint) -> None:
    """Copia parâmetros e buffers do checkpoint para o módulo, validando formas."""
    params = checkpoint.section("param")
    for name, parameter in module.named_parameters():
        key = f"{module_name}.{name}"
        if key not in params:
            raise ShapeError(f"parâmetro '{key}' ausente do checkpoint")
        if params[key].shape != parameter.shape:
            raise ShapeError(
                f"parâmetro '{key}' com forma {params[key].shape}, esperado {parameter.shape}"
            )
        parameter.value[...] = params[key]
    buffers = checkpoint.section("buffer")
    for name, buffer in list(module.named_buffers()):
        key = f"{module_name}.{name}"
        if key not in buffers or buffers[key].shape != buffer.shape:
            raise ShapeError(f"buffer '{key}' ausente ou com forma incompatível")
        module.set_buffer(name, buffers[key])


def restore_optimizer(optimizer: Adam, optim_name: str, checkpoint: Checkpoint) -> None:
    optimizer.load_state_dict(checkpoint.section(f"optim/{optim_name}"))
