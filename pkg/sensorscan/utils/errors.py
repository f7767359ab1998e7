"""Custom exception classes."""

from typing import Any, Dict, Optional

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_MISSING_ARTIFACT = 3


class SensorScanError(Exception):
    """Base class para erros da aplicação."""

    def __init__(
        self,
        message: str,
        code: str,
        exit_code: int = EXIT_INTERNAL,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        """
        Inicializa o erro.

        Args:
            message: Mensagem de erro legível.
            code: Código único do erro.
            exit_code: Código de saída da CLI associado ao erro.
            details: Detalhes adicionais do erro.
        """
        self.message = message
        self.code = code
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(message)

    def to_dict(self) -> Dict[str, Any]:
        """Converte o erro para dicionário."""
        return {
            "success": False,
            "error": self.message,
            "code": self.code,
            "details": self.details,
        }


class ValidationError(SensorScanError):
    """Erro de validação de entrada ou configuração."""

    def __init__(self, message: str, details: Optional[Dict] = None):
        super().__init__(
            message=message,
            code="VALIDATION_ERROR",
            exit_code=EXIT_INPUT,
            details=details,
        )


class DataParseError(SensorScanError):
    """Erro de leitura de um arquivo Run-CSV."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        run_id: Optional[str] = None,
        details: Optional[Dict] = None,
    ):
        self.line = line
        self.run_id = run_id
        prefix = []
        if run_id is not None:
            prefix.append(f"run {run_id}")
        if line is not None:
            prefix.append(f"linha {line}")
        full_message = f"{', '.join(prefix)}: {message}" if prefix else message
        super().__init__(
            message=full_message,
            code="DATA_PARSE_ERROR",
            exit_code=EXIT_INPUT,
            details={**(details or {}), "line": line, "run_id": run_id},
        )


class MissingArtifactError(SensorScanError):
    """Artefato de uma etapa anterior não encontrado."""

    def __init__(self, stage: str, details: Optional[Dict] = None):
        self.stage = stage
        super().__init__(
            message=f"Artefato da etapa '{stage}' não encontrado; execute '{stage}' antes",
            code="MISSING_ARTIFACT",
            exit_code=EXIT_MISSING_ARTIFACT,
            details={**(details or {}), "stage": stage},
        )


class ConfigMismatchError(SensorScanError):
    """Artefato produzido por outra configuração (fingerprint divergente)."""

    def __init__(self, stage: str, expected: str, found: str):
        super().__init__(
            message=(
                f"Artefato da etapa '{stage}' foi gerado com outra configuração "
                f"(esperado {expected[:12]}, encontrado {found[:12]})"
            ),
            code="CONFIG_MISMATCH",
            exit_code=EXIT_INPUT,
            details={"stage": stage, "expected": expected, "found": found},
        )


class ShapeError(SensorScanError):
    """Formas de tensores incompatíveis."""

    def __init__(self, message: str, details: Optional[Dict] = None):
        super().__init__(
            message=message,
            code="SHAPE_ERROR",
            exit_code=EXIT_INPUT,
            details=details,
        )


class ContractError(SensorScanError):
    """Violação de contrato interno (pré-condição que nunca deveria falhar)."""

    def __init__(self, message: str, details: Optional[Dict] = None):
        super().__init__(
            message=message,
            code="CONTRACT_ERROR",
            exit_code=EXIT_INTERNAL,
            details=details,
        )


class UnmatchedClusterError(SensorScanError):
    """Predição caiu em um cluster sem estado associado."""

    def __init__(self, cluster: int, details: Optional[Dict] = None):
        self.cluster = cluster
        super().__init__(
            message=f"Cluster {cluster} não possui estado de processo associado",
            code="UNMATCHED_CLUSTER",
            exit_code=EXIT_INPUT,
            details={**(details or {}), "cluster": cluster},
        )


class DegenerateChannelWarning(UserWarning):
    """Canal com variância nula; o desvio padrão foi fixado em 1."""
