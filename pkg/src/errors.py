"""
Errores del toolkit.
Todos heredan de ValueError para que el código que ya captura ValueError siga funcionando.
Salvo TrainingError: lo que falla ya entrenando es un error de ejecución, no de datos.
"""
from contextlib import contextmanager


class ForecastError(ValueError):
    """Base de los errores del toolkit."""


class ParseError(ForecastError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"línea {line}: {message}"
        super().__init__(message)


class DomainError(ForecastError):
    """Valor fuera del dominio (negativos, series todo cero, denominadores degenerados)."""


class DatasetValidationError(ForecastError):
    def __init__(self, message: str, series_id: str | None = None):
        self.series_id = series_id
        if series_id is not None:
            message = f"[{series_id}] {message}"
        super().__init__(message)


class ConfigError(ForecastError):
    """Configuración o combinación de estrategia inválida."""


class TrainingError(RuntimeError):
    """Fallo durante el entrenamiento o la previsión (no es un error de datos ni de configuración)."""


@contextmanager
def runtime_stage(stage: str):
    """Convierte los ForecastError lanzados dentro del bloque en TrainingError."""
    try:
        yield
    except ForecastError as e:
        raise TrainingError(f"{stage}: {e}") from e
