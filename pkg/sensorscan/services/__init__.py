"""Services de cada etapa do pipeline."""
