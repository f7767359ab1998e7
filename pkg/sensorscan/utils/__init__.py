"""Utilitários."""
