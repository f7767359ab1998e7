"""Funcionalidades core da CLI."""
