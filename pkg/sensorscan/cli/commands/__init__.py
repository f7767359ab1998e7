"""Comandos da CLI."""
