"""Operational surface: HTTP API, job orchestration, CLI."""
