"""Shared helpers: accuracy bookkeeping, errors, settings, export and filtering."""
