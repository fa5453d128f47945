"""Shared utilities: structured logging and the application error hierarchy."""
