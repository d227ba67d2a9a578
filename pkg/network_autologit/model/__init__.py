"""Numerical engine; importable without a Frappe site."""
