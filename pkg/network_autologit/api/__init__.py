"""Public API exports for Network Autologit."""

from __future__ import annotations

from typing import Any

import frappe

from network_autologit.network_autologit.doctype.autologit_settings.autologit_settings import (
    get_fit_config,
    get_lambda_grid,
    get_settings_doc,
)

from . import fit_runs  # noqa: F401
from .fit_runs import create_fit_run, execute_fit_run, get_fit_run, list_fit_runs


@frappe.whitelist()
def get_settings() -> dict[str, Any]:
    """Effective engine configuration of the site."""
    doc = get_settings_doc()
    return {
        "fit": get_fit_config(doc).as_dict(),
        "lambda_grid": list(get_lambda_grid(doc).values),
        "significance_tolerance": doc.significance_tolerance,
        "default_holdout": doc.default_holdout,
        "default_workers": doc.default_workers,
    }


__all__ = [
    "get_settings",
    "create_fit_run",
    "execute_fit_run",
    "get_fit_run",
    "list_fit_runs",
]
