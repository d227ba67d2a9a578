"""Fit run API: queue, execute and inspect Network Fit Run records."""

from __future__ import annotations

import json
from typing import Any

import frappe
from frappe import _
from frappe.utils import cint

from network_autologit.exceptions import AutologitError
from network_autologit.logger import get_logger
from network_autologit.model.selection import LambdaGrid
from network_autologit.network_autologit.doctype.autologit_settings.autologit_settings import (
    get_settings_doc,
)

RUN_DOCTYPE = "Network Fit Run"
RUN_FIELDS = [
    "name",
    "series_path",
    "status",
    "selected_lambda",
    "best_bic",
    "qualifying_pairs",
    "output_dir",
    "modified",
]


def _serialize(doc) -> dict[str, Any]:
    return {
        "name": doc.name,
        "series_path": doc.series_path,
        "status": doc.status,
        "node_count": doc.node_count,
        "slice_count": doc.slice_count,
        "lambda_grid": doc.lambda_grid,
        "holdout": cint(doc.holdout),
        "selected_lambda": doc.selected_lambda,
        "best_bic": doc.best_bic,
        "qualifying_pairs": doc.qualifying_pairs,
        "output_dir": doc.output_dir,
        "auc": json.loads(doc.auc_summary) if doc.auc_summary else None,
        "error_message": doc.error_message,
    }


@frappe.whitelist()
def create_fit_run(payload: str | dict[str, Any]) -> dict[str, Any]:
    """Insert a fit run and queue it on the long worker queue."""
    data = json.loads(payload) if isinstance(payload, str) else payload
    if not data.get("series_path"):
        frappe.throw(_("Series path is required"))

    grid = data.get("lambda_grid")
    if isinstance(grid, (list, tuple)):
        grid = ",".join(str(v) for v in grid)
    if grid:
        try:
            LambdaGrid.parse(grid)
        except AutologitError as exc:
            frappe.throw(_(str(exc)), frappe.ValidationError)

    holdout = data.get("holdout")
    if holdout is None:
        holdout = get_settings_doc().default_holdout

    doc = frappe.get_doc(
        {
            "doctype": RUN_DOCTYPE,
            "series_path": data["series_path"],
            "lambda_grid": grid,
            "holdout": cint(holdout),
            "workers": cint(data.get("workers")) or None,
            "status": "Queued",
        }
    )
    doc.insert()

    frappe.enqueue(
        "network_autologit.api.fit_runs.execute_fit_run",
        queue="long",
        timeout=6 * 3600,
        name=doc.name,
        enqueue_after_commit=True,
    )
    get_logger().info("Fit run queued", extra={"run": doc.name, "series": doc.series_path})
    return _serialize(doc)


def execute_fit_run(name: str) -> dict[str, Any]:
    """Job body; also callable directly for synchronous runs."""
    doc = frappe.get_doc(RUN_DOCTYPE, name)
    doc.run()
    frappe.db.commit()
    return _serialize(doc)


@frappe.whitelist()
def get_fit_run(name: str) -> dict[str, Any]:
    if not frappe.db.exists(RUN_DOCTYPE, name):
        frappe.throw(_("Fit run {0} not found").format(name), frappe.DoesNotExistError)
    return _serialize(frappe.get_doc(RUN_DOCTYPE, name))


@frappe.whitelist()
def list_fit_runs(limit: int = 20) -> list[dict[str, Any]]:
    return frappe.get_all(
        RUN_DOCTYPE,
        fields=RUN_FIELDS,
        order_by="modified desc",
        limit_page_length=max(1, min(cint(limit) or 20, 200)),
    )
