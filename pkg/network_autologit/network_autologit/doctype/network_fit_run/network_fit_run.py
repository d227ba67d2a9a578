"""Server logic for Network Fit Run."""

from __future__ import annotations

import dataclasses
import json

import frappe
from frappe import _
from frappe.model.document import Document
from frappe.utils import cint

from network_autologit import pipeline
from network_autologit.exceptions import AutologitError
from network_autologit.logger import get_logger
from network_autologit.model import storage
from network_autologit.model.selection import LambdaGrid
from network_autologit.network_autologit.doctype.autologit_settings.autologit_settings import (
    get_fit_config,
    get_lambda_grid,
    get_output_root,
    get_settings_doc,
)

EVALUATION_DIR = "evaluation"


class NetworkFitRun(Document):
    def validate(self):
        if not (self.series_path or "").strip():
            frappe.throw(_("Series path is required"))
        if cint(self.holdout) < 0:
            frappe.throw(_("Holdout cannot be negative"))
        if self.lambda_grid:
            try:
                LambdaGrid.parse(self.lambda_grid)
            except AutologitError as exc:
                frappe.throw(_(str(exc)), frappe.ValidationError)

    def run_config(self) -> pipeline.RunConfig:
        settings = get_settings_doc()
        grid = LambdaGrid.parse(self.lambda_grid) if self.lambda_grid else get_lambda_grid(settings)
        output = get_output_root(settings) / self.name
        output.mkdir(parents=True, exist_ok=True)
        return pipeline.RunConfig(
            output=output,
            input=self.series_path,
            grid=grid,
            fit=get_fit_config(settings),
            holdout=cint(self.holdout),
            workers=cint(self.workers) or cint(settings.default_workers) or 1,
            significance_tolerance=settings.significance_tolerance or 1e-8,
        )

    def run(self) -> None:
        """Fit the path (and evaluate when a holdout is set), recording the outcome."""
        logger = get_logger("network_autologit")
        self.db_set("status", "Running")
        try:
            config = self.run_config()
            series = storage.read_series(config.input)
            self.node_count = series.n
            self.slice_count = series.T
            outcome = pipeline.run_fit(config)
            self.selected_lambda = outcome.path.selected_lambda
            self.best_bic = outcome.best_bic
            self.qualifying_pairs = outcome.table.qualifying_pairs
            self.output_dir = str(config.output)
            if config.holdout:
                evaluation = config.output / EVALUATION_DIR
                evaluation.mkdir(exist_ok=True)
                result = pipeline.run_evaluate(dataclasses.replace(config, output=evaluation))
                self.auc_summary = json.dumps(
                    [{"origin": o.origin, "auc": o.auc} for o in result.origins], indent=1
                )
        except AutologitError as exc:
            self.mark_failed(str(exc))
            logger.error("Fit run failed", extra={"run": self.name, "error": str(exc)})
        except Exception as exc:  # noqa: BLE001
            self.mark_failed(f"{type(exc).__name__}: {exc}")
            frappe.log_error(
                title=f"Network Fit Run {self.name} failed", message=frappe.get_traceback()
            )
        else:
            self.status = "Completed"
            self.error_message = None
            logger.info(
                "Fit run completed", extra={"run": self.name, "lambda": self.selected_lambda}
            )
        self.save(ignore_permissions=True)

    def mark_failed(self, message: str) -> None:
        self.status = "Failed"
        self.error_message = message
