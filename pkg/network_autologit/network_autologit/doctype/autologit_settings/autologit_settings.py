"""Server logic for Autologit Settings."""

from __future__ import annotations

from pathlib import Path

import frappe
from frappe import _
from frappe.model.document import Document
from frappe.utils import cint, flt

from network_autologit.exceptions import ConfigError
from network_autologit.model.optimizer import FitConfig
from network_autologit.model.selection import LambdaGrid

SETTINGS_DOCTYPE = "Autologit Settings"


class AutologitSettings(Document):
    def validate(self):
        try:
            get_fit_config(self)
            get_lambda_grid(self)
        except ConfigError as exc:
            frappe.throw(_(str(exc)), frappe.ValidationError)

        if flt(self.significance_tolerance) <= 0:
            frappe.throw(_("Significance tolerance must be positive"))
        if cint(self.default_holdout) < 0:
            frappe.throw(_("Default holdout cannot be negative"))
        if cint(self.default_workers) < 1:
            self.default_workers = 1


def get_settings_doc() -> frappe.model.document.Document:
    """Return the singleton settings document, creating it if missing."""

    try:
        return frappe.get_single(SETTINGS_DOCTYPE)
    except frappe.DoesNotExistError:
        doc = frappe.new_doc(SETTINGS_DOCTYPE)
        doc.insert(ignore_permissions=True)
        return doc


def get_fit_config(settings=None) -> FitConfig:
    settings = settings or get_settings_doc()
    return FitConfig.from_mapping(settings.as_dict())


def get_lambda_grid(settings=None) -> LambdaGrid:
    settings = settings or get_settings_doc()
    if (settings.lambda_grid or "").strip():
        return LambdaGrid.parse(settings.lambda_grid)
    return LambdaGrid.log_spaced()


def get_output_root(settings=None) -> Path:
    settings = settings or get_settings_doc()
    if settings.output_root:
        return Path(settings.output_root)
    return Path(frappe.get_site_path("private", "files", "autologit"))
