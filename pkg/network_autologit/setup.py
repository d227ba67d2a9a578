"""Installation helpers for Network Autologit."""

from __future__ import annotations

import frappe

from network_autologit.model.optimizer import FitConfig
from network_autologit.network_autologit.doctype.autologit_settings.autologit_settings import (
    SETTINGS_DOCTYPE,
    get_settings_doc,
)

DEFAULT_SETTINGS = {
    **{key: value for key, value in FitConfig().as_dict().items() if key != "lam"},
    "significance_tolerance": 1e-8,
    "default_holdout": 0,
    "default_workers": 1,
}


def seed_default_settings() -> None:
    """Fill every unset field of the settings singleton with the engine defaults."""

    settings_doc = get_settings_doc()
    for fieldname, value in DEFAULT_SETTINGS.items():
        existing = settings_doc.get(fieldname)
        if existing is None or (not existing and fieldname != "default_holdout"):
            settings_doc.set(fieldname, value)

    settings_doc.save(ignore_permissions=True)
    frappe.db.commit()

    frappe.logger("network_autologit").info(
        "Settings singleton initialized", extra={"doctype": SETTINGS_DOCTYPE}
    )


def after_install() -> None:
    seed_default_settings()
