"""Seed Autologit Settings on sites where the singleton is missing or incomplete."""

from __future__ import annotations

import frappe


def execute() -> None:
    if not frappe.db.exists("DocType", "Autologit Settings"):
        frappe.logger("network_autologit").warning(
            "Autologit Settings doctype is not installed yet, skipping patch"
        )
        return

    from network_autologit.setup import seed_default_settings

    try:
        seed_default_settings()
    except Exception as e:
        frappe.logger("network_autologit").error(
            f"Failed to seed Autologit Settings: {e}",
            exc_info=True,
        )
        raise
