"""Logger access for engine code that may run with or without a Frappe site."""

from __future__ import annotations

import logging
from collections.abc import Mapping
from typing import Any

LOGGER_NAME = "network_autologit"


class ContextAdapter(logging.LoggerAdapter):
    """Appends the ``extra=`` fields to the message as ``key=value`` pairs.

    The fields stay on the record as well, so structured handlers still see them.
    """

    def __init__(self, logger: logging.Logger) -> None:
        super().__init__(logger, {})

    def process(self, msg: Any, kwargs: Mapping[str, Any]) -> tuple[Any, Any]:
        extra = kwargs.get("extra")
        if extra:
            msg = f"{msg} " + " ".join(f"{key}={value}" for key, value in extra.items())
        return msg, kwargs


def get_logger(module: str = LOGGER_NAME) -> ContextAdapter:
    """Return the site logger when a site is bound, else a console logger of the same name."""

    try:
        import frappe
    except ImportError:  # standalone install of the console script
        return ContextAdapter(_console_logger(module))

    if getattr(frappe.local, "site", None):
        return ContextAdapter(frappe.logger(module, allow_site=True))
    return ContextAdapter(frappe.logger(module, allow_site=False, stream_only=True))


def _console_logger(module: str) -> logging.Logger:
    logger = logging.getLogger(module)
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(f"%(asctime)s %(levelname)s {module} %(message)s"))
        logger.addHandler(handler)
        logger.setLevel(logging.INFO)
        logger.propagate = False
    return logger
