from . import __version__ as app_version  # noqa

app_name = "network_autologit"
app_title = "Network Autologit"
app_publisher = "Network Autologit Developers"
app_description = "Sparse autologistic models for dynamic directed networks"
app_email = ""
app_license = "MIT"

# Installation
# ------------

after_install = "network_autologit.setup.after_install"

# Scheduled Tasks
# ---------------

# scheduler_events = {
# 	"daily": [
# 		"network_autologit.tasks.daily"
# 	],
# }

# Testing
# -------

# before_tests = "network_autologit.setup.after_install"

# Job Events
# ----------
# before_job = ["network_autologit.utils.before_job"]
# after_job = ["network_autologit.utils.after_job"]
