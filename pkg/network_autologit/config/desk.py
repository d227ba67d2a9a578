from __future__ import annotations


def get_data():
    return [
        {
            "module_name": "Network Autologit",
            "label": "Network Autologit",
            "color": "blue",
            "icon": "octicon octicon-graph",
            "type": "module",
            "items": [
                {
                    "type": "doctype",
                    "name": "Network Fit Run",
                    "label": "Fit Runs",
                    "description": "Penalty paths, selected fits and evaluations.",
                },
                {
                    "type": "link",
                    "label": "Configuration",
                    "link_type": "Form",
                    "link_to": "Autologit Settings",
                    "dependencies": ["Autologit Settings"],
                },
            ],
        }
    ]
