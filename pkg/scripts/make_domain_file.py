"""Regenerate data/automl_services.json, the reference service-domain file.

Endpoints default to the two local hosts the README walk-through uses.
"""

import json
from pathlib import Path

from svcompose.automl.domain import build_service_domain
from svcompose.domainfile import dump_service_domain
from svcompose.services import ObjectiveRef

DATA = Path(__file__).resolve().parent.parent / "data"

PRIMARY = "http://127.0.0.1:8080"
SECONDARY = "http://127.0.0.1:8081"


def main() -> None:
    objective = ObjectiveRef.of("zero_one_benchmark", {
        "dataset": "data/iris.csv",
        "train_fraction": 0.7,
        "seed": 0,
        "query_inputs": {"identity": f"{PRIMARY}/identity"},
    })
    domain = build_service_domain(PRIMARY, SECONDARY, portfolio="all", objective=objective)
    doc = dump_service_domain(domain)
    out = DATA / "automl_services.json"
    out.write_text(json.dumps(doc, indent=2) + "\n")
    print(f"wrote {out} ({len(domain.services)} services, {len(domain.macros)} macros)")


if __name__ == "__main__":
    main()
