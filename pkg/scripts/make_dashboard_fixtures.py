#!/usr/bin/env python3
"""Regenerate the dashboard test fixtures from the real service.

Runs the HTTP app in-process with the same monotone fixture model the risk
tests use, captures the responses the dashboard consumes, and writes them to
frontend/tests/fixtures/. Run from the repo root:

    python3 scripts/make_dashboard_fixtures.py
"""

import json
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from airrisk.fixtures import monotone_risk_model
from airrisk.lstm import model_to_dict
from airrisk.service import create_app

FIXTURES = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"

GRID = {
    "rows": 2, "cols": 2,
    "bbox": {"lat_min": 44.0, "lat_max": 46.0, "lon_min": 8.0, "lon_max": 11.0},
}


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    app = create_app()
    with TestClient(app) as client:
        base = np.abs(np.random.default_rng(2).normal(size=(3, 8))) + 0.2
        client.post("/datasets", json={
            "name": "baseline-features", "kind": "features",
            "payload": {"sources": ["no2_mean", "mobility", "lockdown"],
                        "data": base.tolist()},
        }).raise_for_status()
        model = monotone_risk_model(n_in=3, n_out=4, source_index=1)
        client.post("/datasets", json={
            "name": "mono", "kind": "model", "payload": model_to_dict(model),
            "baseline": "baseline-features", "grid": GRID,
        }).raise_for_status()

        captures = {
            "config.json": client.get("/config").json(),
            "models.json": client.get("/models").json(),
            "scenario.schema.json": client.get("/schemas/scenario").json(),
            "baseline.json": client.post("/scenarios", json={
                "model": "mono",
                "scenario": {"description": "", "overrides": []},
            }).json(),
            "mobility_half.json": client.post("/scenarios", json={
                "model": "mono",
                "scenario": {
                    "description": "halve mobility",
                    "overrides": [{"source": "mobility", "steps": [0, 8],
                                   "mode": "mul", "value": 0.5}],
                },
            }).json(),
        }
    for name, doc in captures.items():
        (FIXTURES / name).write_text(json.dumps(doc, indent=2) + "\n")
        print(f"wrote {FIXTURES / name}")


if __name__ == "__main__":
    main()
