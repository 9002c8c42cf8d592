"""HTTP surface: health, checkers, classification and the singular-integral oracle."""
import math

import pytest
from fastapi.testclient import TestClient

from main import app

SW_MIXED = {"n": 3, "p": 2, "q": 4, "p_tilde": 2, "q_tilde": 2, "alpha": "-0.4", "beta": 0, "gamma": "2.65"}


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


def test_list_checkers(client):
    checkers = client.get("/api/checkers").json()
    assert "mixed-sw" in checkers and "ckn" in checkers


def test_check(client):
    response = client.post("/api/check/mixed-sw", json=SW_MIXED)
    assert response.status_code == 200
    body = response.json()
    assert body["overall"] == "pass"
    assert body["theorem_id"] == "mixed-sw"


def test_check_unknown_and_invalid(client):
    assert client.post("/api/check/bogus", json=SW_MIXED).status_code == 404
    assert client.post("/api/check/mixed-sw", json={"n": 3, "p": 0.5}).status_code == 422
    # gamma missing: the checker's own configuration error
    incomplete = {k: v for k, v in SW_MIXED.items() if k != "gamma"}
    response = client.post("/api/check/mixed-sw", json=incomplete)
    assert response.status_code == 422
    assert "gamma" in response.json()["detail"]


def test_classify(client):
    response = client.post("/api/classify", json={"alpha": "-1/2", "p": 3, "p_tilde": 12, "s": 4})
    assert response.status_code == 200
    body = response.json()
    assert body["value"] == "Global"
    assert body["boundary"] is True


def test_classify_rejects_off_scaling(client):
    response = client.post("/api/classify", json={"alpha": 0, "p": 3, "p_tilde": 3, "s": 3})
    assert response.status_code == 422


def test_scan(client):
    payload = {"template": SW_MIXED, "checker": "mixed-sw",
               "axes": [{"field": "q_tilde", "start": 2, "stop": 3, "steps": 10}]}
    body = client.post("/api/scan", json=payload).json()
    assert body["overall"] == ["pass"] * 3 + ["fail"] * 8


def test_singint(client):
    body = client.get("/api/singint", params={"nu": 1.0, "r": 3.0}).json()
    assert body["value"] == pytest.approx(4 * math.pi / 3, rel=1e-10)
    assert body["envelope"]["regime"] == "far"
    assert client.get("/api/singint", params={"nu": 0.0, "r": 1.0}).status_code == 422


def test_singint_scan(client):
    body = client.get("/api/singint/scan", params={"nu": 1.0, "regime": "far", "samples": 10}).json()
    assert body["samples"] == 10
    assert body["max_ratio"] / body["min_ratio"] < 2
