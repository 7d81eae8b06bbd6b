import pytest
from fastapi.testclient import TestClient

from app.deps import get_catalog
from app.scenarios import ScenarioCatalog
from main import app


@pytest.fixture
def client(tmp_path):
    app.dependency_overrides[get_catalog] = lambda: ScenarioCatalog(str(tmp_path / "none.yaml"))
    yield TestClient(app)
    app.dependency_overrides.clear()


def test_root(client):
    response = client.get("/")
    assert response.status_code == 200
    assert "running" in response.json()["message"]


def test_scenarios(client):
    response = client.get("/scenarios/")
    assert response.status_code == 200
    names = [s["name"] for s in response.json()]
    assert len(names) == 24
    assert "poisson-incomplete-m1.5" in names


class TestExtinction:
    def test_poisson(self, client):
        response = client.post("/extinction/", json={"offspring": "poisson:1.5"})
        assert response.status_code == 200
        body = response.json()
        assert body["q"] == pytest.approx(0.417188, abs=1e-5)
        assert body["method"] == "bisection"

    def test_invalid_law(self, client):
        response = client.post("/extinction/", json={"offspring": "finite:0.5,0.6"})
        assert response.status_code == 422
        assert response.json()["detail"]["code"] == "invalid_distribution"


class TestEstimate:
    def test_series(self, client):
        payload = {"series": [1, 2, 3, 1], "estimator": {"kind": "mle"}}
        response = client.post("/estimate/", json=payload)
        assert response.status_code == 200
        assert response.json()["summary"]["m_hat"] == 1.0

    def test_rows(self, client):
        payload = {
            "rows": [[0, 0, 1], [1, 1, 0], [1, 0, 0]],
            "estimator": {"kind": "dp", "a": 1.0},
        }
        body = client.post("/estimate/", json=payload).json()
        assert body["estimator"] == "dp(a=1)"
        assert body["summary"]["m_hat"] == pytest.approx(0.8 * 0.75 + 0.2 * 0.6954)
        assert body["summary"]["classification"] == "subcritical_or_critical"

    def test_needs_exactly_one_source(self, client):
        payload = {"series": [1, 2], "rows": [[0, 1]], "estimator": {"kind": "mle"}}
        assert client.post("/estimate/", json=payload).status_code == 422

    def test_inconsistent_rows(self, client):
        payload = {"rows": [[0, 0, 1], [1, 0, 0]], "estimator": {"kind": "mle"}}
        response = client.post("/estimate/", json=payload)
        assert response.status_code == 422
        assert response.json()["detail"]["code"] == "invalid_data"


def test_covid_report(client):
    payload = {
        "counts": [1, 2, 3, 1, 3, 4, 3, 7, 5, 6],
        "days": [2, 10],
        "estimators": [{"kind": "mle"}],
    }
    response = client.post("/covid/report/", json=payload)
    assert response.status_code == 200
    rows = response.json()["rows"]
    assert [r["day"] for r in rows] == [2, 10]
    assert rows[1]["m_hat"] == pytest.approx(34 / 29)
    assert rows[1]["extinction_q"] == pytest.approx(0.853, abs=1e-3)


def test_covid_report_rejects_empty_first_day(client):
    response = client.post("/covid/report/", json={"counts": [0, 2]})
    assert response.status_code == 422
    assert response.json()["detail"]["code"] == "case_data"
