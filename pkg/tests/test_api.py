import pytest
from fastapi.testclient import TestClient

from config import Bounds
from dependencies import get_bounds
from main import app
from services.fibration import counterexample_triangle, span_triangle
from services.fincat import identity_functor
from tests.conftest import arrow_category, collapse_span, inclusion
from utils.serialization import category_to_file, functor_to_file

Z4_EXTENSION = {
    "name": "X", "n": 1, "c": "Z2", "b": "Z2", "terms": ["Z4"],
    "maps": [{"0": "0", "1": "1", "2": "0", "3": "1"}, {"0": "0", "1": "2"}],
}


@pytest.fixture
def client():
    yield TestClient(app)
    app.dependency_overrides.clear()


def triangle_request(t):
    """Categories inline, functors referencing them by name"""
    return {
        "x": category_to_file(t.x),
        "m": category_to_file(t.m),
        "a": category_to_file(t.a),
        "p": functor_to_file(t.p, source_ref=t.x.name, target_ref=t.m.name),
        "g": functor_to_file(t.g, source_ref=t.m.name, target_ref=t.a.name),
    }


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "ok"


class TestCategoryRoutes:
    def test_validate_reports_violations_as_data(self, client):
        doc = category_to_file(arrow_category())
        assert client.post("/api/categories/validate", json=doc).json()["violations"] == []
        doc["compose"] = [c for c in doc["compose"] if c[0] != "u"]
        response = client.post("/api/categories/validate", json=doc)
        assert response.status_code == 200
        assert response.json()["violations"]

    def test_classify(self, client):
        doc = functor_to_file(inclusion(arrow_category(), "0"))
        body = client.post("/api/functors/classify", json=doc).json()
        assert body["fibration"] and body["discrete_fibration"]
        assert not body["opfibration"]
        assert body["witness"]["opfibration"] == {"object": "*", "arrow": "u"}

    def test_chevalley(self, client):
        doc = functor_to_file(identity_functor(arrow_category()), target_ref="2")
        body = client.post("/api/functors/chevalley", json=doc).json()
        assert body["property"] == "Chevalley criterion"
        assert body["holds"]

    def test_factorize(self, client):
        req = triangle_request(span_triangle(collapse_span(), 0))
        req["check_initial"] = True
        response = client.post("/api/triangles/factorize", json=req)
        assert response.status_code == 200
        body = response.json()
        assert sorted(body["blocks"]) == ["[(a0,e0)]", "[(a1,e0)]"]
        assert all(v["holds"] for v in body["verdicts"])
        assert body["verdicts"][-1]["property"] == "Q initial"

    def test_factorize_rejects_counterexample(self, client):
        response = client.post("/api/triangles/factorize", json=triangle_request(counterexample_triangle()))
        assert response.status_code == 409
        assert response.json()["error"] == "PropertyFailure"

    def test_bound_exceeded(self, client):
        app.dependency_overrides[get_bounds] = lambda: Bounds(max_arrows=2)
        doc = functor_to_file(identity_functor(arrow_category()), target_ref="2")
        response = client.post("/api/functors/classify", json=doc)
        assert response.status_code == 413
        assert response.json()["error"] == "BoundExceeded"

    def test_malformed_request(self, client):
        response = client.post("/api/categories/validate", json={"objects": ["x"]})
        assert response.status_code == 422
        assert response.json()["detail"] == "Invalid request format"


class TestExtensionRoutes:
    def test_classify(self, client):
        body = client.post("/api/extensions/classify", json={"c": "Z2", "b": "Z2"}).json()
        assert body["count"] == 2
        assert not body["relative_to_bound"]

    def test_classify_two_fold(self, client):
        body = client.post("/api/extensions/classify", json={"c": "Z1", "b": "Z2", "n": 2}).json()
        assert body["count"] == 1
        assert body["relative_to_bound"]
        assert body["bound"] == 4

    def test_unknown_group(self, client):
        response = client.post("/api/extensions/classify", json={"c": "Z99", "b": "Z2"})
        assert response.status_code == 422
        assert response.json()["error"] == "InputError"

    def test_pushforward(self, client):
        req = {"extension": Z4_EXTENSION, "beta": {"source": "Z2", "target": "Z2", "map": {"0": "0", "1": "0"}}}
        body = client.post("/api/extensions/pushforward", json=req).json()
        assert body["valid"]
        assert len(body["extension"]["terms"][0]["elements"]) == 4

    def test_pullback(self, client):
        req = {"extension": Z4_EXTENSION, "gamma": {"source": "Z1", "target": "Z2", "map": {"0": "0"}}}
        body = client.post("/api/extensions/pullback", json=req).json()
        assert body["valid"]
        assert len(body["extension"]["terms"][0]["elements"]) == 2
