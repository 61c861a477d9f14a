"""Service-layer tests, run in-process against the ASGI app."""

import pytest
from fastapi.testclient import TestClient

import choose4
from choose4.service import create_app

FLEMING_CONFIG = {"theta0": 1.3, "theta1": 0.8, "deaths": [89, 110, 131, 178],
                  "beta": 0.1, "final_alpha": 0.025}
FAST_INTEGRATION = {"n_samples": 1 << 16, "n_batches": 16}


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(), raise_server_exceptions=False)


def test_healthz(client):
    r = client.get("/healthz")
    assert r.status_code == 200
    assert r.json() == {"status": "ok", "engine_version": choose4.__version__}


def test_strategies_listing(client):
    r = client.get("/v1/strategies")
    assert r.status_code == 200
    rows = {s["name"]: s for s in r.json()["strategies"]}
    assert set(rows) == {"fleming", "rodriguez", "standard_ci",
                         "discrete_threshold", "fda_t2d", "custom"}
    assert rows["fleming"]["fields"] == ["theta0", "theta1", "deaths", "beta",
                                         "final_alpha"]
    assert rows["rodriguez"]["summary"]


def test_solve_endpoint_values(client):
    r = client.post("/v1/solve", json={
        "inputs": {"theta0": 1.3, "theta1": 0.8, "alpha": 0.05, "beta": 0.1}})
    assert r.status_code == 200
    body = r.json()
    params = body["parameters"]
    assert params["d"]["value"] == 145.0
    assert params["d"]["display"] == "145"
    assert params["d"]["chosen"] is False
    assert params["theta_star"]["value"] == pytest.approx(0.9897633331284637,
                                                          abs=1e-12)
    assert params["alpha"]["value"] == pytest.approx(0.05033723365676868, abs=1e-12)
    assert params["theta0"]["chosen"] is True
    assert body["solve_route"] == "simultaneous-closed-form"
    assert sorted(body["unknowns"]) == ["d", "theta_star"]
    assert body["rounding"]["policy"] == "nearest"
    assert body["rounding"]["floated"] == "alpha"
    assert body["warnings"] == []
    prov = body["provenance"]
    assert prov["schema_version"] == "1"
    assert prov["engine_version"] == choose4.__version__
    assert len(prov["request_sha256"]) == 64


def test_solve_exact_rounding_no_note(client):
    r = client.post("/v1/solve", json={
        "inputs": {"theta0": 1.3, "theta1": 0.8, "alpha": 0.05, "beta": 0.1},
        "rounding": "exact"})
    assert r.status_code == 200
    assert r.json()["rounding"] is None
    assert r.json()["parameters"]["d"]["value"] == pytest.approx(
        145.3237036326719, rel=1e-10)


def test_request_hash_is_canonical(client):
    a = client.post("/v1/solve", json={
        "inputs": {"theta0": 1.3, "theta1": 0.8, "alpha": 0.05, "beta": 0.1}})
    b = client.post("/v1/solve", json={
        "inputs": {"beta": 0.1, "alpha": 0.05, "theta1": 0.8, "theta0": 1.3}})
    c = client.post("/v1/solve", json={
        "inputs": {"theta0": 1.3, "theta1": 0.8, "alpha": 0.025, "beta": 0.1}})
    sha = lambda r: r.json()["provenance"]["request_sha256"]  # noqa: E731
    assert sha(a) == sha(b)          # key order cannot matter
    assert sha(a) != sha(c)          # values must


def test_plan_evaluate_fleming(client):
    r = client.post("/v1/plan/evaluate", json={
        "strategy": "fleming", "config": FLEMING_CONFIG,
        "integration": FAST_INTEGRATION})
    assert r.status_code == 200
    body = r.json()
    assert body["strategy"] == "fleming"
    assert [s["label"] for s in body["stages"]] == ["IA1", "IA2", "IA3", "FA"]
    ia1 = body["stages"][0]
    assert ia1["cells"]["theta_star"]["display"] == "1.050"
    assert ia1["cells"]["alpha"]["display"] == "0.157"
    assert ia1["cells"]["beta"]["chosen"] is True
    # default probes: the final look's theta0 and theta1
    assert [o["true_hr"] for o in body["ocs"]] == [1.3, 0.8]
    assert body["ocs"][0]["prob_all_met"] == pytest.approx(0.0169799, abs=2e-3)
    assert body["ocs"][1]["prob_all_met"] == pytest.approx(0.8185501, abs=2e-3)
    assert body["ocs"][0]["display"]["prob_all_met"] == "0.017"
    assert body["ocs"][1]["display"]["prob_all_met"] == "0.819"
    assert len(body["ocs"][0]["first_flag_by_stage"]) == 4


def test_plan_evaluate_fda_t2d_probes_final_theta0(client):
    # interim looks carry their own effective theta0 (1.59/1.48/1.41), but
    # the default OC probes must come from the final look
    r = client.post("/v1/plan/evaluate", json={
        "strategy": "fda_t2d",
        "config": {"theta0": 1.3, "theta1": 0.8, "deaths": [89, 110, 131, 178],
                   "alpha": 0.025, "beta": 0.1},
        "integration": FAST_INTEGRATION})
    assert r.status_code == 200
    body = r.json()
    assert body["stages"][0]["cells"]["theta0"]["display"] == "1.591"
    assert [o["true_hr"] for o in body["ocs"]] == [1.3, 0.8]


def test_plan_evaluate_custom_probes(client):
    r = client.post("/v1/plan/evaluate", json={
        "strategy": "fleming", "config": FLEMING_CONFIG,
        "true_hrs": [1.0], "integration": FAST_INTEGRATION})
    assert [o["true_hr"] for o in r.json()["ocs"]] == [1.0]


def test_curve_endpoint(client):
    r = client.post("/v1/curve", json={
        "theta1": 0.8, "beta": 0.1, "d_min": 40, "d_max": 200,
        "theta0": 1.3, "alpha_cap": 0.15})
    assert r.status_code == 200
    body = r.json()
    assert len(body["points"]) == 161
    assert body["points"][0]["d"] == 40
    assert body["points"][0]["theta_star"] == pytest.approx(1.1997565213033863,
                                                            abs=1e-12)
    assert body["bands"], "bands expected when theta0 is supplied"
    flagged = [b for b in body["bands"] if b["exceeds_cap"]]
    assert flagged and flagged[0]["d_lo"] == 40


def test_curve_without_bands(client):
    r = client.post("/v1/curve", json={
        "theta1": 0.8, "beta": 0.1, "d_min": 40, "d_max": 60})
    assert r.status_code == 200
    assert r.json()["bands"] == []
    r = client.post("/v1/curve", json={
        "theta1": 0.8, "beta": 0.1, "d_min": 40, "d_max": 60,
        "theta0": 1.3, "include_bands": False})
    assert r.json()["bands"] == []


def test_simulate_via_strategy(client):
    req = {
        "scenario": {"n_patients": 300, "accrual_years": 1.0,
                     "control_median": 3.0, "hazard_ratio": 1.3},
        "strategy": "rodriguez",
        "config": {"theta0": 1.3, "theta1": 0.8, "alphas": [0.05, 0.025],
                   "beta": 0.1},
        "n_reps": 50, "seed": 5}
    r = client.post("/v1/simulate", json=req)
    assert r.status_code == 200
    body = r.json()
    assert body["n_reps"] == 50
    assert body["n_effective"] + body["n_degenerate"] + body["n_insufficient"] == 50
    assert [s["d"] for s in body["stages"]] == [145, 178]
    again = client.post("/v1/simulate", json=req).json()
    assert again["prob_all_met"] == body["prob_all_met"]


def test_simulate_requires_one_schedule_source(client):
    scenario = {"n_patients": 100, "accrual_years": 1.0, "control_median": 3.0,
                "hazard_ratio": 1.0}
    r = client.post("/v1/simulate", json={"scenario": scenario})
    assert r.status_code == 400
    r = client.post("/v1/simulate", json={
        "scenario": scenario, "deaths": [50]})
    assert r.status_code == 400
    r = client.post("/v1/simulate", json={
        "scenario": scenario, "deaths": [50], "thresholds": [1.0],
        "strategy": "fleming", "config": FLEMING_CONFIG})
    assert r.status_code == 400


def test_problem_documents(client):
    # domain: the invalid unknown pair
    r = client.post("/v1/solve", json={
        "inputs": {"theta1": 0.8, "d": 100, "theta_star": 1.0, "beta": 0.1}})
    assert r.status_code == 400
    body = r.json()
    assert set(body) == {"status", "code", "title", "detail"}
    assert body["code"] == "invalid_pattern"
    assert body["status"] == 400

    # domain: out-of-range value
    r = client.post("/v1/solve", json={
        "inputs": {"theta0": 1.3, "theta1": 0.8, "alpha": 5.0, "beta": 0.1}})
    assert r.status_code == 400
    assert r.json()["code"] == "domain"

    # domain: non-monotone death schedule
    r = client.post("/v1/plan/evaluate", json={
        "strategy": "fleming",
        "config": {**FLEMING_CONFIG, "deaths": [131, 110]}})
    assert r.status_code == 400
    assert r.json()["code"] == "nonmonotone_deaths"

    # validation: unknown top-level field
    r = client.post("/v1/solve", json={
        "inputs": {"theta0": 1.3, "theta1": 0.8, "alpha": 0.05, "beta": 0.1},
        "bogus": True})
    assert r.status_code == 422
    assert r.json()["code"] == "validation"
    assert "bogus" in r.json()["detail"]


def test_payload_limits(client):
    r = client.post("/v1/plan/evaluate", json={
        "strategy": "fleming", "config": FLEMING_CONFIG,
        "true_hrs": [1.0] * 30})
    assert r.status_code == 413
    assert r.json()["code"] == "payload_too_large"

    r = client.post("/v1/curve", json={
        "theta1": 0.8, "beta": 0.1, "d_min": 1, "d_max": 100_000})
    assert r.status_code == 413

    r = client.post("/v1/simulate", json={
        "scenario": {"n_patients": 100, "accrual_years": 1.0,
                     "control_median": 3.0, "hazard_ratio": 1.0},
        "deaths": [50], "thresholds": [1.0], "n_reps": 10_000_000})
    assert r.status_code == 413


def test_static_mount(tmp_path):
    (tmp_path / "index.html").write_text("<h1>design console</h1>")
    app = create_app(static_dir=str(tmp_path))
    client = TestClient(app)
    assert client.get("/healthz").status_code == 200  # API beats the mount
    page = client.get("/")
    assert page.status_code == 200
    assert "design console" in page.text
