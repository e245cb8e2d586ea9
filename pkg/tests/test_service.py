import math

import pytest
from fastapi.testclient import TestClient

from isac_elm.cli import EXIT_CONFIG, EXIT_NUMERIC, main
from isac_elm.service import create_app
from isac_elm.service.schemas import EvalRequest, encode_snr, parse_snr


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


class TestSchemas:
    def test_snr_sentinel(self):
        req = EvalRequest(test_snr_db=["inf", -5])
        assert req.test_snr_db == [math.inf, -5.0]
        assert req.model_dump(mode="json")["test_snr_db"] == ["inf", -5.0]
        assert EvalRequest.model_validate(req.model_dump(mode="json")) == req

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            parse_snr("nan")
        assert encode_snr(-math.inf) == "-inf"

    def test_extra_field_rejected(self):
        with pytest.raises(ValueError):
            EvalRequest(colour="red")


class TestEndpoints:
    def test_health(self, client):
        assert client.get("/health").json()["status"] == "ok"

    def test_validate(self, client):
        body = client.post("/config/validate", json={"profile": "paper"}).json()
        assert body["valid"] and body["derived"]["p_s1"] == 12

    def test_eval(self, client):
        resp = client.post("/eval", json={"estimators": ["LS"], "test_snr_db": ["inf"], "n_test": 2})
        assert resp.status_code == 200
        body = resp.json()
        assert body["rows"] == 5 and body["csv"].startswith("estimator,")

    def test_sweep(self, client):
        resp = client.post("/sweep", json={"estimators": ["LS"], "test_snr_db": [0], "n_test": 2,
                                           "axis": "M", "values": [2, 3]})
        assert resp.status_code == 200 and resp.json()["rows"] == 10

    def test_complexity(self, client):
        resp = client.post("/complexity", json={"profile": "paper", "families": ["S1I2-BS"]})
        lines = resp.json()["csv"].splitlines()
        assert lines[1] == "ELM-S1I2-BS,6,6,30,1,31,12,6,{},{}".format(
            202156 + int(lines[2].split(",")[-2]), 201600 + int(lines[2].split(",")[-1]))

    def test_config_error(self, client):
        resp = client.post("/eval", json={"config": {"K": 0}})
        assert resp.status_code == 422 and resp.json()["kind"] == "config"

    def test_schema_error(self, client):
        assert client.post("/eval", json={"n_test": 0}).status_code == 422

    def test_dependency_error(self, client):
        resp = client.post("/eval", json={"families": ["S2I2-D1"]})
        assert resp.status_code == 400 and resp.json()["kind"] == "dependency"

    def test_bad_axis_values(self, client):
        resp = client.post("/complexity", json={"axis": "L"})
        assert resp.status_code == 400 and resp.json()["kind"] == "invalid"


class TestRemoteClient:
    """The CLI's --remote path, routed into the in-process app."""

    @pytest.fixture(autouse=True)
    def route(self, client, monkeypatch):
        import httpx

        def post(url, json, timeout):
            return client.post(url.replace("http://svc", ""), json=json)

        monkeypatch.setattr(httpx, "post", post)

    def test_eval_matches_local(self, capsys):
        argv = ["eval", "--estimators", "LS", "--test-snr", "0,inf", "--n-test", "3", "--seed", "5"]
        assert main(argv) == 0
        local = capsys.readouterr().out
        assert main(argv + ["--remote", "http://svc"]) == 0
        assert capsys.readouterr().out == local

    def test_complexity(self, capsys):
        assert main(["complexity", "--remote", "http://svc"]) == 0
        assert capsys.readouterr().out.startswith("family,M")

    def test_config_error_exit(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        path.write_text('{"M": -2}')
        assert main(["eval", "--config", str(path), "--remote", "http://svc"]) == EXIT_CONFIG

    def test_server_numeric_error_exit(self, capsys, monkeypatch):
        from isac_elm.errors import NumericError
        from isac_elm.service import ops

        def boom(_req):
            raise NumericError("singular")

        monkeypatch.setattr(ops, "run_sweep", boom)
        code = main(["sweep", "--axis", "snr", "--values", "0", "--remote", "http://svc"])
        assert code == EXIT_NUMERIC
