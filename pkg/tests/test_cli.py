import json

import pytest

from isac_elm.cli import EXIT_CONFIG, EXIT_NUMERIC, build_parser, main
from isac_elm.errors import NumericError

TRAIN = ["--v-count", "6", "--q-count", "2", "--hidden", "16,32"]
FAST = TRAIN + ["--n-test", "4"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestParser:
    @pytest.mark.parametrize("cmd", ["gen-data", "train", "eval", "complexity"])
    def test_common_flags(self, cmd):
        args = build_parser().parse_args([cmd, "--seed", "18446744073709551615", "--profile", "paper",
                                          "--out", "x", "--config", "c.json"])
        assert args.seed == 2 ** 64 - 1 and args.profile == "paper"

    def test_sweep_axis_choices(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["sweep", "--axis", "K", "--values", "1"])

    def test_inf_sentinel(self):
        args = build_parser().parse_args(["eval", "--test-snr", "inf,-5"])
        assert args.test_snr == [float("inf"), -5.0]


class TestCommands:
    def test_eval_ls_exact(self, capsys):
        code, out, _ = run(capsys, "eval", "--estimators", "LS", "--test-snr", "inf", "--n-test", "3")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "estimator,stage,input_type,receiver,channel,snr_db,nmse,n_test,seed"
        assert all(float(line.split(",")[6]) < 1e-18 for line in lines[1:])

    def test_offline_online_split(self, capsys, tmp_path):
        fams = "S1I2-BS,S2I2-BS"
        assert run(capsys, "gen-data", "--families", fams, "--out", str(tmp_path / "d"), *FAST[:4])[0] == 0
        assert sorted(p.name for p in (tmp_path / "d").iterdir()) == ["S1I2-BS.bin", "S2I2-BS.bin"]
        code, _, _ = run(capsys, "train", "--families", fams, "--data", str(tmp_path / "d"),
                         "--out", str(tmp_path / "m"), *TRAIN)
        assert code == 0
        out_a = tmp_path / "a.csv"
        code, _, _ = run(capsys, "eval", "--families", fams, "--models", str(tmp_path / "m"),
                         "--test-snr", "0", "--out", str(out_a), *FAST)
        assert code == 0
        # the same seed trained in-process gives the same networks
        code, direct, _ = run(capsys, "eval", "--families", fams, "--test-snr", "0", *FAST)
        assert out_a.read_text() == direct

    def test_train_rejects_foreign_dataset(self, capsys, tmp_path):
        run(capsys, "gen-data", "--families", "S1I2-D1", "--out", str(tmp_path / "d"), *FAST[:4])
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"M": 3}))
        code, _, err = run(capsys, "train", "--families", "S1I2-D1", "--data", str(tmp_path / "d"),
                           "--config", str(cfg), "--out", str(tmp_path / "m"))
        assert code == EXIT_CONFIG and "different config" in err

    def test_sweep(self, capsys):
        code, out, _ = run(capsys, "sweep", "--axis", "L", "--values", "3,4", "--estimators", "LS",
                           "--test-snr", "inf", "--n-test", "2")
        assert code == 0 and out.splitlines()[0].startswith("L,estimator")

    def test_complexity(self, capsys, tmp_path):
        path = tmp_path / "c.csv"
        code, _, _ = run(capsys, "complexity", "--axis", "M", "--values", "2,4,6", "--out", str(path))
        lines = path.read_text().splitlines()
        assert code == 0 and lines[0] == "family,M,K,L,C1,C2,P1,P2,adds,mults"
        assert {line.split(",")[1] for line in lines[1:]} == {"2", "4", "6"}


class TestExitCodes:
    def test_bad_config_value(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"L": 0}))
        assert run(capsys, "eval", "--config", str(path))[0] == EXIT_CONFIG

    def test_unknown_config_key(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"bogus": 1}))
        assert run(capsys, "complexity", "--config", str(path))[0] == EXIT_CONFIG

    def test_missing_config_file(self, capsys, tmp_path):
        assert run(capsys, "eval", "--config", str(tmp_path / "nope.json"))[0] == EXIT_CONFIG

    def test_broken_chain(self, capsys):
        assert run(capsys, "eval", "--families", "S2I1-BS")[0] == EXIT_CONFIG

    def test_numeric_failure(self, capsys, monkeypatch):
        from isac_elm.service import ops

        def boom(*_a, **_k):
            raise NumericError("non-finite output weights")

        monkeypatch.setattr(ops, "run_eval", boom)
        code, _, err = run(capsys, "eval")
        assert code == EXIT_NUMERIC and "numeric" in err

    def test_remote_offline_rejected(self, capsys):
        assert run(capsys, "gen-data", "--remote", "http://127.0.0.1:1")[0] == EXIT_CONFIG
