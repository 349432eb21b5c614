from fractions import Fraction

import pytest

from resilience_lab.core import ClientInteractivity, ValidatorModel
from resilience_lab.harness import (
    ConfigError,
    ScenarioConfig,
    SweepResult,
    hierarchy_check,
    load_config,
    parse_config,
    parse_range,
    read_trace,
    run,
    save_trace,
    strengthened,
    sweep,
)
from resilience_lab.netsim import trace_hash

SAMPLE = """\
# five validators with an explicit quorum
protocol = liveq
n = 5
f = 2
q = 2
seed = 4
phi = 3/4
"""


class TestParse:
    def test_sample(self):
        config = parse_config(SAMPLE)
        assert (config.protocol, config.n, config.f, config.q, config.seed) == ("liveq", 5, 2, 2, 4)
        assert config.phi == Fraction(3, 4)

    def test_text_round_trip(self):
        config = parse_config(SAMPLE)
        assert parse_config(config.to_text()) == config

    def test_attack_params_and_enums(self):
        config = parse_config("protocol=goldfish\nn=11\nattack=sleepy_da_attack\nbeta=1/2\n"
                              "validator_model=sleepy\n")
        assert config.attack_param("beta") == "1/2"
        assert config.validator_model is ValidatorModel.SLEEPY

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "scenario.cfg"
        path.write_text(SAMPLE)
        assert load_config(path) == parse_config(SAMPLE)

    @pytest.mark.parametrize("text,field", [
        ("protocol=internal\nn=4\nwobble=1\n", "wobble"),
        ("protocol=internal\nn=four\n", "n"),
        ("protocol=internal\n", "n"),
        ("protocol=livephi\nn=8\nphi=x\n", "phi"),
        ("protocol=internal\nn=4\njust words\n", "line 3"),
        ("protocol=ds\nn=4\nclient_interactivity=silent\n", "client_interactivity"),
        ("protocol=liveq\nn=5\n", "q"),
        ("protocol=goldfish\nn=8\nq=3\n", "q"),
        ("protocol=paxos\nn=3\n", "protocol"),
    ])
    def test_errors_name_the_field(self, text, field):
        with pytest.raises(ConfigError) as exc:
            parse_config(text)
        assert exc.value.field == field

    def test_f_beyond_n(self):
        with pytest.raises(ConfigError):
            ScenarioConfig("internal", 4, f=5).validate()

    def test_random_sleep_needs_sleepy_validators(self):
        with pytest.raises(ConfigError):
            ScenarioConfig("internal", 4, sleep="random").validate()


def test_parse_range():
    assert list(parse_range("0..3")) == [0, 1, 2, 3]
    assert list(parse_range("2")) == [2]
    with pytest.raises(ConfigError):
        parse_range("a..b")


class TestSweep:
    def test_cells(self):
        result = sweep(ScenarioConfig("internal", 4, horizon=40), range(0, 3), 3)
        assert [c.f_or_beta for c in result.cells] == ["0", "1", "2"]
        for cell in result.cells:
            assert cell.seeds == 3 and 0 <= cell.safe_count <= 3 and 0 <= cell.live_count <= 3
        assert result.cell(0).safe_count == 3 and result.cell(0).live_count == 3

    def test_csv_round_trip(self):
        result = sweep(ScenarioConfig("internal", 4, horizon=40), range(0, 2), 2)
        assert SweepResult.from_csv(result.to_csv()) == result

    def test_bad_header(self):
        with pytest.raises(ValueError):
            SweepResult.from_csv("a,b\n1,2\n")

    def test_empty_range(self):
        with pytest.raises(ConfigError):
            sweep(ScenarioConfig("internal", 4), [], 1)

    def test_progress_callback(self):
        seen = []
        sweep(ScenarioConfig("internal", 4, horizon=20), [1], 2, progress=lambda c, v: seen.append(c.seed))
        assert seen == [0, 1]


@pytest.mark.parametrize("suffix", [".trace", ".trace.gz"])
def test_trace_file_round_trip(tmp_path, suffix):
    trace, verdict = run(ScenarioConfig("livestar", 6, f=2, seed=1))
    path = tmp_path / f"run{suffix}"
    save_trace(trace, path)
    back = read_trace(path)
    assert trace_hash(back) == trace_hash(trace)
    assert back.client_logs == trace.client_logs and back.receipts == trace.receipts


def test_trace_reader_rejects_other_files(tmp_path):
    path = tmp_path / "x.trace"
    path.write_text("hello\n")
    with pytest.raises(ValueError):
        read_trace(path)


class TestHierarchy:
    def test_silent_clients_gain_nothing_from_talking(self):
        config = ScenarioConfig("liveq", 5, f=1, q=2, seed=2)
        assert strengthened(config).model.client_interactivity is ClientInteractivity.COMMUNICATING
        assert hierarchy_check(config)

    def test_sleepy_validators_kept_awake(self):
        config = ScenarioConfig("ds", 4, f=1, validator_model=ValidatorModel.SLEEPY)
        assert strengthened(config).model.validator_model is ValidatorModel.ALWAYS_ON
        assert hierarchy_check(config)

    def test_mismatched_n(self):
        with pytest.raises(ConfigError):
            hierarchy_check(ScenarioConfig("liveq", 5, q=2), ScenarioConfig("liveq", 6, q=2))


class TestRuns:
    def test_frozen_clients_safe_under_full_corruption(self):
        _, verdict = run(ScenarioConfig("frz", 6, f=6, q=4, seed=7))
        assert verdict.safe

    def test_signature_chains_with_one_honest_validator(self):
        _, verdict = run(ScenarioConfig("ds", 4, f=3, seed=1))
        assert verdict.safe and verdict.live

    def test_seed_changes_the_trace(self):
        a, _ = run(ScenarioConfig("internal", 6, f=2, seed=0))
        b, _ = run(ScenarioConfig("internal", 6, f=2, seed=1))
        assert trace_hash(a) != trace_hash(b)
