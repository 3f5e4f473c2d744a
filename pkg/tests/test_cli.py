import csv
import io
from pathlib import Path

import pytest

from conftest import CONFIGS
from rsgsim import cli
from rsgsim.model import ConfigError, PolicyKind

GOLDEN = Path(__file__).parent / "golden"
SMALL = ["--horizon", "4000", "--warmup", "500", "--reps", "2"]


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


BASE = """
topology: {kind: single_hop, L: 4}
channel: {kind: constant, c: 1}
arrivals: {kind: bernoulli, rate: RATE}
policy: {kind: KIND, gamma: 2}
run: {horizon: 4000, warmup: 500, seed: 5, replications: 2}
"""


def cfg_text(rate=0.225, kind="rsg"):
    return BASE.replace("RATE", str(rate)).replace("KIND", kind)


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_configs_parse(path):
    cfg = cli.parse_config(path)
    assert cfg.L >= 1


def test_asymmetric_fading_config():
    cfg = cli.parse_config(CONFIGS / "single_hop_fading_asymmetric.yaml")
    assert [d.mean for d in cfg.channel.links] == pytest.approx([0.6, 0.5, 0.4, 0.3])
    assert list(cfg.arrivals.rates) == pytest.approx([0.4, 0.3, 0.15, 0.05])


def test_missing_policy_names_field(tmp_path):
    text = "\n".join(l for l in cfg_text().splitlines() if not l.startswith("policy"))
    with pytest.raises(ConfigError, match="policy"):
        cli.parse_config(write(tmp_path, text))


def test_yaml_error_reports_line(tmp_path):
    with pytest.raises(ConfigError, match="line 3"):
        cli.parse_config(write(tmp_path, "topology: {kind: single_hop, L: 2}\nchannel: {kind: constant, c: 1}\narrivals: kind: x\npolicy: {kind: mws}\n"))


def test_unknown_kind_and_run_field(tmp_path):
    with pytest.raises(ConfigError, match="arrivals.kind"):
        cli.parse_config(write(tmp_path, cfg_text().replace("bernoulli", "poisson")))
    with pytest.raises(ConfigError, match="run"):
        cli.parse_config(write(tmp_path, cfg_text().replace("seed: 5", "sed: 5")))


def test_per_link_lists_and_links_tables(tmp_path):
    text = """
topology: {kind: conflict_graph, L: 3, edges: [[0, 1], [1, 2]]}
channel: {kind: on_off, c: 2, q: [0.5, 0.6, 0.7]}
arrivals:
  links:
    - {kind: bernoulli, rate: 0.2}
    - {kind: discrete, values: [0, 3], probs: [0.9, 0.1]}
    - {kind: bursty, K: 4}
policy: {kind: rsg_variant, beta: [1, 0, 1], gamma: 3, tie_rule: seeded_uniform}
"""
    cfg = cli.parse_config(write(tmp_path, text))
    assert cfg.policy.kind is PolicyKind.RSG_VARIANT
    assert list(cfg.arrivals.rates) == pytest.approx([0.2, 0.3, 2.0])
    assert cfg.schedules.schedules == ((1, 0, 1), (0, 1, 0))


def test_parse_gammas():
    assert len(cli.parse_gammas("pow2:-7..7")) == 15
    assert cli.parse_gammas("pow2:-1..1") == [0.5, 1.0, 2.0]
    assert cli.parse_gammas("0, 1.5") == [0.0, 1.5]
    assert cli.parse_gammas("") == []
    with pytest.raises(ConfigError):
        cli.parse_gammas("a,b")


def test_run_golden(tmp_path):
    out = tmp_path / "run.csv"
    assert cli.main(["run", str(CONFIGS / "single_hop_symmetric.yaml"), "-o", str(out), *SMALL]) == 0
    assert out.read_text() == (GOLDEN / "run_single_hop_symmetric.csv").read_text()
    rows = read_csv(out)
    assert rows[0] == cli.RUN_COLUMNS
    assert [r[0] for r in rows[1:]] == ["0", "1", "2", "3", "all"]


def test_run_single_link_norm_is_one(tmp_path):
    text = """
topology: {kind: single_hop, L: 1}
channel: {kind: constant, c: 2}
arrivals: {kind: constant, a: 1}
policy: {kind: mws}
run: {horizon: 2000, warmup: 100, replications: 1}
"""
    out = tmp_path / "o.csv"
    assert cli.main(["run", str(write(tmp_path, text)), "-o", str(out)]) == 0
    rows = read_csv(out)
    assert rows[1][rows[0].index("norm_i2")] == "1.0"


def test_run_round_robin_sum(tmp_path):
    out = tmp_path / "rr.csv"
    assert cli.main(["run", str(CONFIGS / "round_robin.yaml"), "-o", str(out), *SMALL]) == 0
    rows = {r[0]: r for r in read_csv(out)}
    assert float(rows["all"][cli.RUN_COLUMNS.index("mean_t")]) == 6.0


def test_missing_output_dir_is_io_error(tmp_path):
    assert cli.main(["run", str(CONFIGS / "single_hop_symmetric.yaml"), "-o", str(tmp_path / "nope" / "x.csv")]) == 1


def test_missing_config_is_io_error(tmp_path):
    assert cli.main(["bounds", str(tmp_path / "absent.yaml")]) == 1


def test_invalid_config_exit_code(tmp_path):
    assert cli.main(["run", str(write(tmp_path, cfg_text(kind="nonsense"))), "-o", str(tmp_path / "x.csv")]) == 2


def test_sweep_empty_gamma_list(tmp_path):
    assert cli.main(["sweep", str(write(tmp_path, cfg_text())), "--gammas", "", "-o", str(tmp_path / "s.csv")]) == 2


def test_sweep_single_gamma_matches_run_and_bounds(tmp_path):
    cfg = write(tmp_path, cfg_text(kind="mws"))
    sweep_out, run_out = tmp_path / "s.csv", tmp_path / "r.csv"
    assert cli.main(["sweep", str(cfg), "--gammas", "0", "-o", str(sweep_out)]) == 0
    assert cli.main(["run", str(cfg), "-o", str(run_out)]) == 0
    sweep = dict(zip(*read_csv(sweep_out)))
    run = {r[0]: dict(zip(read_csv(run_out)[0], r)) for r in read_csv(run_out)[1:]}
    assert sweep["gamma"] == "0.0"
    assert sweep["total_mean_q"] == run["all"]["mean_q"]
    assert sweep["regularity_metric"] == run["all"]["regularity_metric"]
    buf = io.StringIO()
    cli.cmd_bounds(cfg, out=buf)
    printed = dict(line.split(": ") for line in buf.getvalue().splitlines())
    assert sweep["lower_bound"] == printed["regularity_lower_bound"]
    # gamma = 0 leaves the upper bound undefined
    assert sweep["upper_bound_conservative"] == ""


def test_sweep_columns(tmp_path):
    out = tmp_path / "s.csv"
    assert cli.main(["sweep", str(write(tmp_path, cfg_text())), "--gammas", "pow2:-1..1", "-o", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == cli.SWEEP_COLUMNS and len(rows) == 4


def test_compare(tmp_path):
    a, b = CONFIGS / "two_link_mws.yaml", CONFIGS / "two_link_rsg.yaml"
    out = tmp_path / "c.csv"
    assert cli.main(["compare", str(a), str(b), "-o", str(out), *SMALL]) == 0
    rows = read_csv(out)
    assert rows[0] == cli.COMPARE_COLUMNS
    assert [r[0] for r in rows[1:]] == ["0", "1", "total"]


def test_compare_different_rates(tmp_path):
    a = write(tmp_path, cfg_text(kind="mws"), "a.yaml")
    b = write(tmp_path, cfg_text(rate=0.2), "b.yaml")
    assert cli.main(["compare", str(a), str(b), "-o", str(tmp_path / "c.csv")]) == 2


def bounds_lines(path):
    buf = io.StringIO()
    code = cli.cmd_bounds(path, out=buf)
    return code, dict(line.split(": ") for line in buf.getvalue().splitlines())


def test_bounds_symmetric(tmp_path):
    code, out = bounds_lines(write(tmp_path, cfg_text()))
    assert code == 0
    assert float(out["additive_eps"]) == pytest.approx(0.025, abs=1e-9)
    assert float(out["regularity_lower_bound"]) == pytest.approx(1.35)
    assert float(out["symmetric_threshold"]) == pytest.approx(0.25, abs=1e-9)


def test_bounds_fading_threshold():
    code, out = bounds_lines(CONFIGS / "single_hop_fading_symmetric.yaml")
    assert code == 0
    assert float(out["symmetric_threshold"]) == pytest.approx(0.2496, abs=1e-9)


def test_bounds_outside_region(tmp_path):
    code, out = bounds_lines(write(tmp_path, cfg_text(rate=0.3)))
    assert code == 3
    assert float(out["additive_eps"]) < 0
    assert cli.main(["bounds", str(write(tmp_path, cfg_text(rate=0.3)))]) == 3
