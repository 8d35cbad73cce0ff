import csv
import io
import re
import subprocess
import sys

import pytest
from conftest import CONFIG_2WFC_1S

from worksworld.benchgen import gen_complex
from worksworld.cli import main
from worksworld.report import METRICS_HEADER, STATS_HEADER, render_dot

UNREACHABLE = CONFIG_2WFC_1S.read_text().replace(
    "  - {id: pct1,", "  - {id: dct2, class: data, msg_size: 1 MB}\n  - {id: pct1,").replace(
    "format: dct1}", "format: dct2}")


def run(capsys, *argv) -> tuple[int, str, str]:
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestPlan:
    def test_minimal_chain_exits_zero_with_six_steps(self, capsys, tmp_path):
        code, out, _ = run(capsys, "plan", CONFIG_2WFC_1S, "--out", tmp_path)
        assert code == 0 and "2wfc-1s: solved" in out
        steps = [l for l in (tmp_path / "2wfc-1s.plan").read_text().splitlines() if l.startswith("(")]
        assert len(steps) == 6
        assert "valid: true" in (tmp_path / "2wfc-1s.report.txt").read_text()

    def test_unreachable_format_exits_three_with_witness(self, capsys, tmp_path):
        cfg = tmp_path / "bad.yaml"
        cfg.write_text(UNREACHABLE)
        code, out, _ = run(capsys, "plan", cfg, "--out", tmp_path / "o")
        assert code == 3
        assert "unreachable:" in out and "dct2" in out
        report = (tmp_path / "o" / "2wfc-1s.report.txt").read_text()
        assert "status: unsolvable" in report and "witness:" in report
        assert not (tmp_path / "o" / "2wfc-1s.plan").exists()

    def test_budget_exhaustion_exits_four(self, capsys, tmp_path):
        code, out, _ = run(capsys, "plan", CONFIG_2WFC_1S, "--out", tmp_path, "--max-expansions", 1,
                           "--heuristic", "blind", "--strategy", "weighted-astar(1)")
        assert code == 4 and "budget-exhausted" in out

    def test_emit_pddl_writes_exactly_two_files(self, capsys, tmp_path):
        code, _, _ = run(capsys, "plan", CONFIG_2WFC_1S, "--out", tmp_path, "--emit-pddl")
        assert code == 0
        assert sorted(p.name for p in tmp_path.iterdir()) == ["2wfc-1s.problem.pddl", "domain.pddl"]

    def test_pddl_input(self, capsys, tmp_path):
        run(capsys, "emit-pddl", CONFIG_2WFC_1S, "--out", tmp_path)
        code, out, _ = run(capsys, "plan", tmp_path / "2wfc-1s.problem.pddl", "--domain", tmp_path / "domain.pddl",
                           "--out", tmp_path / "o")
        assert code == 0 and "solved" in out

    def test_artifacts_are_byte_deterministic(self, capsys, tmp_path):
        for d in ("a", "b"):
            assert run(capsys, "plan", CONFIG_2WFC_1S, "--out", tmp_path / d, "--dot", "--no-timings")[0] == 0
        names = sorted(p.name for p in (tmp_path / "a").iterdir())
        assert names == ["2wfc-1s.initial.dot", "2wfc-1s.plan", "2wfc-1s.report.txt", "2wfc-1s.result.dot",
                         "metrics.csv"]
        for n in names:
            assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes(), n

    def test_metrics_csv(self, capsys, tmp_path):
        run(capsys, "plan", CONFIG_2WFC_1S, "--out", tmp_path, "--no-timings")
        rows = list(csv.reader(io.StringIO((tmp_path / "metrics.csv").read_text())))
        assert tuple(rows[0]) == METRICS_HEADER
        assert rows[0] == ["problem", "F", "X", "A", "F'", "X'", "A'", "ground_ms", "prune_ms", "search_ms",
                           "expansions", "plan_len", "cost", "latency", "status"]
        row = dict(zip(rows[0], rows[1]))
        assert (row["F"], row["X"], row["A"]) == ("22", "7", "14")
        assert (row["F'"], row["X'"], row["A'"]) == ("9", "6", "6")
        assert row["plan_len"] == "6" and row["status"] == "solved"
        assert row["cost"] == "0.092266" and row["latency"] == "0.401"


class TestUsage:
    def test_unknown_flag_exits_one(self, capsys):
        with pytest.raises(SystemExit) as e:
            main(["plan", str(CONFIG_2WFC_1S), "--bogus"])
        assert e.value.code == 1

    def test_missing_file_exits_one(self, capsys, tmp_path):
        code, _, err = run(capsys, "plan", tmp_path / "nope.yaml")
        assert code == 1 and err

    def test_invalid_config_exits_one_with_location(self, capsys, tmp_path):
        cfg = tmp_path / "dup.yaml"
        cfg.write_text("schema: 1\nsites:\n  - id: a\n  - id: a\n")
        code, _, err = run(capsys, "plan", cfg, "--out", tmp_path)
        assert code == 1 and re.search(r"dup\.yaml:4:\d+: duplicate id 'a'", err)

    def test_module_entry_point(self, tmp_path):
        out = subprocess.run([sys.executable, "-m", "worksworld", "plan", str(CONFIG_2WFC_1S), "--out",
                              str(tmp_path)], capture_output=True, text=True)
        assert out.returncode == 0, out.stderr


class TestValidate:
    @pytest.fixture
    def solved(self, capsys, tmp_path):
        run(capsys, "plan", CONFIG_2WFC_1S, "--out", tmp_path)
        return tmp_path / "2wfc-1s.plan"

    def test_valid_plan(self, capsys, solved):
        code, out, _ = run(capsys, "validate", CONFIG_2WFC_1S, solved)
        assert code == 0 and "valid: true" in out

    def test_broken_plan_exits_two(self, capsys, solved, tmp_path):
        lines = solved.read_text().splitlines()
        bad = tmp_path / "bad.plan"
        bad.write_text("\n".join(l for l in lines if "propagate_input" not in l) + "\n")
        code, out, _ = run(capsys, "validate", CONFIG_2WFC_1S, bad)
        assert code == 2 and "valid: false" in out

    def test_malformed_plan_exits_two(self, capsys, tmp_path):
        bad = tmp_path / "bad.plan"
        bad.write_text("(fly away)\n")
        code, _, err = run(capsys, "validate", CONFIG_2WFC_1S, bad)
        assert code == 2 and "bad.plan:1:" in err

    def test_missing_plan_file_exits_one(self, capsys, tmp_path):
        assert run(capsys, "validate", CONFIG_2WFC_1S, tmp_path / "none.plan")[0] == 1


class TestGenStatsViz:
    def test_gen_round_trips_through_stats(self, capsys, tmp_path):
        target = tmp_path / "t.yaml"
        assert run(capsys, "gen", "--family", "calibration", "--param", "wfc=2", "--param", "sites=1",
                   "--out", target)[0] == 0
        code, out, _ = run(capsys, "stats", target, CONFIG_2WFC_1S)
        lines = out.splitlines()
        assert code == 0 and lines[0] == ",".join(STATS_HEADER)
        assert [l.split(",", 1)[1] for l in lines[1:]] == ["22,7,14,9,6,6"] * 2

    def test_gen_complex_and_vary(self, capsys, tmp_path):
        assert run(capsys, "gen", "--family", "complex", "--param", "length=4", "--out", tmp_path / "c.yaml")[0] == 0
        assert run(capsys, "gen", "--family", "vary", "--param", "kind=sites", "--param", "n=3",
                   "--out", tmp_path / "v.yaml")[0] == 0
        assert run(capsys, "plan", tmp_path / "c.yaml", "--out", tmp_path / "o")[0] == 0

    def test_gen_bad_param_exits_one(self, capsys):
        assert run(capsys, "gen", "--family", "complex", "--param", "length")[0] == 1
        assert run(capsys, "gen", "--family", "complex")[0] == 1

    def test_viz_counts_for_single_site(self, capsys):
        code, out, _ = run(capsys, "viz", CONFIG_2WFC_1S)
        assert code == 0
        assert out.count("subgraph \"cluster_") == 1
        assert len(re.findall(r'id="if:', out)) == 2
        assert len(re.findall(r'id="link:', out)) == 1

    def test_viz_with_plan_shows_placements_and_flows(self, capsys, tmp_path):
        run(capsys, "plan", CONFIG_2WFC_1S, "--out", tmp_path)
        code, out, _ = run(capsys, "viz", CONFIG_2WFC_1S, "--plan", tmp_path / "2wfc-1s.plan")
        assert code == 0
        assert len(re.findall(r'id="wc:', out)) == 3
        assert re.findall(r'id="flow:([^"]+)"', out) == ["wc0:wc1", "wc1:wc2"]
        assert "data of wc0" in out

    def test_complex_two_view(self):
        inst = gen_complex(2, seed=1)
        dot = render_dot(inst)
        assert dot.count('subgraph "cluster_') == len(inst.graph.sites) == 8
        assert len(re.findall(r'id="link:', dot)) == len(inst.graph.links) == 29
