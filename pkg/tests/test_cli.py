import csv
import io
import json

import pytest

from rbt import cli


def run_cli(args, capsys):
    code = cli.main(args)
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    return list(csv.reader(io.StringIO(text)))


# ----------------------------------------------------------------------
# sort

def test_sort_random_keys_succeeds(capsys):
    code, out, err = run_cli(
        ["sort", "--n", "1000", "--block", "8", "--fanout", "8", "--seed", "1"],
        capsys)
    assert code == 0
    rows = csv_rows(out)
    assert rows[0] == cli.CSV_HEADER.split(",")
    assert rows[1][0] == "sort"


def test_sort_file_input_preserves_duplicates(tmp_path, capsys):
    keys = tmp_path / "keys.txt"
    keys.write_text("5\n5\n1\n")
    code, out, err = run_cli(
        ["sort", "--trace", str(keys), "--block", "4", "--fanout", "4"],
        capsys)
    assert code == 0
    rows = csv_rows(out)
    assert rows[1][1] == "3"  # n_elements from the file


def test_sort_same_seed_is_bit_identical(capsys):
    args = ["sort", "--n", "500", "--block", "8", "--fanout", "8", "--seed", "7"]
    _, out1, _ = run_cli(args, capsys)
    _, out2, _ = run_cli(args, capsys)
    rows1, rows2 = csv_rows(out1)[1], csv_rows(out2)[1]
    # wall_ms (index 10) may differ; everything else must match exactly
    assert rows1[:10] == rows2[:10]
    assert rows1[11] == rows2[11]


def test_sort_missing_input_file_is_usage_error(tmp_path, capsys):
    code, out, err = run_cli(
        ["sort", "--trace", str(tmp_path / "nope.txt")], capsys)
    assert code == 2


# ----------------------------------------------------------------------
# trace

def test_trace_found(tmp_path, capsys):
    tr = tmp_path / "t.txt"
    tr.write_text("i 5\nq 5\nf\n")
    code, out, err = run_cli(
        ["trace", "--trace", str(tr), "--block", "4", "--fanout", "4"], capsys)
    assert code == 0
    assert "i=1 d=0 q=1" in out


def test_trace_delete_not_found(tmp_path, capsys):
    tr = tmp_path / "t.txt"
    tr.write_text("d 9\nf\n")
    code, out, err = run_cli(
        ["trace", "--trace", str(tr), "--block", "4", "--fanout", "4"], capsys)
    assert code == 0


def test_trace_parse_error_reports_line(tmp_path, capsys):
    tr = tmp_path / "t.txt"
    tr.write_text("i 5\nx 9\n")
    code, out, err = run_cli(["trace", "--trace", str(tr)], capsys)
    assert code == 2
    assert "line 2" in err


def test_trace_bad_key_reports_line(tmp_path, capsys):
    tr = tmp_path / "t.txt"
    tr.write_text("i abc\n")
    code, out, err = run_cli(["trace", "--trace", str(tr)], capsys)
    assert code == 2
    assert "line 1" in err


def test_trace_key_range_checked(tmp_path, capsys):
    tr = tmp_path / "t.txt"
    tr.write_text(f"i {2**63}\n")
    code, out, err = run_cli(["trace", "--trace", str(tr)], capsys)
    assert code == 2


def test_trace_random_mix_matches_oracle(tmp_path, capsys):
    import random
    rng = random.Random(5)
    lines = []
    for _ in range(2000):
        r = rng.random()
        key = rng.randrange(0, 128)
        if r < 0.5:
            lines.append(f"i {key} v{key}")
        elif r < 0.65:
            lines.append(f"d {key}")
        elif r < 0.85:
            lines.append(f"q {key}")
        elif r < 0.95:
            lines.append("m")
        else:
            lines.append("f")
    tr = tmp_path / "t.txt"
    tr.write_text("\n".join(lines) + "\n")
    for seed in ("1", "2"):
        code, out, err = run_cli(
            ["trace", "--trace", str(tr), "--block", "4", "--fanout", "4",
             "--seed", seed], capsys)
        assert code == 0, err


# ----------------------------------------------------------------------
# bench

def test_bench_default_row_count(tmp_path, capsys):
    out_file = tmp_path / "bench.csv"
    code, out, err = run_cli(
        ["bench", "--out", str(out_file)], capsys)
    assert code == 0
    rows = csv_rows(out_file.read_text())
    # header + 3 sizes x 5 seeds + 3 summary rows
    assert len(rows) == 1 + 15 + 3
    assert sum(1 for r in rows if r[0].endswith("_summary")) == 3


def test_bench_mode_field_populated(tmp_path, capsys):
    out_file = tmp_path / "bench.csv"
    code, out, err = run_cli(
        ["bench", "--n", "256", "--seeds", "1", "--block", "8", "--fanout", "4",
         "--mode", "rerandomize", "--out", str(out_file)], capsys)
    assert code == 0
    rows = csv_rows(out_file.read_text())
    assert rows[1][5] == "rerandomize"


def test_bench_json_format(tmp_path, capsys):
    out_file = tmp_path / "bench.json"
    code, out, err = run_cli(
        ["bench", "--n", "256,512", "--seeds", "1,2", "--block", "8",
         "--fanout", "4", "--format", "json", "--out", str(out_file)], capsys)
    assert code == 0
    doc = json.loads(out_file.read_text())
    assert len(doc["records"]) == 4 + 2
    assert len(doc["summaries"]) == 2
    assert {"mean_ratio", "min_ratio", "max_ratio"} <= set(doc["summaries"][0])


def test_bench_ratio_null_when_tree_smaller_than_fanout(tmp_path, capsys):
    out_file = tmp_path / "b.csv"
    code, out, err = run_cli(
        ["bench", "--n", "16", "--seeds", "1", "--block", "8", "--fanout", "8",
         "--out", str(out_file)], capsys)
    assert code == 0
    rows = csv_rows(out_file.read_text())
    assert rows[1][11] == ""  # n = 2 < f = 8


# ----------------------------------------------------------------------
# check

def test_check_clean_tree(capsys):
    code, out, err = run_cli(
        ["check", "--n", "2000", "--block", "8", "--fanout", "8"], capsys)
    assert code == 0
    assert "0 violations" in out


def test_check_with_trace(tmp_path, capsys):
    tr = tmp_path / "t.txt"
    tr.write_text("i 1\ni 2\ni 3\nq 2\nf\n")
    code, out, err = run_cli(
        ["check", "--trace", str(tr), "--block", "4", "--fanout", "4"], capsys)
    assert code == 0


def test_check_injected_heap_fault(capsys):
    code, out, err = run_cli(
        ["check", "--n", "2000", "--block", "8", "--fanout", "8",
         "--inject", "heap"], capsys)
    assert code == 1
    assert "kind=heap" in out


def test_check_injected_key_fault(capsys):
    code, out, err = run_cli(
        ["check", "--n", "2000", "--block", "8", "--fanout", "8",
         "--inject", "keys"], capsys)
    assert code == 1
    assert "kind=key-order" in out
    assert "node=" in out


# ----------------------------------------------------------------------
# parameter handling

def test_invalid_fanout_is_usage_error(capsys):
    code, out, err = run_cli(["sort", "--n", "10", "--fanout", "2"], capsys)
    assert code == 2


def test_rbt_seed_env_default(monkeypatch):
    monkeypatch.setenv("RBT_SEED", "321")
    parser = cli.build_parser()
    args = parser.parse_args(["sort"])
    assert args.seed == 321


def test_unknown_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2
