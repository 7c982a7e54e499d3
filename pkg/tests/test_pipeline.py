import csv
import io
import json
import math

import pytest

from hankel_mineig import cli
from hankel_mineig.ldlt import PrecisionExhausted
from hankel_mineig.pipeline import (
    CSV_FIELDS,
    NotConverged,
    RunRecord,
    SchemaError,
    auto_precision,
    compute,
    initial_bits,
    read_points,
    report,
    scan,
    write_csv,
)
from hankel_mineig.published import ROWS


def test_compute_one_by_one():
    rec = compute(1, 0.5, 256, 1, 1)
    assert rec.lambdas == (2.0,) and rec.trunc == (0.0,)


def test_compute_two_by_two():
    rec = compute(2, 0.5, 256, 2, 1)
    closed = (242 - math.sqrt(242**2 - 4 * 336)) / 2
    assert rec.lambda1 == pytest.approx(closed, rel=1e-14)
    assert rec.lambda1 == pytest.approx(1.39649, abs=1e-5)


def test_timing_accounting():
    rec = compute(60, 0.5, 512, 8, 2)
    parts = [rec.ldlt_s, rec.transpose_s, rec.invL_s, rec.invH_s, rec.eigen_s]
    assert all(p >= 0 for p in parts)
    assert rec.wall_s >= sum(parts)
    assert rec.invL_s >= rec.invL_arith_s


def test_determinism_across_runs_and_workers():
    a = compute(40, 0.5, 256, 6, 1)
    assert compute(40, 0.5, 256, 6, 1).numeric_key() == a.numeric_key()
    for w in (2, 3, 5):
        assert compute(40, 0.5, 256, 6, w).numeric_key() == a.numeric_key()


def test_precision_exhausted_propagates():
    with pytest.raises(PrecisionExhausted):
        compute(60, 0.5, 16, 8, 1)


def test_initial_bits():
    assert [initial_bits(n) for n in (1, 500, 501, 1000, 4500)] == [1024, 1024, 2048, 2048, 9216]


def fake_runner(settles_at, value=0.1):
    """lambda_1 is exact from ``settles_at`` bits on and off by 1e-12 below it."""
    calls = []

    def run(N, beta, bits, k, workers):
        calls.append(bits)
        lam = value if bits >= settles_at else value + 1e-12 * (settles_at - bits)
        return RunRecord(N, "1/2", bits, k, workers, (lam, 1.0, 2.0), (-1e-16, -1e-15, -1e-14))

    return run, calls


@pytest.mark.parametrize("settle,want", [(1024, 1024), (2048, 2048), (5000, 5120)])
def test_auto_precision_search(settle, want):
    run, calls = fake_runner(settle)
    bits, rec = auto_precision(500, runner=run)
    assert bits == want == rec.required_bits == rec.bits
    assert calls[0] == 1024 and calls[-1] == want + 1024
    # stable on repeat
    assert auto_precision(500, runner=fake_runner(settle)[0])[0] == want


def test_auto_precision_starts_from_size():
    run, calls = fake_runner(0)
    assert auto_precision(1200, runner=run)[0] == 3072
    assert calls == [3072, 4096]


def test_auto_precision_skips_exhausted():
    def run(N, beta, bits, k, workers):
        if bits < 3072:
            raise PrecisionExhausted(3, bits)
        return RunRecord(N, "1/2", bits, k, workers, (0.2,), (0.0,))

    assert auto_precision(10, runner=run)[0] == 3072


def test_auto_precision_cap():
    run, _ = fake_runner(10**9)
    with pytest.raises(NotConverged):
        auto_precision(500, runner=run, max_bits=4096)


def test_auto_precision_real_small():
    bits, rec = auto_precision(30)
    assert bits == 1024 and rec.lambda1 == compute(30, 0.5, 1024).lambda1


def test_csv_header_and_rows():
    buf = io.StringIO()
    recs = scan([2, 3], k=8, bits=256, out=buf)
    text = buf.getvalue()
    assert text.splitlines()[0] == ",".join(CSV_FIELDS)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [int(r["N"]) for r in rows] == [2, 3]
    assert float(rows[0]["lambda1"]) == recs[0].lambda1
    assert rows[0]["required_bits"] == "" and rows[0]["lambda3"] == ""


def test_empty_scan_writes_header_only():
    buf = io.StringIO()
    assert scan([], out=buf) == []
    assert buf.getvalue().strip() == ",".join(CSV_FIELDS)


def test_scan_small_N_decreasing():
    recs = scan(range(2, 9), k=8, bits=512)
    lam = [r.lambda1 for r in recs]
    assert all(b < a for a, b in zip(lam, lam[1:]))


def test_scan_records_failures_and_continues():
    recs = scan([60, 5], k=8, bits=16)
    assert recs[0].error and not recs[0].lambdas
    assert recs[1].error is None and recs[1].lambdas


def table_csv(path, rows=ROWS):
    recs = [RunRecord(r[0], "1/2", r[1], 8, 1, (r[2], r[4], r[6]), (r[3], r[5], r[7])) for r in rows]
    write_csv(recs, path)
    return path


def test_report_table(tmp_path):
    fit = report(table_csv(tmp_path / "t.csv"), tmp_path / "fit.json", tmp_path / "plot.txt")
    assert fit.gradient == pytest.approx(0.63646, abs=5e-4)
    js = json.loads((tmp_path / "fit.json").read_text())
    assert len(js["points"]) == 9 and js["gradient_ci"][0] <= 2 / math.pi <= js["gradient_ci"][1]
    lines = (tmp_path / "plot.txt").read_text().splitlines()
    assert len(lines) == 10
    x, y = map(float, lines[1].split())
    assert x == pytest.approx(math.log(4 * math.pi * 500 * math.e))
    assert y == pytest.approx(math.log(8 * math.pi / ROWS[0][2] * math.sqrt(math.log(500))))


def test_report_exact_line(tmp_path):
    pts = []
    for N in (10, 100, 1000, 10000):
        x = math.log(4 * math.pi * N * math.e)
        pts.append((N, 8 * math.pi * math.sqrt(math.log(N)) / math.exp(0.2 + 2 / math.pi * x)))
    p = tmp_path / "line.csv"
    p.write_text("N,lambda1\n" + "".join(f"{n},{lam!r}\n" for n, lam in pts))
    fit = report(p)
    assert fit.gradient == pytest.approx(2 / math.pi, abs=1e-12)
    assert max(map(abs, fit.residuals)) < 1e-12


def test_read_points_schema(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("N,lambda2\n500,1.1\n")
    with pytest.raises(SchemaError):
        read_points(p)
    p.write_text("N,lambda1\n500,oops\n")
    with pytest.raises(SchemaError):
        read_points(p)


def test_cli_compute_json(capsys):
    assert cli.main(["compute", "--n", "2", "--bits", "256", "--k", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["lambdas"][0] == pytest.approx((242 - math.sqrt(242**2 - 1344)) / 2, rel=1e-14) and out["bits"] == 256


def test_cli_compute_csv(capsys):
    assert cli.main(["compute", "--n", "3", "--bits", "256", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(CSV_FIELDS) and lines[1].startswith("3,1/2,256,3,")


def test_cli_compute_auto(capsys):
    assert cli.main(["compute", "--n", "4"]) == 0
    assert json.loads(capsys.readouterr().out)["required_bits"] == 1024


def test_cli_scan_and_fit(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    assert cli.main(["scan", "--n-list", "2..6", "--bits", "256", "--out", str(out)]) == 0
    assert len(read_points(out)) == 5
    assert cli.main(["fit", "--input", str(table_csv(tmp_path / "t.csv"))]) == 0
    assert json.loads(capsys.readouterr().out)["gradient"] == pytest.approx(0.63646, abs=5e-4)


def test_cli_exit_codes(tmp_path, monkeypatch, capsys):
    assert cli.main(["compute", "--n", "60", "--bits", "16"]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("N,foo\n1,2\n")
    assert cli.main(["fit", "--input", str(bad)]) == 3
    assert cli.main(["fit", "--input", str(tmp_path / "missing.csv")]) == 3
    assert cli.main(["compute", "--n", "4", "--beta-num", "3", "--beta-den", "4"]) == 3
    monkeypatch.setenv(cli.WORKERS_ENV, "3")
    assert cli.build_parser().parse_args(["compute", "--n", "4"]).workers == 3
