"""End-to-end tests of the command-line interface via subprocess."""

import json
import subprocess
import sys

GUARANTEE_HS = ["guarantee", "--base", "gaussian", "--sigma", "4",
                "--family", "negbin", "--eta", "1", "--m", "300",
                "--method", "hs", "--delta", "1e-6"]


def run_cli(*argv, cwd=None):
    return subprocess.run([sys.executable, "-m", "privsel.cli", *argv],
                          capture_output=True, text=True, cwd=cwd)


def test_guarantee_hs_line():
    r = run_cli(*GUARANTEE_HS)
    assert r.returncode == 0
    assert r.stdout == ("eps=2.79379844666 delta=1e-06 "
                        "method=hs eps1=0.646736173553\n")


def test_guarantee_json():
    r = run_cli(*GUARANTEE_HS, "--format", "json")
    assert r.returncode == 0
    got = json.loads(r.stdout)
    assert got == {"eps": 2.7937984466552734, "delta": 1e-06,
                   "method": "hs", "eps1": 0.6467361735528931}


def test_guarantee_closed_pure():
    r = run_cli("guarantee", "--base", "pure", "--eps-base", "1",
                "--family", "negbin", "--eta", "1",
                "--method", "closed", "--delta", "1e-6")
    assert r.returncode == 0
    assert r.stdout == "eps=3 delta=1e-06 method=closed eps1=nan\n"


def test_guarantee_eps_query_reports_delta():
    r = run_cli("guarantee", "--base", "gaussian", "--sigma", "4",
                "--family", "rnm", "--m", "1", "--method", "hs", "--eps", "0")
    assert r.returncode == 0
    assert r.stdout == "eps=0 delta=0.197412651366 method=hs eps1=nan\n"


def test_guarantee_config_file(tmp_path):
    cfg = tmp_path / "scenario.json"
    cfg.write_text(json.dumps({
        "base": {"kind": "gaussian", "sigma": 4},
        "family": {"kind": "negbin", "eta": 1, "m": 300},
        "method": "hs",
    }))
    r = run_cli("guarantee", "--config", str(cfg), "--delta", "1e-6")
    assert r.returncode == 0
    assert r.stdout.startswith("eps=2.79379844666 ")


def test_profile_total_variation_row():
    r = run_cli("profile", "--base", "gaussian", "--sigma", "4",
                "--eps-grid", "0:0:1")
    assert r.returncode == 0
    assert r.stdout == "eps,delta\n0,0.0994764496602\n"


def test_missing_target_is_config_error():
    r = run_cli("guarantee", "--base", "gaussian", "--sigma", "4",
                "--family", "negbin", "--eta", "1", "--m", "300")
    assert r.returncode == 2
    assert "target" in r.stderr


def test_both_targets_is_config_error():
    r = run_cli(*GUARANTEE_HS, "--eps", "1")
    assert r.returncode == 2


def test_delta_zero_on_divergence_path_is_config_error():
    r = run_cli("guarantee", "--base", "gaussian", "--sigma", "4",
                "--family", "negbin", "--eta", "1", "--m", "300",
                "--method", "hs", "--delta", "0")
    assert r.returncode == 2


def test_unknown_preset_is_config_error():
    r = run_cli("compare", "fig99")
    assert r.returncode == 2
    assert "fig99" in r.stderr


def test_empty_candidate_list_is_config_error(tmp_path):
    cfg = tmp_path / "adjust.json"
    cfg.write_text(json.dumps({"sigmas": []}))
    r = run_cli("adjust", "--config", str(cfg))
    assert r.returncode == 2


def test_unreachable_target_exit_code():
    r = run_cli("guarantee", "--base", "subsampled_gaussian", "--q", "0.2",
                "--sigma", "2", "--steps", "4", "--family", "poisson",
                "--m", "10", "--method", "hs", "--delta", "1e-30")
    assert r.returncode == 3
    assert "1e-30" in r.stderr


def test_memory_budget_exit_code():
    r = run_cli("profile", "--base", "subsampled_gaussian", "--q", "0.2",
                "--sigma", "2", "--grid-spacing", "1e-12")
    assert r.returncode == 4
    assert "budget" in r.stderr


def test_compare_output_is_byte_identical(tmp_path):
    a = run_cli("compare", "fig1", "--out", "a.csv", cwd=tmp_path)
    b = run_cli("compare", "fig1", "--out", "b.csv", cwd=tmp_path)
    assert a.returncode == 0 and b.returncode == 0
    ba = (tmp_path / "a.csv").read_bytes()
    assert ba == (tmp_path / "b.csv").read_bytes()
    assert ba.startswith(b"m,")


def test_fig4_writes_curve_and_count_cdf_tables(tmp_path):
    r = run_cli("compare", "fig4", "--out", "fig4.csv", cwd=tmp_path)
    assert r.returncode == 0
    curves = (tmp_path / "fig4.csv").read_text().splitlines()
    cdf = (tmp_path / "fig4_kcdf.csv").read_text().splitlines()
    assert curves[0] == "eps,delta_n15,delta_n20,delta_n50,delta_n1000,delta_poisson"
    assert cdf[0] == "k,cdf_n15,cdf_n20,cdf_n50,cdf_n1000,cdf_poisson"
    assert len(curves) > 2 and len(cdf) > 2


def test_adjust_row_per_candidate():
    r = run_cli("adjust", "--sigmas", "2,3")
    assert r.returncode == 0
    lines = r.stdout.splitlines()
    assert lines[0] == "sigma,max_steps,eps_final,delta_final,eps_direct,gap_rel"
    assert len(lines) == 3
    assert lines[1].startswith("2,") and lines[2].startswith("3,")


def test_oracle_suite_passes():
    r = run_cli("oracle")
    assert r.returncode == 0
    assert r.stdout.strip().endswith("7/7 oracle checks passed")
