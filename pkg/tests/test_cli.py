import json
import math

import numpy as np
import pytest

from thermoform.cli import EXIT_DOMAIN, EXIT_ERROR, EXIT_NOT_CLOSED, EXIT_OK, main


def write(path, text):
    path.write_text(text)
    return str(path)


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def read_csv(path):
    lines = path.read_text().split("\n")
    header = lines[0].split(",")
    rows = [[float(v) for v in line.split(",")] for line in lines[1:] if line]
    return header, np.array(rows)


class TestCheckClosed:
    def test_potential_form_closed(self, tmp_path, capsys):
        config = write(tmp_path / "c.yaml", """
coords: [x, y]
potential: "x^2*y + y^3"
box: {x: [0.5, 1.5], y: [0.5, 1.5]}
count: 16
""")
        code, doc = run_json(capsys, ["check-closed", "--config", config])
        assert code == EXIT_OK
        assert doc["closed"] is True
        assert doc["max_residual"] <= 1e-8

    def test_rotation_form_not_closed(self, tmp_path, capsys):
        config = write(tmp_path / "c.yaml", """
coords: [x, y]
coefficients: {x: "y", y: "-x"}
box: {x: [0.0, 1.0], y: [0.0, 1.0]}
count: 8
""")
        code, doc = run_json(capsys, ["check-closed", "--config", config])
        assert code == EXIT_NOT_CLOSED
        assert doc["closed"] is False
        assert doc["max_residual"] == pytest.approx(2.0)
        assert set(doc["worst_pair"]) == {"x", "y"}

    def test_unknown_key_is_config_error(self, tmp_path, capsys):
        config = write(tmp_path / "c.yaml", """
coords: [x, y]
potential: "x*y"
box: {x: [0.0, 1.0], y: [0.0, 1.0]}
bogus: 1
""")
        assert main(["check-closed", "--config", config]) == EXIT_ERROR

    def test_missing_config_file(self):
        assert main(["check-closed", "--config", "/nonexistent.yaml"]) == EXIT_ERROR


class TestSimulate:
    THERMO = """
model: thermoelastic
potential: "ln(eps) - 0.15*(H1^2+H2^2+H3^2)"
rho: 1.0
k: 1.0
initial:
  eps: 0.5
  H: [1.0, 0.0, 0.0]
integration: {t1: 1.0, dt: 0.001}
"""

    def test_thermoelastic_trace(self, tmp_path, capsys):
        config = write(tmp_path / "c.yaml", self.THERMO)
        out = tmp_path / "trace.csv"
        assert main(["simulate", "--config", config, "--out", str(out)]) == EXIT_OK
        header, rows = read_csv(out)
        assert header[:2] == ["t", "eps"]
        assert "theta" in header and "U" in header
        assert len(rows) == 1001
        # H1 decays like e^(-0.3 t) for this potential (rho = k = 1)
        h1 = rows[-1][header.index("H1")]
        assert h1 == pytest.approx(math.exp(-0.3), abs=1e-9)
        # theta column is 1/dU/d(eps) = eps for the log potential
        assert rows[-1][header.index("theta")] == pytest.approx(
            rows[-1][header.index("eps")], rel=1e-12)

    def test_deterministic_bytes(self, tmp_path, capsys):
        config = write(tmp_path / "c.yaml", self.THERMO)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["simulate", "--config", config, "--out", str(a)])
        main(["simulate", "--config", config, "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_domain_exit_keeps_partial_trace(self, tmp_path, capsys):
        config = write(tmp_path / "c.yaml", """
model: thermoelastic
potential: "ln(eps)"
initial: {eps: 0.2}
forcing: {divq: "1"}
integration: {t1: 1.0, dt: 0.05}
""")
        out = tmp_path / "trace.csv"
        # eps decreases at unit rate and leaves the log domain near t = 0.2
        assert main(["simulate", "--config", config, "--out", str(out)]) == EXIT_DOMAIN
        header, rows = read_csv(out)
        assert 2 <= len(rows) < 21
        assert rows[-1][header.index("eps")] > 0.0

    def test_ferroelectric_harmonic(self, tmp_path, capsys):
        config = write(tmp_path / "c.yaml", """
model: ferroelectric
potential: "eps - 2*(pi1^2+pi2^2+pi3^2)"
initial:
  eps: 1.0
  pi: [0.3, 0.0, 0.0]
integration: {t1: 1.0, dt: 0.001}
""")
        out = tmp_path / "trace.csv"
        assert main(["simulate", "--config", config, "--out", str(out)]) == EXIT_OK
        header, rows = read_csv(out)
        assert rows[-1][header.index("pi1")] == pytest.approx(0.3 * math.cos(2.0), abs=1e-6)

    def test_unknown_model(self, tmp_path, capsys):
        config = write(tmp_path / "c.yaml", "model: bogus\n")
        assert main(["simulate", "--config", config]) == EXIT_ERROR


class TestSurface:
    def test_production_residual_column(self, tmp_path, capsys):
        config = write(tmp_path / "c.yaml", """
coords: [q1, q2]
potential: "q1*q2"
sigma: "0.1*q1"
grid: {q1: [0.0, 1.0, 3], q2: [0.0, 1.0, 3]}
""")
        out = tmp_path / "surf.csv"
        assert main(["surface", "--config", config, "--out", str(out)]) == EXIT_OK
        header, rows = read_csv(out)
        assert header == ["q1", "q2", "s", "p_q1", "p_q2", "res_q1", "res_q2"]
        assert rows[:, header.index("res_q1")] == pytest.approx(np.full(9, 0.1))
        assert np.abs(rows[:, header.index("res_q2")]).max() <= 1e-12
        # s column carries U + sigma of the shifted embedding
        i = np.argmax((rows[:, 0] == 1.0) & (rows[:, 1] == 1.0))
        assert rows[i, header.index("s")] == pytest.approx(1.0 + 0.1)

    def test_zero_sigma_is_legendre(self, tmp_path, capsys):
        config = write(tmp_path / "c.yaml", """
coords: [q1, q2]
potential: "q1^2 + q2^2"
grid: {q1: [-1.0, 1.0, 3], q2: [-1.0, 1.0, 3]}
""")
        out = tmp_path / "surf.csv"
        assert main(["surface", "--config", config, "--out", str(out)]) == EXIT_OK
        header, rows = read_csv(out)
        res = rows[:, [header.index("res_q1"), header.index("res_q2")]]
        assert np.abs(res).max() <= 1e-9


class TestAdmissible:
    def curve_file(self, tmp_path, q1):
        lines = ["t,q1,q2"] + [f"{0.1 * i},{v},1.0" for i, v in enumerate(q1)]
        return write(tmp_path / "curve.csv", "\n".join(lines) + "\n")

    def config_file(self, tmp_path, curve):
        return write(tmp_path / "c.yaml", f"""
coords: [q1, q2]
potential: "q1*q2"
sigma: "q1"
curve: "{curve}"
""")

    def test_monotone_admissible(self, tmp_path, capsys):
        curve = self.curve_file(tmp_path, [0.0, 0.1, 0.2, 0.3, 0.4])
        code, doc = run_json(capsys, ["admissible", "--config", self.config_file(tmp_path, curve)])
        assert code == EXIT_OK
        assert doc["admissible"] is True
        assert doc["rates"] == pytest.approx([1.0, 1.0, 1.0])
        assert doc["delta_s"] == pytest.approx(doc["delta_U"] + doc["delta_sigma"])

    def test_reversed_flags_violations(self, tmp_path, capsys):
        curve = self.curve_file(tmp_path, [0.4, 0.3, 0.2, 0.1, 0.0])
        code, doc = run_json(capsys, ["admissible", "--config", self.config_file(tmp_path, curve)])
        assert code == EXIT_OK
        assert doc["admissible"] is False
        assert doc["violating_intervals"] == [1, 2, 3]

    def test_rates_csv(self, tmp_path, capsys):
        curve = self.curve_file(tmp_path, [0.0, 0.1, 0.2, 0.3, 0.4])
        out = tmp_path / "rates.csv"
        main(["admissible", "--config", self.config_file(tmp_path, curve), "--out", str(out)])
        capsys.readouterr()
        header, rows = read_csv(out)
        assert header == ["sample", "rate"]
        assert len(rows) == 3


class TestMetricAction:
    def test_metric(self, tmp_path, capsys):
        config = write(tmp_path / "c.yaml", """
coords: [q1, q2]
potential: "q1^2 + q2^2"
point: {q1: 1.0, q2: 2.0}
""")
        code, doc = run_json(capsys, ["metric", "--config", config])
        assert code == EXIT_OK
        assert doc["metric"] == [[2.0, 0.0], [0.0, 2.0]]
        assert doc["det"] == pytest.approx(4.0)

    def test_action_of_exact_form(self, tmp_path, capsys):
        curve = write(tmp_path / "curve.csv",
                      "t,x,y\n0.0,0.0,0.0\n1.0,0.5,0.5\n2.0,1.0,1.0\n")
        config = write(tmp_path / "c.yaml", f"""
coords: [x, y]
potential: "x*y"
curve: "{curve}"
""")
        code, doc = run_json(capsys, ["action", "--config", config])
        assert code == EXIT_OK
        assert doc["action"] == pytest.approx(1.0, abs=1e-12)


class TestCurvature:
    def test_flat_and_curved(self, tmp_path, capsys):
        config = write(tmp_path / "c.yaml", """
s: s
coords: [q1, q2]
coefficients: {q1: "0", q2: "s*q1"}
point: {s: 2.0, q1: 0.0, q2: 0.0}
""")
        code, doc = run_json(capsys, ["curvature", "--config", config])
        assert code == EXIT_OK
        assert doc["curvature"][0][1] == pytest.approx(2.0)
        assert doc["curvature"][1][0] == pytest.approx(-2.0)


class TestVdw:
    def test_csv_and_spinodal(self, tmp_path, capsys):
        out = tmp_path / "vdw.csv"
        code, doc = run_json(capsys, ["vdw", "--out", str(out)])
        assert code == EXIT_OK
        roots = doc["spinodal_V_at_S0"]
        assert len(roots) == 1
        assert abs(roots[0] - 0.22153559021583927) <= 1e-4
        header, rows = read_csv(out)
        assert header == ["S", "V", "U", "T", "p"]
        assert len(rows) == 5 * 60
        # T column is the exact S-derivative of the constitutive law
        s, v = rows[100, 0], rows[100, 1]
        expected_T = (v - 0.1) ** (-2 / 3) * math.exp(s / 1.5) / 1.5
        assert rows[100, 3] == pytest.approx(expected_T, rel=1e-12)
        # p column is minus the V-derivative
        expected_p = (2 / 3) * (v - 0.1) ** (-5 / 3) * math.exp(s / 1.5) - 1.0 / v ** 2
        assert rows[100, 4] == pytest.approx(expected_p, rel=1e-12)

    def test_deterministic_bytes(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["vdw", "--out", str(a)])
        main(["vdw", "--out", str(b)])
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()
