import json

import pytest

from cubic_shapes import cli, forms, shapes, spectral
from cubic_shapes import enumeration as en


def run(capsys, *argv):
    rc = cli.main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_enumerate_then_rerun_is_noop(tmp_path, capsys):
    out = tmp_path / "c.csv"
    rc, text, _ = run(capsys, "enumerate", "--max-disc", "300", "-o", str(out))
    assert rc == 0 and "classes with 0 < D <= 300" in text
    first = out.read_bytes()
    mtime = out.stat().st_mtime_ns
    rc, text, _ = run(capsys, "enumerate", "--max-disc", "300", "-o", str(out))
    assert rc == 0 and "up to date" in text
    assert out.read_bytes() == first and out.stat().st_mtime_ns == mtime
    recs = en.records_from_csv(first.decode())
    assert recs == en.enumerate_classes(300)
    assert first.decode().startswith("# command=enumerate")


def test_enumerate_shards_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "enumerate", "--max-disc", "3000", "--shards", "1", "-o", str(a))[0] == 0
    assert run(capsys, "enumerate", "--max-disc", "3000", "--shards", "8", "-o", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_enumerate_dual(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert run(capsys, "enumerate", "--max-disc", "300", "--dual", "-o", str(out))[0] == 0
    recs = en.records_from_csv(out.read_text())
    assert recs and all(r.rep[1] % 3 == 0 and r.rep[2] % 3 == 0 for r in recs)
    assert recs == en.brute_force_classes(300, dual=True)


def test_enumerate_ceiling_is_nonzero(tmp_path, capsys):
    rc, _, err = run(capsys, "enumerate", "--max-disc", "20000", "--max-records", "50",
                     "-o", str(tmp_path / "x.csv"))
    assert rc == cli.EXIT_SHORTFALL and "ceiling" in err


@pytest.mark.parametrize("argv", [
    ["enumerate", "--max-disc", "0"],
    ["enumerate", "--max-disc", "10", "--shards", "0"],
    ["weyl", "--phi", "eisenstein:0.5", "--max", "1000"],
    ["weyl", "--phi", "eisenstein:abc", "--max", "1000"],
    ["weyl", "--phi", "bogus", "--max", "1000"],
    ["weyl", "--phi", "const"],
    ["weyl", "--phi", "const", "--max", "1000", "--cutoff", "1,0.5,2,3"],
])
def test_config_errors(argv, capsys):
    rc, _, err = run(capsys, *argv)
    assert rc == cli.EXIT_CONFIG and err.startswith("config error:") and err.count("\n") == 1


def test_shapes_command(capsys):
    rc, text, _ = run(capsys, "shapes", "--max-disc", "50")
    assert rc == 0
    rows = [ln for ln in text.splitlines() if not ln.startswith("#")]
    assert rows[0] == "disc,a,b,c,d,x,y" and len(rows) - 1 == len(en.enumerate_classes(50))


def test_weyl_const_matches_enumeration_counts(tmp_path, capsys):
    rc, text, _ = run(capsys, "weyl", "--phi", "const", "--grid", "1000,4000", "--mode", "raw",
                      "--cutoff", "0.5,0.75,1,1.25")
    assert rc == 0
    recs = en.enumerate_classes(5000)
    psi = cli.lseries.SmoothCutoff()
    cn = en.class_numbers(recs)
    rows = [ln.split(",") for ln in text.splitlines() if ln and not ln.startswith(("#", "X"))]
    for X, sp, sm, np_, nm in rows:
        X = float(X)
        assert float(np_) == pytest.approx(cli.lseries.smoothed_count(X, psi, 1, cn), rel=1e-12)
        assert float(nm) == pytest.approx(cli.lseries.smoothed_count(X, psi, -1, cn), rel=1e-12)
        assert float(sp) == float(np_)


def test_weyl_eisenstein_offline_json(tmp_path, capsys, monkeypatch):
    def no_network(*a, **k):
        raise AssertionError("network used")
    monkeypatch.setattr(spectral.urllib.request, "urlopen", no_network)
    out = tmp_path / "w.json"
    rc, _, _ = run(capsys, "weyl", "--phi", "eisenstein:2", "--grid", "500,1000", "--offline",
                   "--format", "json", "-o", str(out))
    assert rc == 0
    blob = json.loads(out.read_text())
    assert set(blob) == {"raw", "stabilizer-averaged"}
    meta = blob["raw"]["metadata"]
    assert meta["phi"].startswith("eisenstein:2") and len(meta["data_hash"]) == 40
    assert blob["raw"]["fits"]["N_plus"]["stderr"] is None


def test_weyl_maass_file(tmp_path, capsys):
    f = tmp_path / "form.maass"
    f.write_text(spectral.serialize(spectral.synthetic_maass(200, 1)))
    rc, text, _ = run(capsys, "weyl", "--phi", f"maass:{f}", "--grid", "800", "--mode", "averaged")
    assert rc == 0 and "# phi=maass:" in text


def test_weyl_maass_offline_missing(tmp_path, capsys):
    rc, _, err = run(capsys, "weyl", "--phi", "maass:1.1.1", "--max", "1000", "--offline",
                     "--cache-dir", str(tmp_path))
    assert rc == cli.EXIT_SHORTFALL and "eisenstein" in err.lower()


def test_fetch_network_failure(tmp_path, capsys):
    rc, _, err = run(capsys, "fetch", "1.1.1", "--cache-dir", str(tmp_path),
                     "--base-url", "http://127.0.0.1:1/{label}")
    assert rc == cli.EXIT_NETWORK and err.startswith("network failure")


def test_verify_convention(capsys):
    rc, text, _ = run(capsys, "verify", "--convention")
    assert rc == 0 and "[PASS] half-plane convention self-test" in text


def test_broken_convention_is_a_verification_failure(capsys, monkeypatch):
    real = shapes.to_halfplane

    def transposed(g):
        return real(forms.transpose(g))
    monkeypatch.setattr(shapes, "to_halfplane", transposed)
    rc, text, _ = run(capsys, "verify", "--convention")
    assert rc == cli.EXIT_VERIFY and "[FAIL]" in text
    rc, _, err = run(capsys, "enumerate", "--max-disc", "10", "-o", "-")
    assert rc == cli.EXIT_VERIFY


@pytest.mark.slow
def test_verify_quick_all_pass(capsys):
    rc, text, _ = run(capsys, "verify", "--quick")
    assert rc == 0
    lines = [ln for ln in text.splitlines() if ln.startswith("[")]
    assert len(lines) == 14 and all(ln.startswith("[PASS]") for ln in lines)


@pytest.mark.slow
def test_tampered_disc_fails_relative_invariance(capsys, monkeypatch):
    real = forms.disc

    def tampered(f):
        a, b, c, d = f
        return real(f) + a * b * c * d  # not a relative invariant
    monkeypatch.setattr(forms, "disc", tampered)
    rc, text, _ = run(capsys, "verify", "--quick")
    assert rc == cli.EXIT_VERIFY
    assert any(ln.startswith("[FAIL] discriminant relative invariance") for ln in text.splitlines())
