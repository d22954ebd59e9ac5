import numpy as np
import pytest

from poissonridge.cli import main
from poissonridge.config import (DEFAULTS_TABLE, ConfigError, RunConfig,
                                 load_config, parse_config)
from poissonridge.fileio import (read_csv, read_pgm, read_sinogram, write_csv,
                                 write_pgm, write_sinogram)
from poissonridge.harness import LineFit
from poissonridge.phantoms import Bar, Disk, make_phantom, sample_poisson
from poissonridge.radon import drt_gdb, drt_rotation
from poissonridge.seeding import derive_rng
from poissonridge.svgplot import emit_scatter_svg


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv("POISSONRIDGE_OUTPUT_DIR", raising=False)


# --- config ------------------------------------------------------------

def test_empty_config_is_all_defaults():
    cfg = parse_config("")
    assert cfg == RunConfig()
    assert cfg.transform.variant == "rotation"
    assert cfg.transform.angles == 180
    assert cfg.wavelet.mode == "undecimated"
    assert cfg.policy.selector == "sure"
    assert (cfg.entry, cfg.samples, cfg.seed) == ("image", 1000, 0)
    assert cfg.output_dir == "out"


def test_parse_overrides_comments_and_blank_lines():
    cfg = parse_config("""
# full line comment
phantom.kind = inhomogeneous
phantom.size = 32
transform.variant = gdb   # trailing comment
policy.selector = oracle-erm
samples = 250
seed = 9
""")
    assert cfg.phantom.kind == "inhomogeneous"
    assert cfg.phantom.size == 32
    assert cfg.transform.variant == "gdb"
    assert cfg.policy.selector == "oracle-erm"
    assert cfg.samples == 250 and cfg.seed == 9


def test_structures_parse_and_reject():
    cfg = parse_config(
        "phantom.structures = disk:0.5,0.5,0.1 ; bar:0.2,0.2,0.1,0.4\n")
    assert cfg.phantom.structures == (Disk(0.5, 0.5, 0.1), Bar(0.2, 0.2, 0.1, 0.4))
    with pytest.raises(ConfigError, match="disk:cx,cy,r"):
        parse_config("phantom.structures = blob:1,2\n")


def test_errors_carry_line_number_and_field_name():
    with pytest.raises(ConfigError, match=r"line 3.*unknown key.*'transform\.rays'"):
        parse_config("seed = 1\n\ntransform.rays = 90\n")
    with pytest.raises(ConfigError, match=r"line 1.*samples expects an integer"):
        parse_config("samples = many\n")
    with pytest.raises(ConfigError, match=r"line 2.*background_intensity"):
        parse_config("seed = 0\nphantom.background_intensity = -3\n")
    with pytest.raises(ConfigError, match=r"line 1.*expected 'key = value'"):
        parse_config("just some words\n")
    with pytest.raises(ConfigError, match=r"line 1.*seed must be >= 0"):
        parse_config("seed = -1\n")


def test_component_validation_is_wrapped_with_location():
    with pytest.raises(ConfigError, match=r"line 1.*transform\.interp"):
        parse_config("transform.interp = bicubic\n")
    with pytest.raises(ConfigError, match=r"line 1.*wavelet\.levels"):
        parse_config("wavelet.levels = 0\n")


def test_pet_preset_applies_first_then_overrides():
    plain = parse_config("preset = pet\n")
    assert plain.phantom.kind == "synthetic-sinogram"
    assert plain.phantom.size == 128
    assert plain.phantom.background_intensity == 255.0
    assert plain.wavelet.levels == 3 and plain.wavelet.mode == "undecimated"
    assert plain.policy.selector == "sure"
    assert plain.entry == "sinogram"

    cfg = parse_config("phantom.size = 32\npreset = pet\nsamples = 500\n")
    assert cfg.phantom.size == 32  # file lines beat the preset bundle
    assert cfg.phantom.kind == "synthetic-sinogram"
    assert cfg.samples == 500
    with pytest.raises(ConfigError, match="unknown preset"):
        parse_config("preset = ct\n")


def test_selector_aliases_normalize():
    cfg = parse_config("policy.selector = sure-gaussian-approx\n")
    assert cfg.policy.selector == "sure"
    cfg = parse_config("policy.selector = oracle\n")
    assert cfg.policy.selector == "oracle-erm"


def test_output_dir_env_override(monkeypatch):
    monkeypatch.setenv("POISSONRIDGE_OUTPUT_DIR", "/tmp/elsewhere")
    cfg = parse_config("output_dir = custom\n")
    assert cfg.output_dir == "/tmp/elsewhere"


def test_load_config_missing_file():
    with pytest.raises(ConfigError, match="cannot read config"):
        load_config("/nonexistent/run.cfg")


def test_defaults_table_lists_every_dotted_key():
    for key in ("phantom.kind", "transform.interp", "wavelet.mode",
                "policy.grid_max", "entry", "samples", "output_dir"):
        assert key in DEFAULTS_TABLE


# --- pgm / csv storage ---------------------------------------------------

def test_pgm_eight_bit_round_trip(tmp_path):
    a = np.arange(12, dtype=np.int64).reshape(3, 4) * 20
    p = tmp_path / "a.pgm"
    write_pgm(p, a)
    raw = p.read_bytes()
    assert raw.startswith(b"P5")
    assert b"220" in raw  # maxval is the actual maximum, one byte per sample
    assert len(raw) == raw.index(b"220") + len(b"220\n") + a.size
    back = read_pgm(p)
    assert back.dtype == np.int64
    assert np.array_equal(back, a)


def test_pgm_sixteen_bit_and_overflow(tmp_path):
    a = np.array([[0, 300], [65535, 42]], dtype=np.int64)
    p = tmp_path / "wide.pgm"
    write_pgm(p, a)
    assert np.array_equal(read_pgm(p), a)
    with pytest.raises(ValueError, match="16-bit"):
        write_pgm(tmp_path / "x.pgm", np.array([[70000]]))


def test_pgm_input_validation(tmp_path):
    with pytest.raises(ValueError):
        write_pgm(tmp_path / "x.pgm", np.array([[-1, 0]]))
    with pytest.raises(ValueError):
        write_pgm(tmp_path / "x.pgm", np.array([[0.5]]))
    with pytest.raises(ValueError):
        write_pgm(tmp_path / "x.pgm", np.zeros(4, dtype=int))


def test_pgm_reader_skips_comments(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5 # magic\n# a comment line\n2 2\n# more\n255\n" +
                  bytes([1, 2, 3, 4]))
    assert np.array_equal(read_pgm(p), [[1, 2], [3, 4]])
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P6\n1 1\n255\nx")
    with pytest.raises(ValueError, match="P6"):
        read_pgm(bad)


def test_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    a = rng.normal(size=(7, 5)) * np.logspace(-200, 200, 5)
    a[0, 0] = np.pi
    p = tmp_path / "grid.csv"
    write_csv(p, a, {"kind": "test", "note": "exact"})
    back, meta = read_csv(p)
    assert np.array_equal(back, a)  # %.17g survives the float64 round trip
    assert meta == {"kind": "test", "note": "exact"}


def test_csv_structure_errors(tmp_path):
    p = tmp_path / "short.csv"
    p.write_text("# shape = 3,2\n1,2\n3,4\n")
    with pytest.raises(ValueError, match="3"):
        read_csv(p)
    q = tmp_path / "ragged.csv"
    q.write_text("# shape = 2,2\n1,2\n3\n")
    with pytest.raises(ValueError):
        read_csv(q)


def test_write_leaves_no_temp_droppings(tmp_path):
    write_csv(tmp_path / "a.csv", np.ones((2, 2)))
    write_pgm(tmp_path / "b.pgm", np.ones((2, 2), dtype=int))
    assert sorted(f.name for f in tmp_path.iterdir()) == ["a.csv", "b.pgm"]


def test_sinogram_round_trip_both_variants(tmp_path):
    img = np.random.default_rng(1).uniform(0, 4, size=(8, 8))
    rot = drt_rotation(img, angles=6, interp="area")
    p = tmp_path / "rot.csv"
    write_sinogram(p, rot)
    back = read_sinogram(p)
    assert back.variant == "rotation" and back.interp == "area"
    assert back.image_shape == (8, 8)
    assert back.offset_min == rot.offset_min
    assert np.array_equal(back.angles, rot.angles)
    assert np.array_equal(back.data, rot.data)

    gdb = drt_gdb(img)
    q = tmp_path / "gdb.csv"
    write_sinogram(q, gdb)
    back = read_sinogram(q)
    assert back.variant == "gdb" and back.gdb_size == 8
    assert np.array_equal(back.data, gdb.data)

    plain = tmp_path / "plain.csv"
    write_csv(plain, img)
    with pytest.raises(ValueError, match="not a sinogram"):
        read_sinogram(plain)


# --- svg scatter ----------------------------------------------------------

def test_scatter_svg_marks_every_point(tmp_path):
    pts = np.column_stack([np.linspace(0, 5, 9), np.linspace(0, 5, 9) + 0.1])
    p = tmp_path / "s.svg"
    emit_scatter_svg(pts, p, fit=LineFit(1.02, 0.05, 0.99))
    text = p.read_text()
    assert text.lstrip().startswith("<svg")
    assert text.rstrip().endswith("</svg>")
    assert text.count("<circle") == 9
    assert "slope = 1.020000" in text


def test_scatter_svg_tiny_slope_formatting(tmp_path):
    pts = np.array([[0.0, 0.0], [1.0, 0.000001], [2.0, 0.000002]])
    p = tmp_path / "flat.svg"
    emit_scatter_svg(pts, p, fit=LineFit(1e-6, 0.0, 1.0))
    assert "slope = 0.000001" in p.read_text()


def test_scatter_svg_single_point_no_fit(tmp_path):
    p = tmp_path / "one.svg"
    emit_scatter_svg(np.array([[2.0, 3.0]]), p)
    text = p.read_text()
    assert text.count("<circle") == 1
    assert "slope" not in text
    with pytest.raises(ValueError):
        emit_scatter_svg(np.zeros((0, 2)), tmp_path / "none.svg")


# --- command line ----------------------------------------------------------

def write_cfg(tmp_path, body):
    p = tmp_path / "run.cfg"
    p.write_text(body)
    return str(p)


def test_cli_simulate_writes_reproducible_artifacts(tmp_path, capsys):
    cfg = write_cfg(tmp_path, f"""
phantom.kind = homogeneous
phantom.size = 16
phantom.background_intensity = 4.0
seed = 3
output_dir = {tmp_path / 'out'}
""")
    assert main(["simulate", "-c", cfg]) == 0
    out = capsys.readouterr().out
    assert "wrote" in out and "counts.pgm" in out
    intensity, _ = read_csv(tmp_path / "out" / "intensity.csv")
    assert np.allclose(intensity, 4.0) and intensity.shape == (16, 16)
    counts = read_pgm(tmp_path / "out" / "counts.pgm")
    want = sample_poisson(intensity, rng=derive_rng(3, "simulate"))
    assert np.array_equal(counts, want)


def test_cli_transform_reads_counts_file(tmp_path):
    counts = np.random.default_rng(2).poisson(3.0, size=(8, 8))
    src = tmp_path / "counts.pgm"
    write_pgm(src, counts)
    cfg = write_cfg(tmp_path, f"transform.variant = gdb\n"
                              f"output_dir = {tmp_path / 'out'}\n")
    assert main(["transform", "-c", cfg, "--input", str(src)]) == 0
    sino = read_sinogram(tmp_path / "out" / "sinogram.csv")
    assert np.array_equal(sino.data, drt_gdb(counts.astype(float)).data)


def test_cli_verify_dist_artifacts_and_determinism(tmp_path, capsys):
    body = """
phantom.kind = inhomogeneous
phantom.size = 8
phantom.background_intensity = 1.0
transform.variant = gdb
samples = 100
seed = 4
"""
    cfg_a = write_cfg(tmp_path, body + f"output_dir = {tmp_path / 'a'}\n")
    assert main(["verify-dist", "-c", cfg_a, "--gof"]) == 0
    out = capsys.readouterr().out
    assert "radon: n=" in out and "mean_var_ratio=" in out
    for stem in ("radon", "detail_1", "approximation_1"):
        scatter, meta = read_csv(tmp_path / "a" / f"dist_{stem}.csv")
        assert scatter.shape[1] == 2
        assert float(meta["mean_var_ratio"]) > 0
    _, radon_meta = read_csv(tmp_path / "a" / "dist_radon.csv")
    assert float(radon_meta["gof_pass_fraction"]) >= 0.9
    assert (tmp_path / "a" / "scatter_radon.svg").exists()

    # identical settings, fresh directory: byte-identical outputs
    cfg_b = write_cfg(tmp_path / "a", body + f"output_dir = {tmp_path / 'b'}\n")
    assert main(["verify-dist", "-c", cfg_b, "--gof"]) == 0
    for name in ("dist_radon.csv", "dist_detail_1.csv", "scatter_radon.svg"):
        assert (tmp_path / "a" / name).read_bytes() == \
               (tmp_path / "b" / name).read_bytes()


def test_cli_denoise_report_sections(tmp_path, capsys):
    cfg = write_cfg(tmp_path, f"""
phantom.kind = inhomogeneous
phantom.size = 16
phantom.background_intensity = 1.0
transform.angles = 30
transform.interp = area
samples = 100
output_dir = {tmp_path / 'out'}
""")
    assert main(["denoise", "-c", cfg]) == 0
    out = capsys.readouterr().out
    assert "noisy: mse=" in out and "denoised: mse=" in out
    report = (tmp_path / "out" / "run_report.txt").read_text()
    for section in ("[config]", "[timings]", "[thresholds]", "[metrics]",
                    "[artifacts]"):
        assert section in report
    assert "detail_1 = " in report
    rows, meta = read_csv(tmp_path / "out" / "metrics.csv")
    assert rows.shape == (2, 3)
    assert meta["columns"] == "mse;ssim;psnr"
    # one logged threshold per detail level, parseable back to a float
    assert len(meta["thresholds"].split(";")) == 1
    float(meta["thresholds"])
    denoised, _ = read_csv(tmp_path / "out" / "denoised.csv")
    assert denoised.shape == (16, 16)
    assert read_pgm(tmp_path / "out" / "noisy.pgm").shape == (16, 16)


def test_cli_denoise_selector_override(tmp_path, capsys):
    cfg = write_cfg(tmp_path, f"""
phantom.kind = inhomogeneous
phantom.size = 16
phantom.background_intensity = 1.0
transform.angles = 20
output_dir = {tmp_path / 'out'}
""")
    assert main(["denoise", "-c", cfg, "--selector", "oracle"]) == 0
    capsys.readouterr()
    report = (tmp_path / "out" / "run_report.txt").read_text()
    assert "oracle-erm" in report

    assert main(["denoise", "-c", cfg, "--selector", "magic"]) == 1
    assert capsys.readouterr().err.startswith("error: validation:")


def test_cli_metrics_compares_two_grids(tmp_path, capsys):
    a = np.full((4, 4), 2.0)
    b = a.copy()
    b[0, 0] = 5.0
    write_csv(tmp_path / "a.csv", a)
    write_csv(tmp_path / "b.csv", b)
    assert main(["metrics", str(tmp_path / "a.csv"), str(tmp_path / "b.csv")]) == 0
    m, s, p = (float(t) for t in capsys.readouterr().out.split(","))
    assert m == pytest.approx(9.0 / 16.0)
    assert -1.0 <= s <= 1.0
    # identical grids: zero error, infinite psnr
    assert main(["metrics", str(tmp_path / "a.csv"), str(tmp_path / "a.csv")]) == 0
    m2, s2, p2 = (float(t) for t in capsys.readouterr().out.split(","))
    assert m2 == 0.0 and s2 == 1.0 and np.isinf(p2)


def test_cli_seed_override_changes_counts(tmp_path):
    cfg = write_cfg(tmp_path, f"phantom.size = 8\n"
                              f"phantom.background_intensity = 5.0\n"
                              f"output_dir = {tmp_path / 'o1'}\n")
    assert main(["simulate", "-c", cfg]) == 0
    assert main(["simulate", "-c", cfg, "--seed", "99",
                 "--output-dir", str(tmp_path / "o2")]) == 0
    c1 = read_pgm(tmp_path / "o1" / "counts.pgm")
    c2 = read_pgm(tmp_path / "o2" / "counts.pgm")
    assert not np.array_equal(c1, c2)


def test_cli_error_lines(tmp_path, capsys):
    assert main(["simulate", "-c", "/nonexistent.cfg"]) == 1
    assert capsys.readouterr().err.startswith("error: config:")

    cfg = write_cfg(tmp_path, "transform.interp = warp\n")
    assert main(["simulate", "-c", cfg]) == 1
    err = capsys.readouterr().err
    assert err.startswith("error: config:") and "line 1" in err

    # gof needs integer-valued coefficients; linear interp is not
    cfg2 = write_cfg(tmp_path, "samples = 100\ntransform.interp = linear\n"
                               f"output_dir = {tmp_path / 'x'}\n")
    assert main(["verify-dist", "-c", cfg2, "--gof"]) == 1
    assert capsys.readouterr().err.startswith("error: validation:")

    assert main(["metrics", str(tmp_path / "missing.csv"),
                 str(tmp_path / "missing.csv")]) == 1
    assert capsys.readouterr().err.startswith("error: io:")

    with pytest.raises(SystemExit):
        main([])
