import json
from pathlib import Path

import pytest

from flplots import evolution_maps, span_vs_length, switch_curves, time_overlay
from flplots.common import PlotDataError, columns, metadata_from_comments

ACCEPTANCE = Path(__file__).resolve().parents[2] / "artifacts" / "acceptance"


def write(path, text):
    path.write_text(text)
    return str(path)


@pytest.fixture
def curve_csv(tmp_path):
    return write(tmp_path / "curve.csv",
                 "# switching curve: f_R=0.18, length_m=100\n"
                 "energy_nJ,T,R,phase_rad\n"
                 "0.5,0.2,0.8,0.93\n1.0,0.6,0.4,1.77\n2.0,0.99,0.01,3.1\n")


class TestCommon:
    def test_columns_and_metadata(self, curve_csv):
        comments, cols = columns(curve_csv, ["energy_nJ", "T"])
        assert cols["T"] == [0.2, 0.6, 0.99]
        assert metadata_from_comments(comments)["f_R"] == "0.18"

    def test_empty_csv_rejected(self, tmp_path):
        path = write(tmp_path / "empty.csv", "# nothing\nenergy_nJ,T,R,phase_rad\n")
        with pytest.raises(PlotDataError):
            columns(path, ["energy_nJ"])

    def test_missing_column_rejected(self, curve_csv):
        with pytest.raises(PlotDataError):
            columns(curve_csv, ["bogus"])


class TestScripts:
    def test_switch_curves(self, curve_csv, tmp_path):
        out = tmp_path / "fig.png"
        assert switch_curves.main([curve_csv, "--out", str(out),
                                   "--markers"]) == 0
        assert out.stat().st_size > 0

    def test_span_vs_length(self, tmp_path):
        csv = write(tmp_path / "spans.csv",
                    "# spans\n"
                    "length_m,fwhm_ps,f_R,theta,e_lo_nJ,e_hi_nJ,width_nJ,found,error\n"
                    "100,4,0,0.95,1.6,2.25,0.65,1,\n"
                    "100,4,0.18,0.95,1.6,2.4,0.8,1,\n"
                    "500,4,0,0.95,1.6,2.25,0.65,1,\n"
                    "500,4,0.18,0.95,1.5,2.6,1.1,1,\n")
        out = tmp_path / "fig.png"
        assert span_vs_length.main([csv, "--out", str(out)]) == 0
        assert out.stat().st_size > 0

    def test_time_overlay(self, tmp_path):
        csv = write(tmp_path / "overlay.csv",
                    "# overlay\nt_ps,P_raman_norm,P_kerr_norm,P_input_norm\n"
                    + "".join(f"{t},{0.5},{0.6},{1.0 if t == 0 else 0.1}\n"
                              for t in range(-5, 6)))
        out = tmp_path / "fig.png"
        assert time_overlay.main([csv, "--out", str(out), "--logy"]) == 0
        assert out.stat().st_size > 0

    def test_evolution_map(self, tmp_path):
        csv = tmp_path / "map_time.csv"
        rows = [f"{z}," + ",".join("-10" if i != 2 else "0" for i in range(5))
                for z in (0.0, 50.0, 100.0)]
        csv.write_text("# map\n# axes\nz_m,-2,-1,0,1,2\n" + "\n".join(rows) + "\n")
        (tmp_path / "map_time.json").write_text(json.dumps(
            {"domain": "time", "axis_unit": "ps", "clip_db": -40.0}))
        out = tmp_path / "fig.png"
        assert evolution_maps.main([str(csv), "--out", str(out)]) == 0
        assert out.stat().st_size > 0

    def test_no_file_written_on_empty_input(self, tmp_path):
        csv = write(tmp_path / "empty.csv", "energy_nJ,T,R,phase_rad\n")
        out = tmp_path / "fig.png"
        with pytest.raises(PlotDataError):
            switch_curves.main([csv, "--out", str(out)])
        assert not out.exists()


@pytest.mark.skipif(not ACCEPTANCE.exists(),
                    reason="acceptance artifacts not generated yet")
class TestAcceptanceArtifacts:
    """The four figure kinds regenerate from the committed acceptance CSVs."""

    def test_switch_curves(self, tmp_path):
        csvs = sorted(str(p) for p in ACCEPTANCE.glob("sweep_fR*.csv"))
        assert csvs, "no committed switch-curve CSVs"
        out = tmp_path / "fig2.png"
        assert switch_curves.main(csvs + ["--out", str(out)]) == 0
        assert out.stat().st_size > 0

    def test_span_vs_length(self, tmp_path):
        csv = ACCEPTANCE / "span_grid.csv"
        out = tmp_path / "fig3.png"
        assert span_vs_length.main([str(csv), "--out", str(out)]) == 0
        assert out.stat().st_size > 0

    def test_time_overlay(self, tmp_path):
        csv = ACCEPTANCE / "time_overlay.csv"
        out = tmp_path / "fig4.png"
        assert time_overlay.main([str(csv), "--out", str(out)]) == 0
        assert out.stat().st_size > 0

    def test_evolution_maps(self, tmp_path):
        csvs = [str(ACCEPTANCE / "map_time.csv"),
                str(ACCEPTANCE / "map_wavelength.csv")]
        out = tmp_path / "fig5.png"
        assert evolution_maps.main(csvs + ["--out", str(out)]) == 0
        assert out.stat().st_size > 0
        for csv in csvs:
            sidecar = json.loads(Path(csv[:-4] + ".json").read_text())
            assert sidecar["clip_db"] == -40.0
