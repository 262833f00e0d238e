"""Grid decomposition, cell runs, resume, aggregation, and report emission."""

import json
import os

import numpy as np
import pytest

from specdenoise import svgchart
from specdenoise.cdae import TrainConfig
from specdenoise.dataset import build_synthetic
from specdenoise.errors import DatasetMissingError, InvalidParamError, NoRecordsError
from specdenoise.noisegen import DistKind, Distribution
from specdenoise.seeding import derive_seed
from specdenoise.sweep import (
    DEFAULT_TIE_TOLERANCE,
    RESULTS_COLUMNS,
    TENTHS,
    BestColoring,
    BestNf,
    RunRecord,
    SweepGrid,
    best_coloring,
    best_nf,
    emit_report,
    record_to_csv_row,
    records_from_csv,
    run_cell,
    run_grid,
)

GAUSS = Distribution(DistKind.GAUSSIAN)
LAPLACE = Distribution(DistKind.LAPLACE)

FAST_TRAIN = TrainConfig(epochs=1, batch_size=2, lr=0.002)


@pytest.fixture(scope="module")
def grid_images():
    return tuple(e.pixels for e in build_synthetic(4, (16, 16, 1), seed=30))


@pytest.fixture(scope="module")
def small_grid(grid_images):
    return SweepGrid(
        dataset=grid_images,
        distributions=(GAUSS, LAPLACE),
        nf_values=(0.0, 0.3, 0.6),
        a_values=(0.0,),
        epochs_values=(1,),
        master_seed=77,
        train_template=FAST_TRAIN,
    )


def _ok_record(dist="gaussian", nf=0.3, a=0.0, loss=0.01, epochs=1):
    return RunRecord(dist=dist, nf=nf, a=a, epochs=epochs, seed=1, trace=(),
                     min_val_loss=loss, min_epoch=1, psnr_noisy_db=20.0,
                     psnr_denoised_db=22.0, wall_time_s=1.5, status="ok")


class TestGrid:
    def test_tenths_axis(self):
        assert TENTHS == (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)

    def test_size_is_axis_product(self, small_grid):
        assert small_grid.size == 2 * 3 * 1 * 1

    def test_cell_decomposition_round_trips(self, small_grid):
        seen = set()
        for index in range(small_grid.size):
            coords = small_grid.cell(index)
            assert coords.index == index
            seen.add((coords.dist.kind, coords.nf, coords.a, coords.epochs))
        assert len(seen) == small_grid.size

    def test_cell_index_bounds(self, small_grid):
        with pytest.raises(InvalidParamError):
            small_grid.cell(small_grid.size)
        with pytest.raises(InvalidParamError):
            small_grid.cell(-1)

    def test_cell_seed_depends_on_coords_not_dataset(self, small_grid, grid_images):
        coords = small_grid.cell(1)
        want = derive_seed(77, "cell", "gaussian", 1, 0, 0)
        assert small_grid.cell_seed(coords) == want
        other = SweepGrid(dataset=grid_images[:2], distributions=(GAUSS, LAPLACE),
                          nf_values=(0.0, 0.3, 0.6), a_values=(0.0,),
                          epochs_values=(1,), master_seed=77)
        assert other.cell_seed(other.cell(1)) == want

    def test_empty_axis_rejected(self, grid_images):
        with pytest.raises(InvalidParamError):
            SweepGrid(dataset=grid_images, distributions=(), nf_values=(0.3,))

    def test_mixed_shapes_rejected(self, grid_images):
        bad = grid_images + (np.zeros((8, 8, 1)),)
        with pytest.raises(InvalidParamError):
            SweepGrid(dataset=bad, distributions=(GAUSS,))


class TestRunCell:
    def test_record_contents(self, small_grid):
        record = run_cell(small_grid, 1)
        assert record.status == "ok"
        assert record.dist == "gaussian"
        assert record.nf == 0.3 and record.a == 0.0 and record.epochs == 1
        assert len(record.trace) == 1
        assert record.min_val_loss == record.trace[0].val_loss
        assert record.min_epoch == 1
        assert np.isfinite(record.psnr_noisy_db)
        assert record.psnr_denoised_db != record.psnr_noisy_db
        assert record.wall_time_s > 0.0

    def test_rerun_is_numerically_identical(self, small_grid):
        a = run_cell(small_grid, 4)
        b = run_cell(small_grid, 4)
        assert record_to_csv_row(a) == record_to_csv_row(b)
        assert [t.val_loss for t in a.trace] == [t.val_loss for t in b.trace]

    def test_failure_becomes_error_record(self):
        images = tuple(np.zeros((15, 15, 1)) for _ in range(2))
        grid = SweepGrid(dataset=images, distributions=(GAUSS,), nf_values=(0.3,),
                         a_values=(0.0,), epochs_values=(1,), train_template=FAST_TRAIN)
        record = run_cell(grid, 0)
        assert record.status == "error:ShapeNotDivisibleError"
        assert record.message
        assert np.isnan(record.min_val_loss)
        assert record.trace == ()

    def test_nf_zero_cell_trains_on_clean_pairs(self, small_grid):
        record = run_cell(small_grid, 0)
        assert record.nf == 0.0
        assert record.psnr_noisy_db == float("inf")


class TestRunGrid:
    def test_records_in_cell_order(self, small_grid):
        records = run_grid(small_grid)
        assert len(records) == small_grid.size
        for i, r in enumerate(records):
            coords = small_grid.cell(i)
            assert (r.dist, r.nf, r.a) == (coords.dist.kind.value, coords.nf, coords.a)

    def test_standalone_cell_reproduces_grid_record(self, small_grid):
        records = run_grid(small_grid)
        alone = run_cell(small_grid, 3)
        assert record_to_csv_row(alone) == record_to_csv_row(records[3])

    def test_cell_files_written_and_resumable(self, small_grid, tmp_path):
        out = tmp_path / "sweep"
        first = run_grid(small_grid, out, resume=True)
        cells = sorted((out / "cells").iterdir())
        assert len(cells) == small_grid.size
        stamp = {p.name: p.stat().st_mtime_ns for p in cells}

        # drop one record, corrupt another; resume recomputes exactly those
        (out / "cells" / "cell_00002.json").unlink()
        (out / "cells" / "cell_00004.json").write_text("{not json")
        second = run_grid(small_grid, out, resume=True)
        assert [record_to_csv_row(r) for r in first] == [record_to_csv_row(r) for r in second]
        for p in sorted((out / "cells").iterdir()):
            if p.name in ("cell_00002.json", "cell_00004.json"):
                assert p.stat().st_mtime_ns != stamp[p.name]
            else:
                assert p.stat().st_mtime_ns == stamp[p.name]

    def test_cell_file_contents_round_trip(self, small_grid, tmp_path):
        out = tmp_path / "sweep"
        records = run_grid(small_grid, out)
        payload = json.loads((out / "cells" / "cell_00000.json").read_text())
        assert payload["dist"] == records[0].dist
        assert payload["min_val_loss"] == records[0].min_val_loss
        assert len(payload["trace"]) == len(records[0].trace)

    def test_parallel_matches_serial(self, small_grid):
        serial = run_grid(small_grid, workers=1)
        parallel = run_grid(small_grid, workers=3)
        assert [record_to_csv_row(r) for r in serial] == \
               [record_to_csv_row(r) for r in parallel]

    def test_tiny_dataset_rejected(self, grid_images):
        grid = SweepGrid(dataset=grid_images[:1], distributions=(GAUSS,),
                         nf_values=(0.3,), a_values=(0.0,), epochs_values=(1,))
        with pytest.raises(DatasetMissingError):
            run_grid(grid)


class TestBestNf:
    def test_single_record(self):
        result = best_nf([_ok_record(nf=0.4, loss=0.02)], "gaussian", 0.0)
        assert result == BestNf((0.4,), 0.02, None, None)

    def test_tie_within_tolerance_reports_both(self):
        records = [
            _ok_record(nf=0.2, loss=0.0032),
            _ok_record(nf=0.3, loss=0.00323),
            _ok_record(nf=0.8, loss=0.0034),
        ]
        result = best_nf(records, "gaussian", 0.0)
        assert result.nf_values == (0.2, 0.3)
        assert result.min_loss == 0.0032
        assert result.runner_up_loss == 0.0034
        assert result.runner_up_nf == 0.8

    def test_zero_tolerance_gives_single_winner(self):
        records = [_ok_record(nf=0.2, loss=0.0032), _ok_record(nf=0.3, loss=0.00323)]
        result = best_nf(records, "gaussian", 0.0, tolerance=0.0)
        assert result.nf_values == (0.2,)
        assert result.runner_up_nf == 0.3

    def test_filters_by_distribution_and_a(self):
        records = [
            _ok_record(dist="laplace", nf=0.1, loss=0.001),
            _ok_record(nf=0.5, loss=0.02),
            _ok_record(nf=0.6, a=0.4, loss=0.0001),
        ]
        result = best_nf(records, GAUSS, 0.0)
        assert result.nf_values == (0.5,)

    def test_error_records_ignored(self):
        bad = RunRecord(dist="gaussian", nf=0.1, a=0.0, epochs=1, seed=0, trace=(),
                        min_val_loss=float("nan"), min_epoch=0, psnr_noisy_db=float("nan"),
                        psnr_denoised_db=float("nan"), wall_time_s=0.0,
                        status="error:NonFiniteLossError")
        result = best_nf([bad, _ok_record(nf=0.5, loss=0.02)], "gaussian", 0.0)
        assert result.nf_values == (0.5,)

    def test_no_matching_records(self):
        with pytest.raises(NoRecordsError):
            best_nf([_ok_record()], "weibull", 0.0)


class TestBestColoring:
    def test_averages_over_noise_factors(self):
        records = [
            _ok_record(nf=0.1, a=0.0, loss=0.03),
            _ok_record(nf=0.2, a=0.0, loss=0.01),
            _ok_record(nf=0.1, a=0.8, loss=0.015),
            _ok_record(nf=0.2, a=0.8, loss=0.016),
        ]
        result = best_coloring(records, "gaussian")
        assert result == BestColoring(0.8, pytest.approx(0.0155))

    def test_all_equal_ties_to_smallest_a(self):
        records = [_ok_record(a=a, loss=0.01) for a in (0.0, 0.3, 0.6)]
        assert best_coloring(records, "gaussian").a == 0.0

    def test_single_a(self):
        assert best_coloring([_ok_record(a=0.4)], "gaussian").a == 0.4


class TestCsv:
    def test_row_zeroes_wall_time(self):
        row = record_to_csv_row(_ok_record())
        parts = row.split(",")
        assert len(parts) == len(RESULTS_COLUMNS)
        assert parts[RESULTS_COLUMNS.index("wall_time_s")] == "0.0"

    def test_roundtrip_through_file(self, tmp_path):
        records = [_ok_record(nf=0.1), _ok_record(nf=0.2, loss=0.005)]
        emit_report(records, tmp_path)
        back = records_from_csv(tmp_path / "results.csv")
        assert [record_to_csv_row(r) for r in back] == \
               [record_to_csv_row(r) for r in records]

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(NoRecordsError):
            records_from_csv(path)

    def test_missing_file(self, tmp_path):
        from specdenoise.errors import IoError

        with pytest.raises(IoError):
            records_from_csv(tmp_path / "absent.csv")


class TestEmitReport:
    @pytest.fixture()
    def ten_records(self):
        return [_ok_record(nf=nf, a=a, loss=0.02 - 0.01 * nf)
                for nf in (0.1, 0.2, 0.3, 0.4, 0.5) for a in (0.0, 0.5)]

    def test_results_rows_and_files(self, ten_records, tmp_path):
        emit_report(ten_records, tmp_path)
        lines = (tmp_path / "results.csv").read_text().strip().splitlines()
        assert len(lines) == 11  # header + 10 rows
        assert lines[0] == ",".join(RESULTS_COLUMNS)
        for name in ("errors.csv", "timings.csv", "optimum_nf.csv",
                     "optimum_coloring.csv", "loss_vs_nf__gaussian.svg",
                     "loss_vs_a__gaussian.svg", "loss_vs_epochs.svg", "report.md"):
            assert (tmp_path / name).exists(), name

    def test_empty_records_write_nothing(self, tmp_path):
        out = tmp_path / "report"
        with pytest.raises(NoRecordsError):
            emit_report([], out)
        assert not out.exists()

    def test_error_records_segregated(self, tmp_path):
        bad = RunRecord(dist="gaussian", nf=0.9, a=0.0, epochs=1, seed=0, trace=(),
                        min_val_loss=float("nan"), min_epoch=0, psnr_noisy_db=float("nan"),
                        psnr_denoised_db=float("nan"), wall_time_s=0.1,
                        status="error:NonFiniteLossError", message="boom, at epoch 1")
        emit_report([_ok_record(), bad], tmp_path)
        results = (tmp_path / "results.csv").read_text()
        errors = (tmp_path / "errors.csv").read_text()
        assert "error:NonFiniteLossError" not in results
        assert "error:NonFiniteLossError" in errors
        assert "boom; at epoch 1" in errors  # comma sanitized

    def test_timings_keeps_real_wall_times(self, ten_records, tmp_path):
        emit_report(ten_records, tmp_path)
        timings = (tmp_path / "timings.csv").read_text().strip().splitlines()
        assert timings[0] == "dist,nf,a,epochs,wall_time_s"
        assert timings[1].endswith(",1.5")

    def test_emission_is_byte_deterministic(self, ten_records, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        emit_report(ten_records, out_a)
        emit_report(ten_records, out_b)
        for name in os.listdir(out_a):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name

    def test_report_states_reference_points_without_expecting_agreement(self, ten_records, tmp_path):
        emit_report(ten_records, tmp_path)
        text = (tmp_path / "report.md").read_text()
        assert "0.3" in text          # the reference optimum
        assert "0.0032" in text       # the reference loss band
        assert "not expected" in text


class TestSvgChart:
    def test_structure_and_determinism(self):
        series = [("run A", [(0.0, 1.0), (1.0, 0.5)]), ("run B", [(0.0, 0.8)])]
        svg = svgchart.render_line_chart("Loss & curves", "x", "y", series)
        assert svg.startswith("<svg")
        assert svg.rstrip().endswith("</svg>")
        assert svg.count("<polyline") == 2
        assert "&amp;" in svg  # title ampersand escaped
        assert svg == svgchart.render_line_chart("Loss & curves", "x", "y", series)

    def test_write_matches_render(self, tmp_path):
        series = [("s", [(0.0, 1.0), (2.0, 3.0)])]
        path = tmp_path / "chart.svg"
        svgchart.write_line_chart(path, "t", "x", "y", series)
        assert path.read_text() == svgchart.render_line_chart("t", "x", "y", series)

    def test_empty_series_rejected(self):
        with pytest.raises(InvalidParamError):
            svgchart.render_line_chart("t", "x", "y", [])
