"""Tests for kernel tables and sample files."""
import numpy as np
import pytest

from src.data_sources.tables import KernelTable, load_samples, save_kernel_table, save_samples
from src.errors import ValidationError
from src.models.measurement import KernelSpec
from src.models.monte_carlo import SampleSet
from src.numerics.grid import Grid


@pytest.fixture
def kernel_csv(tmp_path):
    """Gaussian kernel of width 0.5 tabulated with spacing 0.01."""
    sampled = KernelSpec.gaussian(0.5).sample(Grid.centered(0.0, 10.0, 2001))
    return save_kernel_table(sampled, tmp_path / "kernel.csv"), sampled


def test_kernel_table_loads_as_tabulated(kernel_csv):
    """Test offsets and values come back as a tabulated kernel."""
    path, sampled = kernel_csv
    kernel = KernelTable(path).load()
    assert kernel.kind == "tabulated"
    assert kernel.table.grid.dx == pytest.approx(0.01)
    assert kernel.table.grid.n_points == sampled.grid.n_points
    assert np.allclose(kernel.table.values, sampled.values)
    assert kernel.effective_width() == pytest.approx(0.5, rel=1e-3)


def test_kernel_table_spacing_must_match_grid(kernel_csv):
    """Test a grid with another spacing is rejected."""
    path, _ = kernel_csv
    with pytest.raises(ValidationError, match="spacing"):
        KernelTable(path).load(Grid.centered(0.0, 10.0, 4096))


def test_kernel_table_accepts_matching_grid(kernel_csv):
    """Test a grid with the table spacing is accepted."""
    path, _ = kernel_csv
    kernel = KernelTable(path).load(Grid(x_min=-5.0, dx=0.01, n_points=1001))
    assert kernel.kind == "tabulated"


def test_kernel_table_needs_columns(tmp_path):
    """Test tables without offset,value columns are rejected."""
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n" + "".join(f"{i},{i}\n" for i in range(10)), encoding="utf-8")
    with pytest.raises(ValidationError, match="lacks columns"):
        KernelTable(path).load()


def test_kernel_table_needs_uniform_offsets(tmp_path):
    """Test non-uniform offsets are rejected."""
    path = tmp_path / "uneven.csv"
    offsets = [0.0, 0.1, 0.2, 0.35, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    path.write_text(
        "offset,value\n" + "".join(f"{o},1.0\n" for o in offsets), encoding="utf-8"
    )
    with pytest.raises(ValidationError, match="uniformly"):
        KernelTable(path).load()


def test_missing_kernel_table(tmp_path):
    """Test a missing file is a validation error."""
    with pytest.raises(ValidationError):
        KernelTable(tmp_path / "none.csv").load()


def test_samples_file_layout(tmp_path):
    """Test the header line, the value column and LF line endings."""
    path = save_samples(SampleSet("x", [0.5, -1.25, 2.0], seed=42), tmp_path / "x.csv")
    raw = path.read_bytes()
    assert b"\r\n" not in raw
    lines = raw.decode("utf-8").splitlines()
    assert lines[0] == "# label=x seed=42"
    assert lines[1] == "value"
    loaded = load_samples(path)
    assert loaded.label == "x"
    assert loaded.seed == 42
    assert list(loaded.values) == [0.5, -1.25, 2.0]


def test_samples_without_seed(tmp_path):
    """Test records without a seed are written as seed=none."""
    path = save_samples(SampleSet("p", [1.0, 2.0]), tmp_path / "p.csv")
    assert load_samples(path).seed is None


def test_samples_need_header(tmp_path):
    """Test files without the label/seed header are rejected."""
    path = tmp_path / "plain.csv"
    path.write_text("value\n1.0\n2.0\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="header"):
        load_samples(path)
