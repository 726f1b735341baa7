import numpy as np
import pytest

from autoflow.exceptions import DatasetError, DatasetFormatError
from autoflow.utils.datasets import Dataset, load_csv, write_csv
from tests.conftest import gaussian_blobs


def test_load_small_csv(tmp_path):
    path = tmp_path / 'data.csv'
    path.write_text("x1,x2,label\n1,2,a\n3,4,b\n5,6,a\n7,8,b\n")
    data = load_csv(path, 'label')
    assert data.n_classes == 2
    assert data.class_names == ['a', 'b']
    assert data.labels.tolist() == [0, 1, 0, 1]
    assert data.features.shape == (4, 2)
    assert data.feature_names == ['x1', 'x2']


def test_blank_cell_names_row_and_column(tmp_path):
    path = tmp_path / 'data.csv'
    path.write_text("x1,x2,label\n1,2,a\n3,,b\n")
    with pytest.raises(DatasetFormatError) as excinfo:
        load_csv(path, 'label')
    assert excinfo.value.details['row'] == 3
    assert excinfo.value.details['column'] == 'x2'


@pytest.mark.parametrize('cell', ['inf', '-inf', 'Infinity'])
def test_infinite_cell(tmp_path, cell):
    path = tmp_path / 'data.csv'
    path.write_text(f"x1,x2,label\n1,2,a\n3,{cell},b\n")
    with pytest.raises(DatasetFormatError) as excinfo:
        load_csv(path, 'label')
    assert excinfo.value.details == {'row': 3, 'column': 'x2'}


def test_non_numeric_cell(tmp_path):
    path = tmp_path / 'data.csv'
    path.write_text("x1,label\nabc,a\n1,b\n")
    with pytest.raises(DatasetFormatError):
        load_csv(path, 'label')


def test_missing_label_column(tmp_path):
    path = tmp_path / 'data.csv'
    path.write_text("x1,x2\n1,2\n")
    with pytest.raises(DatasetError) as excinfo:
        load_csv(path, 'label')
    assert excinfo.value.error_code == 'MISSING_LABEL_COLUMN'


def test_single_class(tmp_path):
    path = tmp_path / 'data.csv'
    path.write_text("x1,label\n1,a\n2,a\n")
    with pytest.raises(DatasetError):
        load_csv(path, 'label')


def test_fixed_class_order(tmp_path):
    path = tmp_path / 'data.csv'
    path.write_text("x1,label\n1,b\n2,a\n")
    assert load_csv(path, 'label', class_names=['a', 'b']).labels.tolist() == [1, 0]


def test_write_then_load(tmp_path):
    data = gaussian_blobs(n_per_class=5, n_classes=3)
    write_csv(data, tmp_path / 'out.csv')
    loaded = load_csv(tmp_path / 'out.csv', 'label')
    assert np.array_equal(loaded.features, data.features)
    assert np.array_equal(loaded.labels, data.labels)


def test_dataset_rejects_nan():
    with pytest.raises(DatasetError):
        Dataset(np.array([[np.nan], [1.0]]), np.array([0, 1]), ['a', 'b'])


def test_dataset_rejects_infinity():
    with pytest.raises(DatasetError) as excinfo:
        Dataset(np.array([[np.inf], [1.0]]), np.array([0, 1]), ['a', 'b'])
    assert excinfo.value.error_code == 'NON_FINITE_VALUES'
