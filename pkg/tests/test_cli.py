"""命令行: 退出码、产物与可复现性"""
import csv
import json

import pytest

from tricl_lab import cli
from tricl_lab.graph import compute_alpha, generate_class_graph
from tricl_lab.models import ClassGraphSpec
from tricl_lab.utils.helpers import file_digest

from conftest import TWO_NODE_ADJACENCY, write_config

SMALL_CLASS_SPEC = {'num_classes': 2, 'naturals_per_class': 3, 'augmentations_per_natural': 2}


def read_rows(path):
    with open(path, encoding='utf-8', newline='') as f:
        return list(csv.DictReader(f))


def run(command, config_path, out, *extra):
    return cli.main([command, '--config', str(config_path), '--out', str(out), *extra])


@pytest.fixture
def identifiability_config(tmp_path):
    return write_config(tmp_path / 'identifiability.json', {
        'kind': 'identifiability',
        'identifiability': {'rows': 12, 'cols': 8, 'k': 3, 'num_solutions': 3},
    })


@pytest.fixture
def two_node_config(tmp_path):
    return write_config(tmp_path / 'two_node.json', {
        'kind': 'train-eval',
        'graph': {'type': 'adjacency', 'adjacency': TWO_NODE_ADJACENCY, 'labels': [0, 1]},
        'train': {'loss_kind': 'tricl', 'k': 2, 'learning_rate': 0.05, 'steps': 5000},
        'evaluation': {'m_grid': [1, 2], 'block_width': 1, 'trials': 5},
    })


class TestIdentifiability:
    def test_writes_artifacts(self, tmp_path, identifiability_config):
        out = tmp_path / 'run'
        assert run('identifiability', identifiability_config, out) == 0
        rows = read_rows(out / 'identifiability.csv')
        assert {row['method'] for row in rows} == {'bifactor', 'trifactor'}
        assert len(rows) == 6
        for row in rows:
            if row['method'] == 'trifactor':
                assert float(row['distance']) < 1e-12

        manifest = json.loads((out / 'manifest.json').read_text(encoding='utf-8'))
        assert manifest['command'] == 'identifiability'
        assert [f['name'] for f in manifest['files']] == ['identifiability.csv', 'report.md']
        for entry in manifest['files']:
            assert entry['sha256'] == file_digest(out / entry['name'])

    def test_rerun_is_byte_identical(self, tmp_path, identifiability_config):
        first, second = tmp_path / 'first', tmp_path / 'second'
        assert run('identifiability', identifiability_config, first) == 0
        assert run('identifiability', identifiability_config, second) == 0
        for name in ('identifiability.csv', 'report.md'):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_rank_beyond_matrix(self, tmp_path, capsys):
        config = write_config(tmp_path / 'bad.json', {
            'kind': 'identifiability',
            'identifiability': {'rows': 5, 'cols': 4, 'k': 6},
        })
        assert run('identifiability', config, tmp_path / 'out') == 2
        assert capsys.readouterr().err.startswith('tricl-lab: error[ConfigurationError]:')


class TestTrainEval:
    def test_two_node(self, tmp_path, two_node_config):
        out = tmp_path / 'nested' / 'deeper' / 'run'
        assert run('train-eval', two_node_config, out) == 0
        importance = read_rows(out / 'importance.csv')
        assert [float(row['s']) for row in importance] == pytest.approx([1.0, 0.2], abs=1e-3)
        assert [float(row['oracle_sigma']) for row in importance] == pytest.approx([1.0, 0.2], abs=1e-12)
        for row in read_rows(out / 'metrics.csv'):
            assert 0.0 <= float(row['value']) <= 1.0
        for name in ('graph.json', 'reference.json', 'model.json', 'report.md', 'manifest.json'):
            assert (out / name).exists()

    def test_deterministic(self, tmp_path):
        config = write_config(tmp_path / 'short.json', {
            'kind': 'train-eval',
            'graph': {'type': 'class', 'spec': SMALL_CLASS_SPEC},
            'train': {'loss_kind': 'tricl', 'k': 3, 'steps': 300},
            'evaluation': {'m_grid': [1, 2, 3], 'neighbors': 1, 'top_r': 1, 'trials': 3},
        })
        first, second = tmp_path / 'first', tmp_path / 'second'
        assert run('train-eval', config, first, '--seed', '4') == 0
        assert run('train-eval', config, second, '--seed', '4') == 0
        for name in ('graph.json', 'reference.json', 'model.json', 'metrics.csv', 'importance.csv', 'report.md'):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_kind_mismatch(self, tmp_path, identifiability_config, capsys):
        assert run('train-eval', identifiability_config, tmp_path / 'out') == 2
        assert 'error[ConfigurationError]' in capsys.readouterr().err

    def test_unknown_field(self, tmp_path):
        config = write_config(tmp_path / 'typo.json', {'kind': 'train-eval', 'trian': {}})
        assert run('train-eval', config, tmp_path / 'out') == 2


class TestBoundsSweep:
    @pytest.fixture
    def bounds_config(self, tmp_path):
        return write_config(tmp_path / 'bounds.json', {
            'kind': 'bounds-sweep',
            'graph': {'type': 'class', 'spec': SMALL_CLASS_SPEC},
            'train': {'k': 4},
            'evaluation': {'m_grid': [1, 2, 8]},
        })

    def test_rows(self, tmp_path, bounds_config):
        out = tmp_path / 'run'
        assert run('bounds-sweep', bounds_config, out) == 0
        rows = read_rows(out / 'bounds.csv')
        assert [int(row['m']) for row in rows] == [1, 2, 4]
        assert all(float(row['gap']) >= -1e-12 for row in rows)
        assert float(rows[-1]['gap']) == 0.0

        alpha = compute_alpha(generate_class_graph(ClassGraphSpec(**SMALL_CLASS_SPEC, seed=0)))
        assert float(rows[0]['alpha']) == pytest.approx(alpha, rel=1e-15)

    def test_rerun_is_byte_identical(self, tmp_path, bounds_config):
        first, second = tmp_path / 'first', tmp_path / 'second'
        assert run('bounds-sweep', bounds_config, first, '--seed', '2') == 0
        assert run('bounds-sweep', bounds_config, second, '--seed', '2') == 0
        for name in ('bounds.csv', 'report.md'):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_rejects_bipartite(self, tmp_path):
        config = write_config(tmp_path / 'bipartite.json', {
            'kind': 'bounds-sweep',
            'graph': {'type': 'bipartite', 'spec': {'n_a': 6, 'n_b': 5, 'num_classes': 2}},
            'train': {'k': 2},
        })
        assert run('bounds-sweep', config, tmp_path / 'out') == 2


class TestGradientAudit:
    @pytest.fixture
    def audit_config(self, tmp_path):
        return write_config(tmp_path / 'audit.json', {
            'kind': 'gradient-audit',
            'audit': {'instances': 3, 'n_nodes': 6, 'k': 2},
        })

    def test_all_losses_pass(self, tmp_path, audit_config):
        out = tmp_path / 'run'
        assert run('gradient-audit', audit_config, out) == 0
        rows = read_rows(out / 'audit.csv')
        assert [row['loss'] for row in rows] == ['scl', 'tricl', 'tri_infonce', 'triclip', 'trimse',
                                                 'sampled_scl', 'sampled_tricl']
        assert all(row['passed'] == 'true' for row in rows)

    def test_rerun_is_byte_identical(self, tmp_path, audit_config):
        first, second = tmp_path / 'first', tmp_path / 'second'
        assert run('gradient-audit', audit_config, first) == 0
        assert run('gradient-audit', audit_config, second) == 0
        for name in ('audit.csv', 'report.md'):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_unknown_loss(self, tmp_path, capsys):
        config = write_config(tmp_path / 'audit.json', {
            'kind': 'gradient-audit',
            'audit': {'losses': ['barlow']},
        })
        assert run('gradient-audit', config, tmp_path / 'out') == 2
        assert 'barlow' in capsys.readouterr().err


def test_missing_config(tmp_path, capsys):
    assert run('bounds-sweep', tmp_path / 'absent.json', tmp_path / 'out') == 2
    assert capsys.readouterr().err.startswith('tricl-lab: error[FileNotFoundError]:')


def test_yaml_syntax_error_is_one_line(tmp_path, capsys):
    config = tmp_path / 'broken.yaml'
    config.write_text('kind: [train-eval\nseed: 1\n', encoding='utf-8')
    assert run('train-eval', config, tmp_path / 'out') == 2
    errors = [line for line in capsys.readouterr().err.splitlines() if line.startswith('tricl-lab: error')]
    assert len(errors) == 1
    assert errors[0].startswith('tricl-lab: error[ConfigurationError]:')
    assert 'line 1' in errors[0] and 'expected' in errors[0]


def test_version(capsys):
    with pytest.raises(SystemExit) as excinfo:
        cli.main(['--version'])
    assert excinfo.value.code == 0
    assert '0.3.0' in capsys.readouterr().out
