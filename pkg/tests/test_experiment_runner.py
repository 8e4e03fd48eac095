"""
Test Experiment Runner
Experiment configuration, the dimension table and command dispatch
"""

import pytest

from dissipative_dynamics import NotDQLSTarget
from experiment_runner import (
    CellVerdict, ExperimentConfig, TableCell, TableResult, cell_seed, load_state, resolve_structure, run_cell,
    run_suite, run_table, run_tripartite_batch, selftest
)
from linalg_core import DimensionMismatch
from quantum_state import InvalidName, random_state
from state_reconstruction import supports_of
from tripartite import Prediction, predict


class TestExperimentConfig:
    """Test experiment validation and loading"""

    def test_defaults(self):
        config = ExperimentConfig(command='selftest')
        assert config.seeds == 20
        assert config.da_range == (2, 5)
        assert config.tolerance.value == 1e-10

    def test_unknown_command_raises_error(self):
        with pytest.raises(ValueError, match="Unknown command"):
            ExperimentConfig(command='plot')

    def test_state_command_needs_state(self):
        with pytest.raises(ValueError, match="needs a state"):
            ExperimentConfig(command='check')

    def test_csv_only_for_tables_and_trajectories(self):
        with pytest.raises(ValueError, match="CSV"):
            ExperimentConfig(command='check', state='ghz:3', format='csv')
        assert ExperimentConfig(command='stabilize', state='ghz:3', format='csv').format == 'csv'

    def test_inline_and_file_neighborhoods_conflict(self):
        with pytest.raises(ValueError, match="not both"):
            ExperimentConfig(command='check', state='ghz:3', neighborhoods=[[1, 2]], ns_file='ns.json')

    def test_tri_batch_needs_three_dims(self):
        assert ExperimentConfig(command='tri', dims=[2, 3, 4]).state is None
        with pytest.raises(ValueError, match="three dims"):
            ExperimentConfig(command='tri', dims=[2, 3])

    def test_empty_range_raises_error(self):
        with pytest.raises(ValueError, match="da_range is empty"):
            ExperimentConfig(command='table', da_range=(5, 2))

    @pytest.mark.parametrize("field,value,message", [
        ('seeds', 0, "seeds"),
        ('tol', 0.0, "tol"),
        ('workers', 0, "workers"),
        ('epsilon', 0.3, "epsilon"),
    ])
    def test_invalid_values(self, field, value, message):
        with pytest.raises(ValueError, match=message):
            ExperimentConfig(command='table', **{field: value})

    def test_bad_root_mode_raises_error(self):
        with pytest.raises(ValueError):
            ExperimentConfig(command='ghz-eps', root_mode='square')

    def test_supports_need_dims(self):
        with pytest.raises(ValueError, match="needs dims"):
            ExperimentConfig(command='reconstruct', supports=['a.json'])

    def test_from_dict_rejects_unknown_keys(self):
        with pytest.raises(ValueError, match="Unknown experiment config keys"):
            ExperimentConfig.from_dict({'command': 'selftest', 'colour': 'red'})

    def test_from_yaml_file(self, write_yaml):
        path = write_yaml("exp.yaml", {'command': 'check', 'state': 'ghz:3', 'neighborhoods': [[1, 2], [2, 3]]})
        config = ExperimentConfig.from_yaml_file(path)
        assert config.state == 'ghz:3'
        assert config.neighborhoods == [[1, 2], [2, 3]]

    def test_missing_yaml_file(self, tmp_path):
        with pytest.raises(ValueError, match="not found"):
            ExperimentConfig.from_yaml_file(tmp_path / "missing.yaml")

    def test_to_dict_round_trip(self):
        config = ExperimentConfig(command='table', d_b=4, da_range=(2, 3), seeds=5)
        assert ExperimentConfig.from_dict(config.to_dict()).to_dict() == config.to_dict()


class TestInputs:
    """Test state and structure resolution"""

    def test_named_state(self):
        assert load_state('dicke:4,2').dims == (2, 2, 2, 2)

    def test_random_state_needs_dims(self):
        with pytest.raises(ValueError, match="needs dims"):
            load_state('random')

    def test_random_state_is_seeded(self):
        assert load_state('random', [2, 3], seed=4).fidelity(random_state((2, 3), 4)) == pytest.approx(1.0)

    def test_state_file(self, ghz3, tmp_path):
        path = tmp_path / "ghz.json"
        ghz3.save_json(path)
        assert load_state(str(path)).dims == (2, 2, 2)

    def test_unknown_name(self):
        with pytest.raises(InvalidName):
            load_state('cluster:3')

    def test_default_structure_is_a_chain(self, ghz3):
        assert resolve_structure(ghz3, None).as_lists() == [[1, 2], [2, 3]]

    def test_explicit_structure(self, dicke42):
        assert len(resolve_structure(dicke42, [[1, 2, 3], [2, 3, 4]])) == 2

    def test_structure_from_file(self, dicke42, write_json):
        path = write_json("ns.json", {'n': 4, 'neighborhoods': [[1, 2, 3], [2, 3, 4]]})
        assert resolve_structure(dicke42, None, str(path)).as_lists() == [[1, 2, 3], [2, 3, 4]]

    def test_structure_file_size_mismatch(self, ghz3, write_json):
        path = write_json("ns.json", {'n': 4, 'neighborhoods': [[1, 2, 3], [2, 3, 4]]})
        with pytest.raises(DimensionMismatch, match="covers 4 subsystems"):
            resolve_structure(ghz3, None, str(path))


class TestTable:
    """Test table cells and the assembled table"""

    def test_cell_seeds_differ_by_dims_and_index(self):
        first = cell_seed(0, (2, 2, 3), 0).generate_state(1)[0]
        assert first != cell_seed(0, (2, 2, 3), 1).generate_state(1)[0]
        assert first != cell_seed(0, (2, 2, 4), 0).generate_state(1)[0]
        assert first == cell_seed(0, (2, 2, 3), 0).generate_state(1)[0]

    def test_dqls_cell(self):
        cell = run_cell(2, 2, 1, seeds=3)
        assert cell.verdict is CellVerdict.YES
        assert cell.agreement_count == 3
        assert cell.dims_h0 == [1, 1, 1]
        assert cell.symbol() == 'Y'

    def test_nogo_cell(self):
        cell = run_cell(2, 2, 2, seeds=2)
        assert cell.verdict is CellVerdict.NO
        assert cell.dims_h0 == [4, 4]
        assert cell.matches_prediction

    def test_cell_outside_window_is_skipped(self):
        cell = run_cell(3, 3, 5, seeds=2, max_product=50)
        assert cell.verdict is CellVerdict.SKIPPED
        assert cell.symbol() == '-'

    def test_mixed_cell_is_flagged(self):
        cell = TableCell(2, 2, 1, CellVerdict.MIXED, 2, 3, predict((2, 2, 3)))
        assert not cell.matches_prediction
        assert cell.symbol() == '?*'

    def test_unknown_prediction_always_matches(self):
        cell = TableCell(4, 3, 6, CellVerdict.NO, 3, 3, predict((4, 3, 10)))
        assert cell.matches_prediction
        assert cell.unpredicted

    def test_unpredicted_cells_are_listed_in_the_summary(self):
        cells = [
            TableCell(4, 3, 6, CellVerdict.YES, 3, 3, predict((4, 3, 10))),
            TableCell(2, 3, 1, CellVerdict.YES, 3, 3, predict((2, 3, 3))),
        ]
        table = TableResult(3, [2, 4], [1, 6], cells)
        assert table.summary()['unpredicted_cells'] == [[4, 6, 'Y']]
        assert table.summary()['prediction_mismatches'] == []

    def test_central_qubit_table(self):
        table = run_table(2, (2, 3), (0, 2), seeds=2, workers=2)
        assert len(table.cells) == 6
        assert table.ok
        assert table.csv_rows() == [
            ["d_a\\d_bar (d_b=2)", 0, 1, 2],
            [2, 'N', 'Y', 'N'],
            [3, 'N', 'Y', 'N'],
        ]
        assert table.summary()['prediction_mismatches'] == []

    def test_table_is_reproducible(self):
        first = run_table(2, (2, 2), (0, 1), seeds=2, base_seed=7, workers=1)
        second = run_table(2, (2, 2), (0, 1), seeds=2, base_seed=7, workers=2)
        assert first.to_dict() == second.to_dict()

    def test_missing_cell_raises_key_error(self):
        table = run_table(2, (2, 2), (1, 1), seeds=1)
        with pytest.raises(KeyError):
            table.cell(5, 5)


class TestRunSuite:
    """Test command dispatch"""

    def test_check_ghz(self):
        code, report = run_suite(ExperimentConfig(command='check', state='ghz:3'))
        assert code == 0
        assert report['ok']
        assert report['result']['dim_h0'] == 2
        assert report['config']['command'] == 'check'

    def test_tri_random(self):
        code, report = run_suite(ExperimentConfig(command='tri', state='random', dims=[2, 2, 3]))
        assert code == 0
        assert report['result']['is_dqls']

    def test_tri_random_batch(self):
        code, report = run_suite(ExperimentConfig(command='tri', dims=[2, 3, 4], seeds=3))
        assert code == 0
        assert report['result']['dqls_count'] == 3
        assert [r['sample'] for r in report['result']['runs']] == [0, 1, 2]

    def test_tripartite_batch_is_reproducible(self):
        first = run_tripartite_batch((2, 2, 2), seeds=2, base_seed=3)
        assert first == run_tripartite_batch((2, 2, 2), seeds=2, base_seed=3)
        assert first['not_dqls_count'] == 2
        assert first['predicted']['verdict'] == 'notDQLS'

    def test_decide_dicke(self):
        config = ExperimentConfig(command='decide', state='dicke:4,2', neighborhoods=[[1, 2, 3], [2, 3, 4]])
        code, report = run_suite(config)
        assert code == 0
        assert report['result']['outcome'] == 'DQLS'

    def test_parent_ring_graph_state(self):
        config = ExperimentConfig(command='parent', state='ring:4', neighborhoods=[[1, 2], [2, 3], [3, 4], [1, 4]])
        code, report = run_suite(config)
        assert code == 0
        assert report['result']['all_terms_zero']
        assert report['result']['ground_kernel_dim'] == 16

    def test_stabilize_random_state(self):
        config = ExperimentConfig(command='stabilize', state='random', dims=[2, 2, 2], t_final=2.0, dt=0.1)
        _, report = run_suite(config)
        result = report['result']
        assert result['certificate']['passes']
        assert result['standard_form']
        assert result['max_trace_drift'] < 1e-8
        assert result['trajectory'][0][0] == 0.0
        assert result['csv_rows'][0] == ['t', 'fidelity', 'trace']
        assert len(result['csv_rows']) == len(result['trajectory']) + 1

    def test_stabilize_ghz_is_refused(self):
        with pytest.raises(NotDQLSTarget):
            run_suite(ExperimentConfig(command='stabilize', state='ghz:3'))

    def test_ghz_eps(self):
        code, report = run_suite(ExperimentConfig(command='ghz-eps', seeds=3, epsilon=0.01))
        assert code == 0
        assert len(report['result']['runs']) == 3
        assert report['result']['all_dqls']
        assert report['result']['bounds_checked'] == 3
        assert report['result']['bounds_inapplicable'] == 0
        assert report['result']['all_bounds_satisfied']

    def test_ghz_eps_with_inapplicable_bounds(self):
        _, report = run_suite(ExperimentConfig(command='ghz-eps', seeds=3, epsilon=0.2))
        result = report['result']
        assert result['bounds_inapplicable'] == 3
        assert result['bounds_checked'] == 0
        assert result['all_bounds_satisfied'] is None
        assert all(run['bound_satisfied'] is None for run in result['runs'])

    def test_reconstruct_from_state(self):
        config = ExperimentConfig(command='reconstruct', state='dicke:4,2', neighborhoods=[[1, 2, 3], [2, 3, 4]])
        _, report = run_suite(config)
        assert report['result']['pairs'][0]['status'] == 'Unique'

    def test_reconstruct_from_support_files(self, ghz3, tmp_path):
        paths = []
        for k, item in enumerate(supports_of(ghz3, [[1, 2], [2, 3]])):
            path = tmp_path / f"support_{k}.json"
            item.save_json(path)
            paths.append(str(path))
        config = ExperimentConfig(command='reconstruct', supports=paths, dims=[2, 2, 2])
        _, report = run_suite(config)
        assert report['result']['status'] == 'NotUnique'
        assert report['result']['candidate_dim'] == 2

    def test_selftest_passes(self):
        checks = selftest()
        failed = [c['check'] for c in checks if not c['passed']]
        assert failed == []

    def test_table_report_carries_csv_rows(self):
        config = ExperimentConfig(command='table', d_b=2, da_range=(2, 2), dbar_range=(0, 1), seeds=1)
        code, report = run_suite(config)
        assert code == 0
        assert report['result']['csv_rows'][1] == [2, 'N', 'Y']


@pytest.mark.slow
class TestFullTables:
    """Full d_b = 3 and d_b = 4 tables at 20 seeds per cell"""

    @pytest.mark.parametrize("d_b,da_range,dbar_range,last_dqls,unpredicted", [
        (3, (2, 5), (0, 12), {2: 3, 3: 5, 4: 6, 5: 8}, [[4, 6, 'Y'], [5, 8, 'Y']]),
        (4, (4, 8), (11, 24), {4: 11, 5: 13, 6: 16, 7: 19, 8: 21},
         [[5, 13, 'Y'], [6, 16, 'Y'], [7, 19, 'Y'], [8, 21, 'Y']]),
    ])
    def test_table_sweep(self, d_b, da_range, dbar_range, last_dqls, unpredicted):
        table = run_table(d_b, da_range, dbar_range, seeds=20, workers=4, geometric_max_dim=128)
        for cell in table.cells:
            expected = CellVerdict.YES if cell.d_bar <= last_dqls[cell.d_a] else CellVerdict.NO
            assert cell.verdict is expected, f"d_a={cell.d_a}, d_bar={cell.d_bar}"
        summary = table.summary()
        assert summary['verdicts']['mixed'] == 0
        assert summary['method_disagreements'] == 0
        assert summary['prediction_mismatches'] == []
        assert sorted(summary['unpredicted_cells']) == unpredicted

    def test_cell_beyond_the_closed_form(self):
        cell = run_cell(7, 4, 19, seeds=20, geometric_max_dim=128)
        assert cell.d_c == 26
        assert cell.verdict is CellVerdict.YES
        assert cell.prediction.verdict is Prediction.UNKNOWN
        assert cell.unpredicted
        assert "unknown" in cell.note
        assert cell.symbol() == 'Y'
