"""实验流水线"""
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Tuple, Union

import numpy as np

from .config import Config, ExperimentConfig, TrainConfig
from .evaluation import (bifactor_vs_trifactor_experiment, bounds_sweep, consecutive_blocks,
                         dimension_block_probe, importance_distribution, knn_eval,
                         linear_probe, random_subset_retrieval, retrieval_map,
                         scl_random_subset_eval, trained_identifiability)
from .exceptions import ConfigurationError, EvaluationError
from .graph import (bipartite_from_joint, build_from_kernel, compute_alpha, from_adjacency,
                    generate_bipartite_graph, generate_class_graph, graph_to_dict,
                    normalize, normalize_bipartite)
from .losses import (draw_batch, finite_difference_check, sampled_scl_loss, sampled_tricl_loss,
                     scl_loss, tri_infonce_loss, triclip_loss, tricl_loss, trimse_loss)
from .models import (AugmentationGraph, BipartiteGraph, BipartiteGraphSpec, ClassGraphSpec,
                     EvalReport, RunManifest)
from .spectra import (decompose, oracle_matrix, reference_to_dict, scl_closed_form,
                      tricl_closed_form, triclip_closed_form)
from .trainer import (canonicalize_columns, canonicalize_signs, model_to_dict,
                      select_top_features, sort_by_importance, train)
from .utils.helpers import derive_rng, file_digest, format_timestamp, utc_now
from .utils.logger import get_logger
from .writers import CsvWriter, JsonWriter, ReportWriter

logger = get_logger()

Graph = Union[AugmentationGraph, BipartiteGraph]
Table = Tuple[str, List[str], List[List[Any]]]

# 梯度审计容差
AUDIT_TOLERANCES = {'tri_infonce': 1e-4}
AUDIT_DEFAULT_TOLERANCE = 1e-5


def _graph_spec(spec_cls, spec: Dict[str, Any], seed: int):
    data = dict(spec or {})
    data.pop('type', None)
    data.setdefault('seed', seed)
    try:
        return spec_cls(**data)
    except TypeError as e:
        raise ConfigurationError(f"图生成参数无效: {e}") from e


def _audit_graph(n: int, rng: np.random.Generator) -> AugmentationGraph:
    naturals = rng.dirichlet(np.ones(n))
    kernel = rng.dirichlet(np.ones(n), size=n)
    return build_from_kernel(naturals, kernel)


def _audit_instance(name: str, rng: np.random.Generator, n: int, k: int,
                    penalty: float) -> Tuple[Callable, Dict[str, np.ndarray]]:
    """随机小实例: (损失函数, 参数)"""
    features = rng.normal(0.0, 1.0 / np.sqrt(n), (n, k))
    raw = rng.normal(0.0, 0.5, k)
    if name == 'triclip':
        joint = rng.dirichlet(np.ones(n * (n + 2))).reshape(n, n + 2)
        p_bar = normalize_bipartite(bipartite_from_joint(joint))
        paired = rng.normal(0.0, 1.0 / np.sqrt(n + 2), (n + 2, k))
        return (lambda p: triclip_loss(p_bar, p['features'], p['paired_features'],
                                       p['raw_importance'], penalty),
                {'features': features, 'paired_features': paired, 'raw_importance': raw})

    graph = _audit_graph(n, rng)
    a_bar = normalize(graph)
    d = graph.degrees
    if name == 'scl':
        return lambda p: scl_loss(a_bar, p['features']), {'features': features}
    if name == 'tricl':
        return (lambda p: tricl_loss(a_bar, p['features'], p['raw_importance'], penalty),
                {'features': features, 'raw_importance': raw})
    if name == 'tri_infonce':
        return (lambda p: tri_infonce_loss(a_bar, d, p['features'], p['raw_importance'], penalty),
                {'features': features, 'raw_importance': raw})
    if name == 'trimse':
        target = rng.normal(0.0, 1.0 / np.sqrt(n), (n, k))
        return (lambda p: trimse_loss(a_bar, d, p['features'], target, p['raw_importance'], penalty),
                {'features': features, 'raw_importance': raw})

    batch = draw_batch(rng, graph.adjacency, 4 * n)
    if name == 'sampled_scl':
        return lambda p: sampled_scl_loss(d, p['features'], batch), {'features': features}
    if name == 'sampled_tricl':
        return (lambda p: sampled_tricl_loss(d, p['features'], p['raw_importance'], batch, penalty),
                {'features': features, 'raw_importance': raw})
    raise ConfigurationError(f"未知审计损失: {name}")


class Laboratory:
    """实验室: 四类实验的统一入口"""

    @classmethod
    def build_graph(cls, config: ExperimentConfig) -> Graph:
        """按配置构造图; 生成参数缺少 seed 时使用顶层 seed"""
        section = config.graph
        if section.type == 'class':
            return generate_class_graph(_graph_spec(ClassGraphSpec, section.spec, config.seed))
        if section.type == 'bipartite':
            return generate_bipartite_graph(_graph_spec(BipartiteGraphSpec, section.spec, config.seed))
        if section.type == 'adjacency':
            return from_adjacency(section.adjacency, section.labels, spec=section.spec)
        return build_from_kernel(section.naturals, section.kernel,
                                 natural_labels=section.natural_labels, spec=section.spec)

    @classmethod
    def run(cls, config: ExperimentConfig) -> List[Path]:
        """按 kind 分派"""
        commands = {
            'identifiability': cls.identifiability,
            'train-eval': cls.train_eval,
            'bounds-sweep': cls.bounds_sweep,
            'gradient-audit': cls.gradient_audit,
        }
        return commands[config.kind](config)

    @classmethod
    def identifiability(cls, config: ExperimentConfig) -> List[Path]:
        """两因子 vs 三因子可辨识性, 可选多种子训练对比"""
        try:
            started, t0 = utc_now(), time.perf_counter()
            section = config.identifiability
            logger.info(f"开始可辨识性实验: {section.rows}x{section.cols}, k={section.k}")
            reports = list(bifactor_vs_trifactor_experiment(section.rows, section.cols, section.k,
                                                            section.num_solutions, config.seed))
            if section.trained_runs > 0:
                graph = cls.build_graph(config)
                seeds = range(config.seed, config.seed + section.trained_runs)
                for kind in ('tricl', 'scl'):
                    train_config = TrainConfig.from_dict({**config.train.to_dict(), 'loss_kind': kind})
                    reports.append(trained_identifiability(graph, train_config, seeds))

            rows = [[r.method, i, j, dist] for r in reports for i, j, dist in r.pairs]
            out = Path(config.output_dir)
            paths = [CsvWriter(out).write('identifiability.csv',
                                          (['method', 'run_i', 'run_j', 'distance'], rows))]
            summary = [[r.method, r.num_runs, r.mean_pairwise_distance, r.distance_variance,
                        str(r.no_pairs).lower(), str(r.degenerate).lower()] for r in reports]
            tables = [('summary', ['method', 'runs', 'mean_distance', 'variance', 'no_pairs', 'degenerate'],
                       summary)]
            return cls._finish('identifiability', config, started, t0, paths, tables)
        except Exception as e:
            logger.error(f"可辨识性实验失败: {e}")
            raise

    @classmethod
    def train_eval(cls, config: ExperimentConfig) -> List[Path]:
        """生成图 → 训练 → 规范化 → 排序 → 下游评估, 并与谱预言机对比"""
        try:
            started, t0 = utc_now(), time.perf_counter()
            graph = cls.build_graph(config)
            train_config = config.train
            k = train_config.k
            trained = sort_by_importance(canonicalize_signs(train(graph, train_config), graph))

            bipartite = isinstance(graph, BipartiteGraph)
            degrees = graph.marginal_a if bipartite else graph.degrees
            labels = graph.labels_a if bipartite else graph.labels
            ref = decompose(oracle_matrix(graph), k)
            if bipartite:
                oracle = triclip_closed_form(ref, graph.marginal_a, graph.marginal_b)
            else:
                oracle = tricl_closed_form(ref, degrees)
            oracle_features = canonicalize_columns(oracle.features, train_config.anchor_tolerance)[0]
            rotation_rng = derive_rng(config.seed, 2)
            rotation = np.linalg.qr(rotation_rng.standard_normal((k, k)))[0]
            scl_features = scl_closed_form(ref, degrees, rotation)

            report = cls._evaluate(config, trained, degrees, labels, oracle_features, scl_features)

            out = Path(config.output_dir)
            json_writer = JsonWriter(out)
            csv_writer = CsvWriter(out)
            s = trained.importance
            share = importance_distribution(trained)
            importance_rows = [[j + 1, float(s[j]), float(share[j]), float(oracle.importance[j]),
                                float(abs(s[j] - oracle.importance[j]))] for j in range(k)]
            paths = [
                json_writer.write('graph.json', graph_to_dict(graph)),
                json_writer.write('reference.json', reference_to_dict(ref)),
                json_writer.write('model.json', model_to_dict(trained)),
                csv_writer.write('metrics.csv', (['metric', 'm_or_block', 'value'], report.metric_rows())),
                csv_writer.write('importance.csv', (['dimension', 's', 's_normalized', 'oracle_sigma',
                                                     'oracle_gap'], importance_rows)),
            ]
            tables = [
                ('importance', ['dimension', 's', 's_normalized', 'oracle_sigma', 'oracle_gap'], importance_rows),
                ('metrics', ['metric', 'm_or_block', 'value'], [list(r) for r in report.metric_rows()]),
                ('training', ['loss', 'steps', 'initial_loss', 'final_loss'],
                 [[train_config.loss_kind, train_config.steps, trained.history[0], trained.final_loss]]),
            ]
            return cls._finish('train-eval', config, started, t0, paths, tables)
        except Exception as e:
            logger.error(f"训练评估失败: {e}")
            raise

    @classmethod
    def _evaluate(cls, config: ExperimentConfig, trained, degrees: np.ndarray, labels: np.ndarray,
                  oracle_features: np.ndarray, scl_features: np.ndarray) -> EvalReport:
        ev = config.evaluation
        k = trained.model.k
        n = degrees.size
        features = trained.model.encoder_features(degrees)
        top_r = min(ev.top_r, n - 1)
        neighbors = min(ev.neighbors, n - 1)
        skipped = [m for m in ev.m_grid if m > k]
        if skipped:
            logger.warning(f"跳过超过 k={k} 的 m: {skipped}")

        report = EvalReport()
        for m in sorted(set(ev.m_grid) - set(skipped)):
            top = select_top_features(trained, m, degrees)
            report.probe_errors[m] = linear_probe(top, labels, degrees, ev.ridge)
            report.oracle_probe_errors[m] = linear_probe(oracle_features[:, :m], labels, degrees, ev.ridge)
            report.scl_probe_errors[m] = scl_random_subset_eval(scl_features, labels, m, ev.trials,
                                                                config.seed, degrees, ev.ridge)
            if top_r >= 1:
                report.retrieval_map[m] = retrieval_map(top, labels, top_r)
                report.scl_retrieval_map[m] = random_subset_retrieval(scl_features, labels, m, ev.trials,
                                                                      config.seed, top_r)
        if neighbors >= 1:
            report.knn_accuracies = knn_eval(features, labels, consecutive_blocks(k, ev.block_width),
                                             neighbors)
        report.block_probe = dimension_block_probe(features, labels, min(ev.block_width, k),
                                                   degrees, ev.ridge)
        report.importance_distribution = importance_distribution(trained).tolist()
        return report

    @classmethod
    def bounds_sweep(cls, config: ExperimentConfig) -> List[Path]:
        """上界量随 m 的变化, 含 m = k 行"""
        try:
            started, t0 = utc_now(), time.perf_counter()
            graph = cls.build_graph(config)
            if isinstance(graph, BipartiteGraph):
                raise ConfigurationError("bounds-sweep 需要对称增强图")
            k = config.train.k
            alpha = compute_alpha(graph)
            ref = decompose(normalize(graph).matrix, k)
            m_values = sorted({m for m in config.evaluation.m_grid if m <= k} | {k})
            reports = bounds_sweep(ref.singular_values, k, m_values, alpha)

            rows = [[r.m, r.u_scl, r.u_tricl, r.gap, r.alpha] for r in reports]
            out = Path(config.output_dir)
            paths = [CsvWriter(out).write('bounds.csv', (['m', 'u_scl', 'u_tricl', 'gap', 'alpha'], rows))]
            detail = [[r.m, r.raw_scl, r.raw_tricl, r.gap_lower_bound] for r in reports]
            tables = [('bounds', ['m', 'u_scl', 'u_tricl', 'gap', 'alpha'], rows),
                      ('raw spectral sums', ['m', 'raw_scl', 'raw_tricl', 'gap_lower_bound'], detail)]
            return cls._finish('bounds-sweep', config, started, t0, paths, tables)
        except Exception as e:
            logger.error(f"上界扫描失败: {e}")
            raise

    @classmethod
    def gradient_audit(cls, config: ExperimentConfig) -> List[Path]:
        """各损失解析梯度与中心差分对比; 任一超出容差则写完产物后报错"""
        try:
            started, t0 = utc_now(), time.perf_counter()
            audit = config.audit
            names = list(audit.losses)
            names += [f"sampled_{name}" for name in ('scl', 'tricl') if name in audit.losses]

            rows, failed = [], []
            for index, name in enumerate(names):
                tolerance = AUDIT_TOLERANCES.get(name, AUDIT_DEFAULT_TOLERANCE)
                worst, worst_instance, worst_parameter = 0.0, 0, ''
                for instance in range(audit.instances):
                    rng = derive_rng(config.seed, index, instance)
                    loss_fn, params = _audit_instance(name, rng, audit.n_nodes, audit.k,
                                                      config.train.penalty_weight)
                    result = finite_difference_check(loss_fn, params, audit.eps, seed=instance)
                    if result.max_relative_error >= worst:
                        worst, worst_instance = result.max_relative_error, instance
                        worst_parameter = f"{result.worst_parameter}{list(result.worst_index)}"
                passed = worst < tolerance
                if not passed:
                    failed.append(name)
                rows.append([name, audit.instances, worst, tolerance, passed, worst_instance, worst_parameter])
                logger.info(f"梯度审计 {name}: 最大相对误差 {worst:.3e} (容差 {tolerance:g})")

            header = ['loss', 'instances', 'max_relative_error', 'tolerance', 'passed',
                      'worst_instance', 'worst_coordinate']
            out = Path(config.output_dir)
            paths = [CsvWriter(out).write('audit.csv', (header, rows))]
            table_rows = [[*row[:4], str(row[4]).lower(), *row[5:]] for row in rows]
            written = cls._finish('gradient-audit', config, started, t0, paths, [('audit', header, table_rows)])
            if failed:
                raise EvaluationError(f"梯度审计未通过: {', '.join(failed)}")
            return written
        except Exception as e:
            logger.error(f"梯度审计失败: {e}")
            raise

    @classmethod
    def _finish(cls, command: str, config: ExperimentConfig, started, t0: float,
                paths: List[Path], tables: List[Table]) -> List[Path]:
        """写 report.md 与 manifest.json"""
        out = Path(config.output_dir)
        metadata = {'command': command, 'seed': config.seed, 'version': Config.VERSION}
        paths = paths + [ReportWriter(out).write(Config.REPORT_NAME, (metadata, tables))]
        files = [{'name': p.name, 'sha256': file_digest(p), 'bytes': p.stat().st_size}
                 for p in sorted(paths, key=lambda p: p.name)]
        manifest = RunManifest(command=command,
                               config=config.to_dict(),
                               tool_version=Config.VERSION,
                               started_at=format_timestamp(started),
                               duration_seconds=time.perf_counter() - t0,
                               files=files)
        paths.append(JsonWriter(out).write(Config.MANIFEST_NAME, manifest.to_dict()))
        logger.info(f"{command} 完成: {len(paths)} 个文件 → {out}")
        return paths
