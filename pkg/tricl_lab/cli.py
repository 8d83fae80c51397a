"""命令行入口"""
import argparse
import sys
from pathlib import Path
from typing import List, Optional

from .config import Config, ExperimentConfig
from .exceptions import ArtifactError, ConfigurationError
from .experiments import Laboratory
from .parsers import ConfigParser
from .utils.logger import setup_logger

PROG = 'tricl-lab'

# 校验类错误退出码 2, 运行期错误退出码 1
VALIDATION_ERRORS = (ConfigurationError, FileNotFoundError, ArtifactError)

CONFIG_SCHEMA = """\
配置文件为单个 JSON 对象(未知字段一律拒绝):

  kind        identifiability | train-eval | bounds-sweep | gradient-audit
  seed        非负整数, 默认 0 (--seed 覆盖)
  output_dir  输出目录, 默认 runs/latest (--out 覆盖)
  graph       {type: class|bipartite|adjacency|kernel,
               spec: {num_classes, naturals_per_class, augmentations_per_natural,
                      within_class_mix, cross_class_leak, jitter, seed}
                     或 {n_a, n_b, num_classes, cross_class_leak, jitter, seed},
               adjacency, labels, naturals, kernel, natural_labels}
  train       {loss_kind: scl|tricl|tri_infonce|triclip|trimse, k, penalty_weight,
               optimizer: momentum|adaptive, learning_rate, momentum, steps,
               mode: exact|sampled, batch_pairs, seed, init_scale,
               anchor_tolerance, ema_coefficient}
  evaluation  {m_grid, block_width, neighbors, top_r, trials, ridge}
  identifiability {rows, cols, k, num_solutions, trained_runs}
  audit       {losses, instances, eps, n_nodes, k}

输出: CSV(指标), JSON(图/模型/谱参考/清单), report.md(汇总表).
"""


def _load(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {'output_dir': args.out, 'seed': args.seed}
    return ConfigParser(args.config).parse(overrides, expected_kind=args.command)


def cmd_identifiability(config: ExperimentConfig) -> List[Path]:
    """identifiability.csv, report.md, manifest.json"""
    return Laboratory.identifiability(config)


def cmd_train_eval(config: ExperimentConfig) -> List[Path]:
    """graph.json, reference.json, model.json, metrics.csv, importance.csv, report.md, manifest.json"""
    return Laboratory.train_eval(config)


def cmd_bounds_sweep(config: ExperimentConfig) -> List[Path]:
    """bounds.csv, report.md, manifest.json"""
    return Laboratory.bounds_sweep(config)


def cmd_gradient_audit(config: ExperimentConfig) -> List[Path]:
    """audit.csv, report.md, manifest.json"""
    return Laboratory.gradient_audit(config)


COMMANDS = {
    'identifiability': (cmd_identifiability, '两因子/三因子最优解的可辨识性对比'),
    'train-eval': (cmd_train_eval, '训练、规范化、排序并做下游评估'),
    'bounds-sweep': (cmd_bounds_sweep, '下游误差上界量随 m 的变化'),
    'gradient-audit': (cmd_gradient_audit, '解析梯度与中心差分对比'),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG,
                                     description='三因子对比学习实验室',
                                     epilog=CONFIG_SCHEMA,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument('--version', action='version', version=f"%(prog)s {Config.VERSION}")
    subparsers = parser.add_subparsers(dest='command', required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub = subparsers.add_parser(name, help=help_text, description=help_text,
                                    epilog=CONFIG_SCHEMA,
                                    formatter_class=argparse.RawDescriptionHelpFormatter)
        sub.add_argument('--config', required=True, help='JSON 实验配置路径')
        sub.add_argument('--out', default=None, help='输出目录(覆盖 output_dir)')
        sub.add_argument('--seed', type=int, default=None, help='随机种子(覆盖 seed)')
        sub.add_argument('--log-level', default=None,
                         choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], help='日志级别')
        sub.add_argument('--log-file', default=None, help='日志文件')
    return parser


def error_line(e: BaseException) -> str:
    """stderr 单行错误前缀, 多行异常消息折叠为一行"""
    message = ' '.join(str(e).split())
    return f"{PROG}: error[{type(e).__name__}]: {message}"


def main(argv: Optional[List[str]] = None) -> int:
    """运行一个子命令并返回退出码"""
    args = build_parser().parse_args(argv)
    setup_logger(level=args.log_level, log_file=args.log_file)
    command, _ = COMMANDS[args.command]
    try:
        config = _load(args)
        command(config)
    except VALIDATION_ERRORS as e:
        print(error_line(e), file=sys.stderr)
        return 2
    except Exception as e:
        print(error_line(e), file=sys.stderr)
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
